#pragma once

#include <stdexcept>
#include <string>

namespace pdao {

/// Population leaked into the top guard band of the Fock basis.
class TruncationOverflow : public std::runtime_error {
  public:
    TruncationOverflow(double time, double tail, double tolerance);

    double time() const { return time_; }
    double tail() const { return tail_; }

  private:
    double time_;
    double tail_;
};

/// The integrator could not produce a trustworthy state.
class IntegrationFailure : public std::runtime_error {
  public:
    IntegrationFailure(const std::string &what, double last_good_time);

    double last_good_time() const { return last_good_time_; }

  private:
    double last_good_time_;
};

class NonStationary : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace pdao
