#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pdao {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Truncated number-state basis |0>, ..., |n_max>.
///
/// `tail_tolerance` bounds the population allowed in the top guard band of
/// the basis; every evolution routine checks it at each output sample.
class FockBasis {
  public:
    FockBasis() = default;

    int n_max() const { return n_max_; }
    int dimension() const { return n_max_ + 1; }
    double tail_tolerance() const { return tail_tolerance_; }

    friend bool operator==(const FockBasis &, const FockBasis &) = default;

  private:
    friend FockBasis make_basis(int n_max, double tail_tolerance);
    FockBasis(int n_max, double tail_tolerance)
        : n_max_(n_max), tail_tolerance_(tail_tolerance) {}

    int n_max_ = 1;
    double tail_tolerance_ = 1e-6;
};

/// Throws std::invalid_argument unless n_max >= 1 and tail_tolerance is in (0, 1).
FockBasis make_basis(int n_max, double tail_tolerance = 1e-6);

/// Width of the top band checked by the truncation guard.
inline constexpr int kGuardBand = 5;

struct Operator {
    Matrix elements;
    FockBasis basis;
};

struct PureState {
    Vector amplitudes;
    FockBasis basis;

    double norm() const { return amplitudes.norm(); }
    void normalize();
};

struct DensityMatrix {
    Matrix elements;
    FockBasis basis;

    Complex trace() const { return elements.trace(); }
    /// rho <- (rho + rho^dagger) / 2
    void hermitize();
    double hermiticity_error() const;
    double min_eigenvalue() const;
};

Operator annihilation(const FockBasis &basis);
Operator creation(const FockBasis &basis);
Operator number_operator(const FockBasis &basis);
Operator identity(const FockBasis &basis);

PureState fock_state(const FockBasis &basis, int n);
/// Normalized equal-weight superposition of the listed Fock levels.
PureState superposition(const FockBasis &basis, std::span<const int> levels);

DensityMatrix vacuum(const FockBasis &basis);
DensityMatrix fock_density(const FockBasis &basis, int n);

/// Tr(rho op). Throws std::invalid_argument on a basis mismatch.
Complex expectation(const Operator &op, const DensityMatrix &rho);

/// |psi><psi|. Throws std::invalid_argument when | ||psi|| - 1 | > 1e-8.
DensityMatrix dm_from_pure(const PureState &psi);

/// Population of the top `band` levels, n_max-band+1 .. n_max.
double tail_mass(const DensityMatrix &rho, int band);
double tail_mass(const PureState &psi, int band);

} // namespace pdao
