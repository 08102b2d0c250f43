#pragma once

// Shared machinery for the master and QSD integrators: the split of the
// generator into the static diagonal Hamiltonian (propagated exactly) and
// the time-dependent pump plus dissipation.

#include <vector>

#include "pdao/fock.hpp"
#include "pdao/model.hpp"

namespace pdao::detail {

class Generator {
  public:
    Generator(const ModelParams &params, const PulseTrain &train, const FockBasis &basis);

    const FockBasis &basis() const { return basis_; }
    const Eigen::VectorXd &energies() const { return energies_; }
    const std::vector<Matrix> &jumps() const { return jumps_; }
    const Matrix &jump_sum() const { return jump_sum_; }

    /// Pump amplitude drive*f(t).
    double pump_amplitude(double t) const;

    /// -i[V(t), rho] + D(rho), V being the pump term only. rho Hermitian.
    void interaction_rhs(double t, const Matrix &rho, Matrix &out) const;
    /// Full Lindblad right-hand side, static Hamiltonian included.
    void full_rhs(double t, const Matrix &rho, Matrix &out) const;

    /// (-i V(t) - K/2) psi with K = sum L^+L.
    void effective_apply(double t, const Vector &psi, Vector &out) const;

  private:
    void commutator_rhs(const Matrix &generator, const Matrix &rho, Matrix &out) const;

    FockBasis basis_;
    ModelParams params_;
    PulseTrain train_;
    Eigen::VectorXd energies_;
    Matrix pump_;
    std::vector<Matrix> jumps_;
    std::vector<Matrix> jumps_adj_;
    Matrix jump_sum_;
    mutable Matrix scratch_;
    mutable Matrix scratch2_;
};

/// Elementwise phase factors exp(-i (E_n - E_m) s) for matrices and
/// exp(-i E_n s) for vectors.
struct FreePhases {
    FreePhases() = default;
    FreePhases(const Eigen::VectorXd &energies, double s);

    double s = 0.0;
    Matrix matrix;
    Vector vector;
};

} // namespace pdao::detail
