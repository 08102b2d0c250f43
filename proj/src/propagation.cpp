#include "propagation.hpp"

namespace pdao::detail {

Generator::Generator(const ModelParams &params, const PulseTrain &train, const FockBasis &basis)
    : basis_(basis), params_(params), train_(train), energies_(static_energies(params, basis)),
      pump_(pump_operator(params, basis).elements) {
    const int d = basis.dimension();
    jump_sum_ = Matrix::Zero(d, d);
    for (auto &op : lindblad_ops(params, basis)) {
        jumps_adj_.push_back(op.elements.adjoint());
        jump_sum_.noalias() += jumps_adj_.back() * op.elements;
        jumps_.push_back(std::move(op.elements));
    }
    scratch_.resize(d, d);
    scratch2_.resize(d, d);
}

double Generator::pump_amplitude(double t) const {
    return params_.drive * pulse_envelope(t, train_);
}

// G rho + (G rho)^+ + sum L rho L^+, with G = -iH - K/2. Valid for Hermitian rho.
void Generator::commutator_rhs(const Matrix &generator, const Matrix &rho, Matrix &out) const {
    out.noalias() = generator * rho;
    scratch_ = out.adjoint();
    out += scratch_;
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
        scratch_.noalias() = jumps_[i] * rho;
        out.noalias() += scratch_ * jumps_adj_[i];
    }
}

void Generator::interaction_rhs(double t, const Matrix &rho, Matrix &out) const {
    scratch2_ = (-kI * pump_amplitude(t)) * pump_ - 0.5 * jump_sum_;
    commutator_rhs(scratch2_, rho, out);
}

void Generator::full_rhs(double t, const Matrix &rho, Matrix &out) const {
    scratch2_ = (-kI * pump_amplitude(t)) * pump_ - 0.5 * jump_sum_;
    scratch2_.diagonal() += -kI * energies_.cast<Complex>();
    commutator_rhs(scratch2_, rho, out);
}

void Generator::effective_apply(double t, const Vector &psi, Vector &out) const {
    out.noalias() = (-kI * pump_amplitude(t)) * (pump_ * psi);
    out.noalias() -= 0.5 * (jump_sum_ * psi);
}

FreePhases::FreePhases(const Eigen::VectorXd &energies, double step) : s(step) {
    const auto d = energies.size();
    vector.resize(d);
    matrix.resize(d, d);
    for (Eigen::Index n = 0; n < d; ++n)
        vector(n) = std::polar(1.0, -energies(n) * step);
    for (Eigen::Index m = 0; m < d; ++m)
        for (Eigen::Index n = 0; n < d; ++n)
            matrix(n, m) = std::polar(1.0, -(energies(n) - energies(m)) * step);
}

} // namespace pdao::detail
