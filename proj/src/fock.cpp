#include "pdao/fock.hpp"
#include "pdao/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace pdao {

TruncationOverflow::TruncationOverflow(double time, double tail, double tolerance)
    : std::runtime_error(fmt::format(
          "truncation overflow at t={:.6g}: top-band population {:.3e} exceeds {:.3e}",
          time, tail, tolerance)),
      time_(time), tail_(tail) {}

IntegrationFailure::IntegrationFailure(const std::string &what, double last_good_time)
    : std::runtime_error(what), last_good_time_(last_good_time) {}

FockBasis make_basis(int n_max, double tail_tolerance) {
    if (n_max < 1)
        throw std::invalid_argument(fmt::format("n_max must be >= 1, got {}", n_max));
    if (!(tail_tolerance > 0.0 && tail_tolerance < 1.0))
        throw std::invalid_argument(
            fmt::format("tail_tolerance must lie in (0, 1), got {}", tail_tolerance));
    return FockBasis(n_max, tail_tolerance);
}

void PureState::normalize() {
    const double nrm = amplitudes.norm();
    if (nrm == 0.0)
        throw std::invalid_argument("cannot normalize the zero vector");
    amplitudes /= nrm;
}

void DensityMatrix::hermitize() {
    Matrix sym = 0.5 * (elements + elements.adjoint());
    elements = std::move(sym);
}

double DensityMatrix::hermiticity_error() const {
    return (elements - elements.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(elements, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Operator annihilation(const FockBasis &basis) {
    const int d = basis.dimension();
    Matrix a = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {std::move(a), basis};
}

Operator creation(const FockBasis &basis) {
    Operator a = annihilation(basis);
    return {a.elements.adjoint(), basis};
}

Operator number_operator(const FockBasis &basis) {
    const int d = basis.dimension();
    Matrix n = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k)
        n(k, k) = static_cast<double>(k);
    return {std::move(n), basis};
}

Operator identity(const FockBasis &basis) {
    return {Matrix::Identity(basis.dimension(), basis.dimension()), basis};
}

PureState fock_state(const FockBasis &basis, int n) {
    if (n < 0 || n > basis.n_max())
        throw std::invalid_argument(
            fmt::format("Fock level {} outside basis 0..{}", n, basis.n_max()));
    Vector psi = Vector::Zero(basis.dimension());
    psi(n) = 1.0;
    return {std::move(psi), basis};
}

PureState superposition(const FockBasis &basis, std::span<const int> levels) {
    if (levels.empty())
        throw std::invalid_argument("superposition needs at least one level");
    Vector psi = Vector::Zero(basis.dimension());
    for (int n : levels) {
        if (n < 0 || n > basis.n_max())
            throw std::invalid_argument(
                fmt::format("Fock level {} outside basis 0..{}", n, basis.n_max()));
        psi(n) += 1.0;
    }
    PureState state{std::move(psi), basis};
    state.normalize();
    return state;
}

DensityMatrix vacuum(const FockBasis &basis) { return fock_density(basis, 0); }

DensityMatrix fock_density(const FockBasis &basis, int n) {
    return dm_from_pure(fock_state(basis, n));
}

Complex expectation(const Operator &op, const DensityMatrix &rho) {
    if (op.basis != rho.basis)
        throw std::invalid_argument("expectation: operator and state live in different bases");
    // Tr(rho op) without forming the product.
    return (rho.elements.transpose().cwiseProduct(op.elements)).sum();
}

DensityMatrix dm_from_pure(const PureState &psi) {
    const double nrm = psi.norm();
    if (std::abs(nrm - 1.0) > 1e-8)
        throw std::invalid_argument(
            fmt::format("dm_from_pure: state norm {:.12g} is not 1", nrm));
    return {psi.amplitudes * psi.amplitudes.adjoint(), psi.basis};
}

namespace {

void check_band(const FockBasis &basis, int band) {
    if (band < 1 || band > basis.n_max())
        throw std::invalid_argument(
            fmt::format("tail band {} outside 1..{}", band, basis.n_max()));
}

} // namespace

double tail_mass(const DensityMatrix &rho, int band) {
    check_band(rho.basis, band);
    double sum = 0.0;
    for (int n = rho.basis.n_max() - band + 1; n <= rho.basis.n_max(); ++n)
        sum += rho.elements(n, n).real();
    return sum;
}

double tail_mass(const PureState &psi, int band) {
    check_band(psi.basis, band);
    double sum = 0.0;
    for (int n = psi.basis.n_max() - band + 1; n <= psi.basis.n_max(); ++n)
        sum += std::norm(psi.amplitudes(n));
    return sum;
}

} // namespace pdao
