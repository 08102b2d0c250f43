#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pdao/fock.hpp"

using namespace pdao;

TEST(FockBasis, RejectsBadParameters) {
    EXPECT_THROW(make_basis(0), std::invalid_argument);
    EXPECT_THROW(make_basis(-3), std::invalid_argument);
    EXPECT_THROW(make_basis(10, 0.0), std::invalid_argument);
    EXPECT_THROW(make_basis(10, 1.0), std::invalid_argument);
    const auto b = make_basis(10, 1e-8);
    EXPECT_EQ(b.n_max(), 10);
    EXPECT_EQ(b.dimension(), 11);
    EXPECT_DOUBLE_EQ(b.tail_tolerance(), 1e-8);
}

TEST(FockOperators, LadderMatrixElements) {
    const auto b = make_basis(8);
    const Matrix a = annihilation(b).elements;
    const Matrix ad = creation(b).elements;
    for (int n = 1; n <= 8; ++n) {
        EXPECT_DOUBLE_EQ(a(n - 1, n).real(), std::sqrt(n));
        EXPECT_DOUBLE_EQ(ad(n, n - 1).real(), std::sqrt(n));
    }
    EXPECT_NEAR((a.adjoint() - ad).norm(), 0.0, 0.0);
    const Matrix n_op = number_operator(b).elements;
    EXPECT_NEAR((ad * a - n_op).norm(), 0.0, 1e-14);
    // [a, a^+] = 1 except at the truncation edge.
    const Matrix comm = a * ad - ad * a;
    for (int n = 0; n < 8; ++n)
        EXPECT_NEAR(std::abs(comm(n, n) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(comm(8, 8).real(), -8.0, 1e-14);
}

TEST(FockStates, SuperpositionIsNormalizedEqualWeight) {
    const auto b = make_basis(5);
    const std::vector<int> levels{0, 2};
    const auto psi = superposition(b, levels);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(psi.amplitudes(0)), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(psi.amplitudes(2)), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(psi.amplitudes(1), Complex(0.0));
    EXPECT_THROW(fock_state(b, 6), std::invalid_argument);
}

TEST(FockStates, ExpectationOfNumberOperator) {
    const auto b = make_basis(6);
    EXPECT_NEAR(expectation(number_operator(b), fock_density(b, 3)).real(), 3.0, 1e-15);
    EXPECT_NEAR(expectation(number_operator(b), vacuum(b)).real(), 0.0, 1e-15);
    const auto other = make_basis(7);
    EXPECT_THROW(expectation(number_operator(other), vacuum(b)), std::invalid_argument);
}

TEST(FockStates, DensityFromPure) {
    const auto b = make_basis(4);
    auto psi = fock_state(b, 1);
    const auto rho = dm_from_pure(psi);
    EXPECT_NEAR(std::abs(rho.trace() - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(rho.hermiticity_error(), 0.0, 0.0);
    psi.amplitudes *= 1.1;
    EXPECT_THROW(dm_from_pure(psi), std::invalid_argument);
    psi.normalize();
    EXPECT_NO_THROW(dm_from_pure(psi));
}

TEST(FockStates, TailMass) {
    const auto b = make_basis(10);
    EXPECT_DOUBLE_EQ(tail_mass(fock_density(b, 6), kGuardBand), 1.0);
    EXPECT_DOUBLE_EQ(tail_mass(fock_density(b, 5), kGuardBand), 0.0);
    EXPECT_DOUBLE_EQ(tail_mass(fock_state(b, 10), 1), 1.0);
    EXPECT_THROW(tail_mass(vacuum(b), 0), std::invalid_argument);
    EXPECT_THROW(tail_mass(vacuum(b), 11), std::invalid_argument);
}

TEST(DensityMatrixDiagnostics, HermitizeAndEigenvalue) {
    const auto b = make_basis(3);
    DensityMatrix rho = vacuum(b);
    rho.elements(0, 1) = Complex(0.1, 0.2);
    EXPECT_GT(rho.hermiticity_error(), 0.1);
    rho.hermitize();
    EXPECT_LE(rho.hermiticity_error(), 1e-15);
    // diag(1, 0) plus off-diagonal c has eigenvalues (1 +- sqrt(1 + 4|c|^2)) / 2.
    const double c2 = std::norm(Complex(0.05, 0.1));
    EXPECT_NEAR(rho.min_eigenvalue(), 0.5 * (1.0 - std::sqrt(1.0 + 4.0 * c2)), 1e-14);
}
