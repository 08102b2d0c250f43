#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pdao/errors.hpp"
#include "pdao/master.hpp"
#include "pdao/phase_space.hpp"

using namespace pdao;

namespace {

PulseTrain fig3_train() {
    PulseTrain p;
    p.t0 = 4.0;
    p.width = 0.5;
    p.period = 4.0;
    return p;
}

ModelParams fig3_model() { return {.delta = -2.0, .chi = 5.0, .drive = 10.0, .phi = M_PI}; }

std::vector<double> grid(double t0, double t1, double step) {
    std::vector<double> out;
    const int n = static_cast<int>(std::lround((t1 - t0) / step));
    for (int k = 0; k <= n; ++k)
        out.push_back(t0 + k * step);
    return out;
}

EvolutionConfig evolution(const FockBasis &b, double t_end, double sample_step) {
    EvolutionConfig c;
    c.t_end = t_end;
    c.sample_times = grid(0.0, t_end, sample_step);
    c.basis = b;
    return c;
}

// -i[H, rho] + sum_k (L rho L^+ - {L^+L, rho}/2), written out term by term.
Matrix lindblad_oracle(const Matrix &rho, double t, const ModelParams &p, const PulseTrain &train,
                       const FockBasis &b) {
    const Matrix h = hamiltonian_at(t, p, train, b).elements;
    Matrix out = -kI * (h * rho - rho * h);
    for (const auto &op : lindblad_ops(p, b)) {
        const Matrix &l = op.elements;
        const Matrix k = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (k * rho + rho * k);
    }
    return out;
}

DensityMatrix random_density(const FockBasis &b, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix m(b.dimension(), b.dimension());
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = Complex(g(rng), g(rng));
    Matrix rho = m * m.adjoint();
    rho /= rho.trace();
    return {rho, b};
}

} // namespace

TEST(LiouvillianApply, MatchesTermByTermOracle) {
    const auto b = make_basis(12);
    ModelParams p = fig3_model();
    p.nbath = 0.3;
    const auto train = fig3_train();
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto rho = random_density(b, seed);
        for (double t : {0.0, 3.8, 4.0, 6.1}) {
            const Matrix got = liouvillian_apply(rho, t, p, train, b);
            const Matrix want = lindblad_oracle(rho.elements, t, p, train, b);
            EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-11) << "t=" << t;
            EXPECT_LE(std::abs(got.trace()), 1e-11);
        }
    }
}

TEST(StableStep, ClassicSchemeIsLimitedByLadderWidth) {
    const auto b = make_basis(30);
    const auto p = fig3_model();
    const double lawson = stable_step(p, fig3_train(), b, Scheme::integrating_factor_rk4);
    const double classic = stable_step(p, fig3_train(), b, Scheme::classic_rk4);
    EXPECT_LT(classic, lawson);
    EXPECT_LT(classic, 2.8 / (5.0 * 900.0 - 2.0 * 30.0));
}

TEST(IntegrateMaster, FreeDecayOfFockOne) {
    const auto b = make_basis(20);
    auto cfg = evolution(b, 5.0, 0.5);
    const auto traj = integrate_master(fock_density(b, 1), cfg, ModelParams{}, PulseTrain::constant());
    ASSERT_EQ(traj.times.size(), cfg.sample_times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double exact = std::exp(-traj.times[i]);
        EXPECT_NEAR(traj.states[i].elements(1, 1).real(), exact, 1e-7 * exact);
        EXPECT_NEAR(traj.states[i].elements(0, 0).real(), 1.0 - exact, 1e-7);
    }
}

TEST(IntegrateMaster, CoherentDecayKeepsCoherentForm) {
    // A coherent state under pure damping stays coherent: alpha(t) = alpha0 e^{-t/2},
    // and <a> = alpha(t) exactly.
    const auto b = make_basis(30);
    Vector amp(b.dimension());
    const Complex alpha0(1.2, -0.5);
    double fact = 1.0;
    for (int n = 0; n <= b.n_max(); ++n) {
        if (n > 0)
            fact *= n;
        amp(n) = std::exp(-0.5 * std::norm(alpha0)) * std::pow(alpha0, n) / std::sqrt(fact);
    }
    PureState psi{amp, b};
    psi.normalize();
    auto cfg = evolution(b, 2.0, 1.0);
    const auto traj = integrate_master(dm_from_pure(psi), cfg, ModelParams{}, PulseTrain::constant());
    const Operator a = annihilation(b);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const Complex expected = alpha0 * std::exp(-0.5 * traj.times[i]);
        EXPECT_NEAR(std::abs(expectation(a, traj.states[i]) - expected), 0.0, 1e-8);
    }
}

TEST(IntegrateMaster, LawsonAgreesWithClassicRk4) {
    const auto b = make_basis(20);
    const auto p = fig3_model();
    auto cfg = evolution(b, 6.0, 0.5);
    cfg.step.verify_convergence = false;
    cfg.step.initial_dt = 5e-4;
    const auto lawson = integrate_master(vacuum(b), cfg, p, fig3_train());
    cfg.scheme = Scheme::classic_rk4;
    const auto classic = integrate_master(vacuum(b), cfg, p, fig3_train());
    for (std::size_t i = 0; i < lawson.times.size(); ++i)
        EXPECT_LE((lawson.states[i].elements - classic.states[i].elements).cwiseAbs().maxCoeff(),
                  1e-7)
            << "t=" << lawson.times[i];
}

TEST(IntegrateMaster, DiagnosticsStayWithinLimits) {
    const auto b = make_basis(20);
    auto cfg = evolution(b, 10.0, 0.1);
    const auto traj = integrate_master(vacuum(b), cfg, fig3_model(), fig3_train());
    EXPECT_EQ(traj.positivity_alarms, 0);
    for (const auto &d : traj.diagnostics) {
        EXPECT_LE(d.trace_error, kTraceDriftLimit);
        EXPECT_LE(d.hermiticity_error, 1e-12);
        EXPECT_GE(d.min_eigenvalue, kPositivityAlarm);
        EXPECT_LT(d.tail_mass, b.tail_tolerance());
    }
}

TEST(IntegrateMasterProperty, HalvingStepChangesMeanExcitationBelowTolerance) {
    const auto b = make_basis(16);
    for (double drive : {4.0, 10.0}) {
        ModelParams p = fig3_model();
        p.drive = drive;
        auto cfg = evolution(b, 6.0, 1.0);
        cfg.step.verify_convergence = false;
        cfg.step.initial_dt = 1e-3;
        const auto coarse = integrate_master(vacuum(b), cfg, p, fig3_train());
        cfg.step.initial_dt = 5e-4;
        const auto fine = integrate_master(vacuum(b), cfg, p, fig3_train());
        const double n0 = mean_excitation(coarse.states.back());
        const double n1 = mean_excitation(fine.states.back());
        EXPECT_LT(std::abs(n0 - n1), cfg.step.rel_tol * std::abs(n1)) << "drive " << drive;
    }
}

TEST(IntegrateMaster, SamplesLandOnRequestedTimes) {
    const auto b = make_basis(8);
    EvolutionConfig cfg;
    cfg.basis = b;
    cfg.t_end = 1.0;
    cfg.sample_times = {0.0, 0.0123, 0.5, 0.77701, 1.0};
    const auto traj = integrate_master(fock_density(b, 1), cfg, ModelParams{}, PulseTrain::constant());
    for (std::size_t i = 0; i < cfg.sample_times.size(); ++i) {
        EXPECT_EQ(traj.times[i], cfg.sample_times[i]);
        EXPECT_NEAR(traj.states[i].elements(1, 1).real(), std::exp(-cfg.sample_times[i]), 1e-9);
    }
}

TEST(IntegrateMaster, ReportsTruncationOverflow) {
    const auto b = make_basis(6);
    auto cfg = evolution(b, 10.0, 0.1);
    ModelParams p;
    p.drive = 3.0; // resonant, chi = 0: unbounded two-photon pumping
    try {
        integrate_master(vacuum(b), cfg, p, PulseTrain::constant());
        FAIL() << "expected TruncationOverflow";
    } catch (const TruncationOverflow &e) {
        EXPECT_GE(e.tail(), b.tail_tolerance());
        EXPECT_GT(e.time(), 0.0);
    }
}

TEST(IntegrateMaster, RejectsInvalidConfig) {
    const auto b = make_basis(4);
    EvolutionConfig cfg;
    cfg.basis = b;
    cfg.t_start = 1.0;
    cfg.t_end = 0.5;
    EXPECT_THROW(integrate_master(vacuum(b), cfg, ModelParams{}, PulseTrain::constant()),
                 std::invalid_argument);
    cfg = evolution(b, 1.0, 0.5);
    cfg.sample_times = {0.5, 0.2};
    EXPECT_THROW(integrate_master(vacuum(b), cfg, ModelParams{}, PulseTrain::constant()),
                 std::invalid_argument);
}

TEST(SteadyState, UndrivenZeroTemperatureIsVacuum) {
    const auto b = make_basis(10);
    const auto rho = steady_state(ModelParams{}, b, 1e-10);
    EXPECT_NEAR(rho.elements(0, 0).real(), 1.0, 1e-10);
}

TEST(SteadyState, ThermalState) {
    const auto b = make_basis(25);
    ModelParams p;
    p.nbath = 0.5;
    const auto rho = steady_state(p, b, 1e-10);
    // Detailed balance: P(n+1)/P(n) = N/(N+1).
    for (int n = 0; n < 10; ++n)
        EXPECT_NEAR(rho.elements(n + 1, n + 1).real() / rho.elements(n, n).real(), 1.0 / 3.0, 1e-8);
    EXPECT_NEAR(mean_excitation(rho), 0.5, 1e-9);
}

TEST(SteadyState, MonochromaticDriveReachesFixedPoint) {
    const auto b = make_basis(20);
    const ModelParams p{.delta = -2.0, .chi = 5.0, .drive = 7.0};
    const auto rho = steady_state(p, b, 1e-9);
    const Matrix rate = liouvillian_apply(rho, 0.0, p, PulseTrain::constant(), b);
    EXPECT_LT(rate.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-12);
    EXPECT_GT(rho.min_eigenvalue(), -1e-10);
}

TEST(SteadyState, HorizonExhaustionThrows) {
    const auto b = make_basis(20);
    SteadyStateOptions o;
    o.max_time = 0.5;
    EXPECT_THROW(steady_state(ModelParams{.delta = -2.0, .chi = 5.0, .drive = 7.0}, b, 1e-9, o),
                 NonStationary);
}
