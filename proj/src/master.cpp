#include "pdao/master.hpp"
#include "pdao/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "propagation.hpp"

namespace pdao {

void EvolutionConfig::validate() const {
    std::string errors;
    auto add = [&](const std::string &msg) {
        if (!errors.empty())
            errors += "; ";
        errors += msg;
    };
    if (!(t_start < t_end))
        add(fmt::format("t_start ({}) must be < t_end ({})", t_start, t_end));
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double s = sample_times[i];
        if (s < t_start || s > t_end) {
            add(fmt::format("sample time {} outside [{}, {}]", s, t_start, t_end));
            break;
        }
        if (i > 0 && !(s > sample_times[i - 1])) {
            add("sample times must be strictly increasing");
            break;
        }
    }
    if (!(step.initial_dt > 0.0))
        add("initial_dt must be > 0");
    if (!(step.rel_tol > 0.0))
        add("rel_tol must be > 0");
    if (!(step.abs_tol >= 0.0))
        add("abs_tol must be >= 0");
    if (step.max_halvings < 0)
        add("max_halvings must be >= 0");
    if (!errors.empty())
        throw std::invalid_argument("invalid evolution config: " + errors);
}

Matrix liouvillian_apply(const DensityMatrix &rho, double t, const ModelParams &params,
                         const PulseTrain &train, const FockBasis &basis) {
    if (rho.basis != basis)
        throw std::invalid_argument("liouvillian_apply: state and model bases differ");
    detail::Generator gen(params, train, basis);
    Matrix out(basis.dimension(), basis.dimension());
    gen.full_rhs(t, rho.elements, out);
    return out;
}

double stable_step(const ModelParams &params, const PulseTrain &train, const FockBasis &basis,
                   Scheme scheme) {
    const double nmax = basis.n_max();
    // ||V|| <= 2 * amplitude * max sqrt((n+1)(n+2)) over the two pump bands.
    const double pump_norm =
        2.0 * params.drive * train.peak_bound() * std::sqrt(nmax * std::max(nmax - 1.0, 0.0));
    const double damping =
        params.gamma * ((params.nbath + 1.0) * nmax + params.nbath * (nmax + 1.0));
    double radius = 2.0 * pump_norm + damping;
    if (scheme == Scheme::classic_rk4) {
        const Eigen::VectorXd e = static_energies(params, basis);
        radius += e.maxCoeff() - e.minCoeff();
    }
    // RK4 is stable on the imaginary axis up to 2*sqrt(2).
    return radius > 0.0 ? 2.5 / radius : 1.0;
}

namespace {

constexpr double kPolishThreshold = 1e-4;
constexpr double kPolishMaxShift = 1e-3;

class MasterStepper {
  public:
    MasterStepper(const ModelParams &params, const PulseTrain &train, const FockBasis &basis,
                  Scheme scheme)
        : gen_(params, train, basis), scheme_(scheme) {
        const int d = basis.dimension();
        for (Matrix *m : {&k1_, &k2_, &k3_, &k4_, &stage_, &base_})
            m->resize(d, d);
    }

    const detail::Generator &generator() const { return gen_; }

    void step(Matrix &rho, double t, double h) {
        if (scheme_ == Scheme::classic_rk4)
            classic(rho, t, h);
        else
            lawson(rho, t, h);
    }

  private:
    void classic(Matrix &rho, double t, double h) {
        gen_.full_rhs(t, rho, k1_);
        stage_ = rho + (0.5 * h) * k1_;
        gen_.full_rhs(t + 0.5 * h, stage_, k2_);
        stage_ = rho + (0.5 * h) * k2_;
        gen_.full_rhs(t + 0.5 * h, stage_, k3_);
        stage_ = rho + h * k3_;
        gen_.full_rhs(t + h, stage_, k4_);
        rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

    void lawson(Matrix &rho, double t, double h) {
        if (half_.s != 0.5 * h) {
            half_ = detail::FreePhases(gen_.energies(), 0.5 * h);
            full_ = detail::FreePhases(gen_.energies(), h);
        }
        const Matrix &ph = half_.matrix;
        const Matrix &pf = full_.matrix;

        gen_.interaction_rhs(t, rho, k1_);
        stage_ = ph.cwiseProduct(rho + (0.5 * h) * k1_);
        gen_.interaction_rhs(t + 0.5 * h, stage_, k2_);
        base_ = ph.cwiseProduct(rho);
        stage_ = base_ + (0.5 * h) * k2_;
        gen_.interaction_rhs(t + 0.5 * h, stage_, k3_);
        base_ = pf.cwiseProduct(rho);
        stage_ = base_ + h * ph.cwiseProduct(k3_);
        gen_.interaction_rhs(t + h, stage_, k4_);
        rho = base_ + (h / 6.0) * (pf.cwiseProduct(k1_) + 2.0 * ph.cwiseProduct(k2_ + k3_) + k4_);
    }

    detail::Generator gen_;
    Scheme scheme_;
    detail::FreePhases half_;
    detail::FreePhases full_;
    Matrix k1_, k2_, k3_, k4_, stage_, base_;
};

int guard_band(const FockBasis &basis) { return std::min(kGuardBand, basis.n_max()); }

void check_guard(const DensityMatrix &rho, double t) {
    const double tail = tail_mass(rho, guard_band(rho.basis));
    if (tail >= rho.basis.tail_tolerance())
        throw TruncationOverflow(t, tail, rho.basis.tail_tolerance());
}

SampleDiagnostics diagnose(const DensityMatrix &rho) {
    SampleDiagnostics d;
    d.trace_error = std::abs(rho.trace() - 1.0);
    d.hermiticity_error = rho.hermiticity_error();
    d.min_eigenvalue = rho.min_eigenvalue();
    d.tail_mass = tail_mass(rho, guard_band(rho.basis));
    return d;
}

/// March `rho` from t to target in equal steps no longer than dt.
void advance(MasterStepper &stepper, Matrix &rho, double &t, double target, double dt,
             double &last_good) {
    const double span = target - t;
    if (span <= 0.0)
        return;
    const long steps = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
        stepper.step(rho, t, h);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        t = (k + 1 == steps) ? target : t + h;
        if (!rho.allFinite())
            throw IntegrationFailure(
                fmt::format("state became non-finite near t={:.6g} (dt={:.3g})", t, h), last_good);
        last_good = t;
    }
}

Trajectory run_fixed_step(const DensityMatrix &rho0, const EvolutionConfig &config,
                          const ModelParams &params, const PulseTrain &train, double dt) {
    MasterStepper stepper(params, train, config.basis, config.scheme);
    Trajectory out;
    out.dt = dt;
    Matrix rho = rho0.elements;
    double t = config.t_start;
    double last_good = t;

    auto record = [&](double when) {
        DensityMatrix snap{rho, config.basis};
        check_guard(snap, when);
        SampleDiagnostics diag = diagnose(snap);
        if (diag.trace_error > kTraceDriftLimit)
            throw IntegrationFailure(
                fmt::format("trace drift {:.3e} at t={:.6g} exceeds {:.0e}", diag.trace_error,
                            when, kTraceDriftLimit),
                last_good);
        if (diag.min_eigenvalue < kPositivityAlarm)
            ++out.positivity_alarms;
        out.times.push_back(when);
        out.states.push_back(std::move(snap));
        out.diagnostics.push_back(diag);
    };

    for (double sample : config.sample_times) {
        advance(stepper, rho, t, sample, dt, last_good);
        record(sample);
    }
    if (t < config.t_end) {
        advance(stepper, rho, t, config.t_end, dt, last_good);
        DensityMatrix last{rho, config.basis};
        check_guard(last, t);
        // Keep the final state reachable for the convergence comparison.
        out.states.push_back(std::move(last));
    }
    return out;
}

double final_excitation(const Trajectory &traj) {
    const auto &rho = traj.states.back().elements;
    double n = 0.0;
    for (Eigen::Index k = 0; k < rho.rows(); ++k)
        n += static_cast<double>(k) * rho(k, k).real();
    return n;
}

void drop_tail_state(Trajectory &traj) {
    if (traj.states.size() > traj.times.size())
        traj.states.pop_back();
}

// Dense Liouvillian superoperator acting on column-stacked vec(rho):
// vec(A X B) = (B^T kron A) vec(X).
Matrix superoperator(const ModelParams &params, const FockBasis &basis) {
    const int d = basis.dimension();
    const Matrix h = hamiltonian_at(0.0, params, PulseTrain::constant(), basis).elements;
    const Matrix id = Matrix::Identity(d, d);
    Matrix s = Matrix::Zero(d * d, d * d);
    auto add_kron = [&](const Matrix &a, const Matrix &b, Complex scale) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (a(i, j) != 0.0)
                    s.block(i * d, j * d, d, d) += scale * a(i, j) * b;
    };
    Matrix k = Matrix::Zero(d, d);
    for (const auto &op : lindblad_ops(params, basis)) {
        add_kron(op.elements.conjugate(), op.elements, 1.0);
        k += op.elements.adjoint() * op.elements;
    }
    const Matrix g = -kI * h - 0.5 * k;
    add_kron(id, g, 1.0);
    add_kron(g.conjugate(), id, 1.0);
    return s;
}

// Newton polish of an approximate fixed point: solve L(rho) = 0 with the
// first equation replaced by Tr rho = 1.
Matrix solve_fixed_point(const ModelParams &params, const FockBasis &basis) {
    const int d = basis.dimension();
    Matrix s = superoperator(params, basis);
    s.row(0).setZero();
    for (int n = 0; n < d; ++n)
        s(0, n * d + n) = 1.0;
    Vector rhs = Vector::Zero(d * d);
    rhs(0) = 1.0;
    const Vector x = s.partialPivLu().solve(rhs);
    return Eigen::Map<const Matrix>(x.data(), d, d);
}

} // namespace

Trajectory integrate_master(const DensityMatrix &rho0, const EvolutionConfig &config,
                            const ModelParams &params, const PulseTrain &train) {
    config.validate();
    params.validate();
    train.validate();
    if (rho0.basis != config.basis)
        throw std::invalid_argument("integrate_master: initial state basis differs from config");
    check_guard(rho0, config.t_start);

    double dt = std::min(config.step.initial_dt,
                         stable_step(params, train, config.basis, config.scheme));

    auto attempt = [&](double step) -> std::optional<Trajectory> {
        try {
            return run_fixed_step(rho0, config, params, train, step);
        } catch (const IntegrationFailure &) {
            return std::nullopt;
        }
    };

    if (!config.step.verify_convergence) {
        Trajectory traj = run_fixed_step(rho0, config, params, train, dt);
        drop_tail_state(traj);
        return traj;
    }

    auto agree = [&](const Trajectory &a, const Trajectory &b) {
        const double na = final_excitation(a);
        const double nb = final_excitation(b);
        return std::abs(na - nb) <= config.step.rel_tol * std::abs(nb) + config.step.abs_tol;
    };

    std::optional<Trajectory> coarse = attempt(dt);
    for (int halving = 1; halving <= config.step.max_halvings; ++halving) {
        dt *= 0.5;
        // The last refinement lets failures propagate with their diagnostics.
        std::optional<Trajectory> fine = halving == config.step.max_halvings
                                             ? run_fixed_step(rho0, config, params, train, dt)
                                             : attempt(dt);
        if (coarse && fine && agree(*coarse, *fine)) {
            drop_tail_state(*fine);
            return std::move(*fine);
        }
        coarse = std::move(fine);
    }
    if (config.step.max_halvings == 0 && coarse) {
        drop_tail_state(*coarse);
        return std::move(*coarse);
    }
    throw IntegrationFailure(
        fmt::format("step refinement did not converge down to dt={:.3g}", dt), config.t_start);
}

DensityMatrix steady_state(const ModelParams &params, const FockBasis &basis, double tol,
                           const SteadyStateOptions &options) {
    params.validate();
    if (!(tol > 0.0))
        throw std::invalid_argument("steady_state: tol must be > 0");
    const PulseTrain train = PulseTrain::constant();
    const double dt = std::min(options.dt, stable_step(params, train, basis,
                                                       Scheme::integrating_factor_rk4));
    MasterStepper stepper(params, train, basis, Scheme::integrating_factor_rk4);
    Matrix rho = vacuum(basis).elements;
    Matrix rate(basis.dimension(), basis.dimension());
    auto residual_of = [&](const Matrix &m) {
        stepper.generator().full_rhs(0.0, m, rate);
        return rate.cwiseAbs().maxCoeff();
    };
    double t = 0.0;
    double last_good = 0.0;
    while (true) {
        const double residual = residual_of(rho);
        check_guard(DensityMatrix{rho, basis}, t);
        if (residual < tol)
            return DensityMatrix{rho, basis};
        // The RK4 fixed point is biased by O(dt^4); once the transient has
        // died out, finish with a direct solve of the stationary equation.
        if (residual < kPolishThreshold) {
            DensityMatrix polished{solve_fixed_point(params, basis), basis};
            polished.hermitize();
            const double gap = (polished.elements - rho).cwiseAbs().maxCoeff();
            const double polished_residual = residual_of(polished.elements);
            if (gap < kPolishMaxShift && polished_residual < tol) {
                check_guard(polished, t);
                return polished;
            }
        }
        if (t >= options.max_time)
            throw NonStationary(fmt::format(
                "no stationary state within t={:.6g}: max|d rho/dt| = {:.3e} > {:.3e}",
                options.max_time, residual, tol));
        advance(stepper, rho, t, std::min(t + options.check_interval, options.max_time), dt,
                last_good);
    }
}

} // namespace pdao
