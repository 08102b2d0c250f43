#pragma once

#include <vector>

#include "pdao/fock.hpp"
#include "pdao/model.hpp"

namespace pdao {

enum class Scheme {
    /// RK4 in the frame of the static diagonal Hamiltonian (Lawson RK4).
    /// Propagates delta*n + chi*n^2 exactly, so the step is limited only by
    /// the pump and damping rates.
    integrating_factor_rk4,
    /// Plain RK4 on the full right-hand side; the step is capped by the
    /// largest Bohr frequency of the truncated ladder.
    classic_rk4,
};

struct StepControl {
    double initial_dt = 1e-3;
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    /// Re-run at dt/2 and compare <a^+a>(t_end); halve until they agree.
    bool verify_convergence = true;
    int max_halvings = 6;
};

struct EvolutionConfig {
    double t_start = 0.0;
    double t_end = 1.0;
    std::vector<double> sample_times;
    StepControl step;
    FockBasis basis;
    Scheme scheme = Scheme::integrating_factor_rk4;

    void validate() const;
};

struct SampleDiagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    double tail_mass = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<SampleDiagnostics> diagnostics;
    double dt = 0.0;            ///< step actually used
    int positivity_alarms = 0;  ///< samples with min eigenvalue < -1e-6
};

inline constexpr double kTraceDriftLimit = 1e-8;
inline constexpr double kPositivityAlarm = -1e-6;

/// Right-hand side of the Lindblad equation at time t.
Matrix liouvillian_apply(const DensityMatrix &rho, double t, const ModelParams &params,
                         const PulseTrain &train, const FockBasis &basis);

/// Largest step for which the chosen scheme is stable on this model.
double stable_step(const ModelParams &params, const PulseTrain &train, const FockBasis &basis,
                   Scheme scheme);

/// Integrates from config.t_start to config.t_end, recording hermitized
/// snapshots at config.sample_times.
///
/// Throws TruncationOverflow when the top guard band of any sample exceeds
/// the basis tolerance, IntegrationFailure when the state goes non-finite,
/// the trace drifts past kTraceDriftLimit, or step halving does not converge.
Trajectory integrate_master(const DensityMatrix &rho0, const EvolutionConfig &config,
                            const ModelParams &params, const PulseTrain &train);

struct SteadyStateOptions {
    double max_time = 500.0;
    double check_interval = 1.0;
    double dt = 1e-3;
};

/// Fixed point of the monochromatically driven master equation, reached by
/// integrating from vacuum until max|d rho/dt| < tol. Once the residual is
/// below 1e-4 the integrated state is refined by a direct linear solve of
/// L(rho) = 0, Tr rho = 1, accepted only if it moves rho by less than 1e-3.
/// Throws NonStationary when neither gets below tol within max_time.
DensityMatrix steady_state(const ModelParams &params, const FockBasis &basis, double tol,
                           const SteadyStateOptions &options = {});

} // namespace pdao
