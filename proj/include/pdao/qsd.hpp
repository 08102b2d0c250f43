#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pdao/fock.hpp"
#include "pdao/model.hpp"

namespace pdao {

struct QsdConfig {
    int n_trajectories = 500;
    double dt = 1e-3;
    std::uint64_t base_seed = 1;
    double t_start = 0.0;
    std::vector<double> sample_times;
    FockBasis basis;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    int threads = 0;

    void validate() const;
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<DensityMatrix> mean_density;
    std::vector<double> mean_excitation;
    /// Standard error of <a^+a> across trajectories; NaN for a single trajectory.
    std::vector<double> stderr_excitation;
    int n_trajectories = 0;
};

/// Seed of trajectory `index`: a counter-based splitmix64 hash of
/// (base_seed, index), so any trajectory can be regenerated on its own.
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index);

/// One QSD step with caller-supplied complex Wiener increments, one per
/// Lindblad operator (E[dxi dxi*] = dt).
///
/// The noise term sum_i (L_i - <L_i>) psi dxi_i is taken at the step start
/// (Ito); the drift -iH psi - 1/2 sum_i (L_i^+L_i - 2<L_i^+> L_i + |<L_i>|^2) psi
/// is advanced with RK4 in the frame of the static diagonal Hamiltonian.
/// The result is renormalized.
PureState qsd_step(const PureState &psi, double t, double dt, const ModelParams &params,
                   const PulseTrain &train, std::span<const Complex> increments);

/// Same, drawing the increments (g1 + i g2) sqrt(dt/2) from `rng`.
PureState qsd_step(const PureState &psi, double t, double dt, const ModelParams &params,
                   const PulseTrain &train, std::mt19937_64 &rng);

/// Fixed-step trajectory; each sample time is served by the nearest step.
/// Deterministic in `seed`. Throws TruncationOverflow when the top guard
/// band of |psi|^2 exceeds the basis tolerance at a sample.
std::vector<PureState> run_trajectory(std::uint64_t seed, const QsdConfig &config,
                                      const ModelParams &params, const PulseTrain &train,
                                      const PureState &psi0);

/// Trajectory-averaged |psi><psi| per sample. Trajectory k uses
/// trajectory_seed(base_seed, k); the reduction runs in index order, so the
/// result does not depend on the thread count.
EnsembleResult ensemble_average(const QsdConfig &config, const ModelParams &params,
                                const PulseTrain &train, const PureState &psi0);

} // namespace pdao
