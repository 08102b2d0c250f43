#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdao/scenario.hpp"

namespace pdao {

inline constexpr std::string_view kToolVersion = "0.3.0";

struct WignerSnapshot {
    std::string label;
    double time = 0.0;
    WignerField field;          ///< on the Cartesian output grid
    double symmetry_defect = 0.0; ///< on the polar test grid
    double negativity_volume = 0.0;
};

struct ComparisonSample {
    double time = 0.0;
    double master_n = 0.0;
    double qsd_n = 0.0;
    double stderr_n = 0.0;
    double z = 0.0; ///< |master - qsd| / stderr
    bool within = false;
};

struct ComparisonReport {
    std::vector<ComparisonSample> samples;
    double sigmas = 3.0;
    double required_fraction = 0.95;
    double fraction_within = 0.0;
    bool insufficient_statistics = false;
    bool passed = false;
    std::string message;
};

/// Per-sample |<n>_master - <n>_qsd| / stderr and a verdict: pass when at
/// least `required_fraction` of samples lie within `sigmas` standard errors.
/// Fewer than two trajectories always fail as statistically insufficient.
ComparisonReport compare_methods(const Trajectory &master, const EnsembleResult &qsd,
                                 double sigmas = 3.0, double required_fraction = 0.95);

struct RunResult {
    std::optional<Trajectory> master;
    std::optional<EnsembleResult> qsd;
    std::vector<WignerSnapshot> wigner;
    std::optional<ComparisonReport> comparison;
};

/// States the time series and Wigner snapshots are taken from: master when
/// available, otherwise the QSD ensemble mean.
const std::vector<DensityMatrix> &primary_states(const RunResult &result);
const std::vector<double> &primary_times(const RunResult &result);

// Acceptance assertions attached to catalog entries.
namespace checks {

/// P_level(t) = e^{-gamma t} at the given times (relative error).
struct DecayLaw {
    int level = 1;
    std::vector<double> times{1.0, 2.0, 5.0};
    double rel_tol = 1e-6;
};

/// max |<n>(t) - <n>(t + period)| <= rel_tol * max <n> for t > after.
struct Periodicity {
    double after = 10.0;
    double rel_tol = 1e-3;
};

/// max of P_level over [t_from, t_to] within expected +- tol.
struct PeakPopulation {
    int level = 2;
    double t_from = 0.0;
    double t_to = 0.0;
    double expected = 0.6;
    double tol = 0.1;
};

/// Some sample in [t_from, t_to] has |P_a - P_b| < max_gap, fidelity with
/// the target above min_fidelity and min W below max_min_wigner.
struct SuperpositionWindow {
    double t_from = 0.0;
    double t_to = 0.0;
    int level_a = 0;
    int level_b = 2;
    double max_gap = 0.1;
    double min_fidelity = 0.6;
    double max_min_wigner = -0.01;
};

struct WignerSymmetry {
    double max_defect = 1e-6;
};

struct WignerNormalization {
    double tol = 1e-3;
};

/// Stationary Wigner field has two maxima related by point reflection and
/// negativity volume below the limit.
struct StationaryTwoHumps {
    double max_negativity = 1e-3;
    double residual_tol = 1e-9;
};

/// Stationary <n> = expected +- tol.
struct StationaryExcitation {
    double expected = 0.5;
    double tol = 1e-4;
    double residual_tol = 1e-10;
};

struct MethodAgreement {
    double sigmas = 3.0;
    double fraction = 0.95;
};

} // namespace checks

using Check = std::variant<checks::DecayLaw, checks::Periodicity, checks::PeakPopulation,
                           checks::SuperpositionWindow, checks::WignerSymmetry,
                           checks::WignerNormalization, checks::StationaryTwoHumps,
                           checks::StationaryExcitation, checks::MethodAgreement>;

struct CheckVerdict {
    std::string name;
    bool passed = false;
    std::string detail;
};

CheckVerdict evaluate_check(const Check &check, const ScenarioConfig &config,
                            const RunResult &result);

struct ScenarioCatalogEntry {
    std::string name;
    std::string description;
    ScenarioConfig config;
    std::vector<Check> expected_checks;
};

const std::vector<ScenarioCatalogEntry> &catalog();
/// Throws std::out_of_range for an unknown name.
const ScenarioCatalogEntry &catalog_entry(std::string_view name);

/// Runs the selected method(s) and computes the requested observables.
/// Propagates TruncationOverflow and IntegrationFailure.
RunResult simulate(const ScenarioConfig &config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIntegration = 3;
inline constexpr int kExitTruncation = 4;

struct RunOutcome {
    int exit_code = kExitOk;
    std::string error;
    std::vector<std::filesystem::path> files;
    std::vector<CheckVerdict> verdicts;
    std::optional<RunResult> result;
};

/// simulate() plus export: time-series CSV, Wigner CSV grids with JSON
/// sidecars, comparison CSV (method both) and manifest.json in
/// config.output_dir. Integration errors are reported through the exit code
/// and a manifest flagged as partial.
RunOutcome run_scenario(const ScenarioConfig &config, const std::vector<Check> &checks = {});

} // namespace pdao
