#include "pdao/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pdao/errors.hpp"

namespace pdao {

using nlohmann::json;

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

// Index of the sample at time t, or -1.
long find_sample(const std::vector<double> &times, double t, double tol = 1e-9) {
    auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol)
        return -1;
    return it - times.begin();
}

CheckVerdict fail(std::string name, std::string detail) {
    return {std::move(name), false, std::move(detail)};
}

CheckVerdict check(const checks::DecayLaw &c, const ScenarioConfig &cfg, const RunResult &r) {
    const std::string name = "decay_law";
    if (!r.master)
        return fail(name, "needs a master-equation run");
    double worst = 0.0;
    for (double t : c.times) {
        const long i = find_sample(r.master->times, t);
        if (i < 0)
            return fail(name, fmt::format("t = {} is not a sample time", t));
        const double p = r.master->states[i].elements(c.level, c.level).real();
        const double exact = std::exp(-cfg.model.gamma * t);
        worst = std::max(worst, std::abs(p - exact) / exact);
    }
    return {name, worst <= c.rel_tol,
            fmt::format("max relative error {:.3e} (limit {:.1e})", worst, c.rel_tol)};
}

CheckVerdict check(const checks::Periodicity &c, const ScenarioConfig &cfg, const RunResult &r) {
    const std::string name = "periodicity";
    const auto &times = primary_times(r);
    const auto &states = primary_states(r);
    const double tau = cfg.pulses.period;
    double max_gap = 0.0;
    double max_n = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] <= c.after)
            continue;
        const double n = mean_excitation(states[i]);
        max_n = std::max(max_n, n);
        const long j = find_sample(times, times[i] + tau);
        if (j < 0)
            continue;
        max_gap = std::max(max_gap, std::abs(n - mean_excitation(states[j])));
        ++pairs;
    }
    if (pairs == 0)
        return fail(name, fmt::format("no sample pairs one period apart after t = {}", c.after));
    const double limit = c.rel_tol * max_n;
    return {name, max_gap <= limit,
            fmt::format("max |<n>(t) - <n>(t+tau)| = {:.3e}, limit {:.3e} over {} pairs", max_gap,
                        limit, pairs)};
}

CheckVerdict check(const checks::PeakPopulation &c, const ScenarioConfig &, const RunResult &r) {
    const std::string name = "peak_population";
    const auto &times = primary_times(r);
    const auto &states = primary_states(r);
    double best = -1.0;
    double at = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < c.t_from || times[i] > c.t_to)
            continue;
        const double p = states[i].elements(c.level, c.level).real();
        if (p > best) {
            best = p;
            at = times[i];
        }
    }
    if (best < 0.0)
        return fail(name, "no samples in the window");
    return {name, std::abs(best - c.expected) <= c.tol,
            fmt::format("max P{} = {:.4f} at t = {:.3f} (expected {} +- {})", c.level, best, at,
                        c.expected, c.tol)};
}

CheckVerdict check(const checks::SuperpositionWindow &c, const ScenarioConfig &cfg,
                   const RunResult &r) {
    const std::string name = "superposition_window";
    const auto &times = primary_times(r);
    const auto &states = primary_states(r);
    const FockBasis &basis = states.front().basis;
    const PureState target = cfg.observables.fidelity_target
                                 ? cfg.observables.fidelity_target->build(basis)
                                 : superposition(basis, std::vector<int>{c.level_a, c.level_b});
    const CartesianGrid grid = cfg.observables.wigner ? cfg.observables.wigner->grid
                                                      : default_wigner_grid();
    int candidates = 0;
    double best_fidelity = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < c.t_from || times[i] > c.t_to)
            continue;
        const auto &rho = states[i];
        const double gap =
            std::abs(rho.elements(c.level_a, c.level_a).real() - rho.elements(c.level_b, c.level_b).real());
        const double fidelity = fidelity_pure(rho, target);
        best_fidelity = std::max(best_fidelity, fidelity);
        if (gap >= c.max_gap || fidelity <= c.min_fidelity)
            continue;
        ++candidates;
        const double w_min = wigner(rho, grid).min_value;
        if (w_min < c.max_min_wigner)
            return {name, true,
                    fmt::format("t = {:.3f}: |P{} - P{}| = {:.3f}, fidelity {:.3f}, min W {:.4f}",
                                times[i], c.level_a, c.level_b, gap, fidelity, w_min)};
    }
    return fail(name, fmt::format("no qualifying sample in [{}, {}] ({} passed the population "
                                  "and fidelity tests; best fidelity {:.3f})",
                                  c.t_from, c.t_to, candidates, best_fidelity));
}

CheckVerdict check(const checks::WignerSymmetry &c, const ScenarioConfig &cfg, const RunResult &r) {
    const std::string name = "wigner_symmetry";
    if (r.wigner.empty())
        return fail(name, "no Wigner snapshots requested");
    if (!cfg.observables.symmetry_defect)
        return fail(name, "symmetry_defect observable is disabled");
    double worst = 0.0;
    for (const auto &snap : r.wigner)
        worst = std::max(worst, snap.symmetry_defect);
    return {name, worst <= c.max_defect,
            fmt::format("max defect {:.3e} over {} snapshots (limit {:.1e})", worst,
                        r.wigner.size(), c.max_defect)};
}

CheckVerdict check(const checks::WignerNormalization &c, const ScenarioConfig &,
                   const RunResult &r) {
    const std::string name = "wigner_normalization";
    if (r.wigner.empty())
        return fail(name, "no Wigner snapshots requested");
    double worst = 0.0;
    for (const auto &snap : r.wigner)
        worst = std::max(worst, std::abs(snap.field.integral - 1.0));
    return {name, worst <= c.tol,
            fmt::format("max |integral - 1| = {:.3e} (limit {:.1e})", worst, c.tol)};
}

CheckVerdict check(const checks::StationaryTwoHumps &c, const ScenarioConfig &cfg,
                   const RunResult &) {
    const std::string name = "stationary_two_humps";
    const DensityMatrix rho = steady_state(cfg.model, cfg.evolution.basis, c.residual_tol);
    const CartesianGrid grid = cfg.observables.wigner ? cfg.observables.wigner->grid
                                                      : default_wigner_grid();
    const WignerField field = wigner(rho, grid);
    const auto peaks = local_maxima(field);
    const double negativity = negativity_volume(field);
    if (peaks.size() != 2)
        return fail(name, fmt::format("found {} local maxima", peaks.size()));
    const double hx = (grid.x_max - grid.x_min) / (grid.n_x - 1);
    const double hy = (grid.y_max - grid.y_min) / (grid.n_y - 1);
    const bool reflected = std::abs(peaks[0].x + peaks[1].x) <= 0.5 * hx &&
                           std::abs(peaks[0].y + peaks[1].y) <= 0.5 * hy;
    return {name, reflected && negativity < c.max_negativity,
            fmt::format("maxima at ({:.2f}, {:.2f}) and ({:.2f}, {:.2f}){}; negativity volume "
                        "{:.3e} (limit {:.1e})",
                        peaks[0].x, peaks[0].y, peaks[1].x, peaks[1].y,
                        reflected ? "" : " not point-reflected", negativity, c.max_negativity)};
}

CheckVerdict check(const checks::StationaryExcitation &c, const ScenarioConfig &cfg,
                   const RunResult &) {
    const std::string name = "stationary_excitation";
    const DensityMatrix rho = steady_state(cfg.model, cfg.evolution.basis, c.residual_tol);
    const double n = mean_excitation(rho);
    return {name, std::abs(n - c.expected) <= c.tol,
            fmt::format("stationary <n> = {:.8f} (expected {} +- {:.0e})", n, c.expected, c.tol)};
}

CheckVerdict check(const checks::MethodAgreement &c, const ScenarioConfig &, const RunResult &r) {
    const std::string name = "method_agreement";
    if (!r.master || !r.qsd)
        return fail(name, "needs method = both");
    const auto report = compare_methods(*r.master, *r.qsd, c.sigmas, c.fraction);
    return {name, report.passed, report.message};
}

void write_text(const std::filesystem::path &path, const std::string &text,
                std::vector<std::filesystem::path> &files) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    out << text;
    files.push_back(path);
}

std::string timeseries_csv(const ScenarioConfig &cfg, const RunResult &r) {
    const auto &times = primary_times(r);
    const auto &states = primary_states(r);
    const int k_max = cfg.observables.max_level;
    std::optional<PureState> target;
    if (cfg.observables.fidelity_target)
        target = cfg.observables.fidelity_target->build(states.front().basis);

    std::string out = "time,mean_n";
    for (int k = 0; k <= k_max; ++k)
        out += fmt::format(",p{}", k);
    out += ",trace_error,tail_mass";
    if (target)
        out += ",fidelity";
    if (r.qsd)
        out += ",qsd_mean_n,qsd_stderr";
    out += '\n';

    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto &rho = states[i];
        out += num(times[i]);
        out += ',' + num(mean_excitation(rho));
        for (int k = 0; k <= k_max; ++k)
            out += ',' + num(rho.elements(k, k).real());
        if (r.master) {
            out += ',' + num(r.master->diagnostics[i].trace_error);
            out += ',' + num(r.master->diagnostics[i].tail_mass);
        } else {
            out += ',' + num(std::abs(rho.trace() - 1.0));
            out += ',' + num(tail_mass(rho, kGuardBand));
        }
        if (target)
            out += ',' + num(fidelity_pure(rho, *target));
        if (r.qsd)
            out += ',' + num(r.qsd->mean_excitation[i]) + ',' + num(r.qsd->stderr_excitation[i]);
        out += '\n';
    }
    return out;
}

std::string grid_csv(const WignerField &field) {
    std::string out;
    const auto &v = field.values;
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
        for (Eigen::Index i = 0; i < v.cols(); ++i) {
            if (i)
                out += ',';
            out += num(v(j, i));
        }
        out += '\n';
    }
    return out;
}

json wigner_sidecar(const WignerSnapshot &snap, const ScenarioConfig &cfg) {
    const auto &g = std::get<CartesianGrid>(snap.field.grid);
    json j{{"label", snap.label},
           {"time", snap.time},
           {"units", "phase-space amplitude alpha = x + i y; time in 1/gamma"},
           {"x_min", g.x_min},
           {"x_max", g.x_max},
           {"y_min", g.y_min},
           {"y_max", g.y_max},
           {"n_x", g.n_x},
           {"n_y", g.n_y},
           {"layout", "n_y rows x n_x columns, row j at y_j, column i at x_i"},
           {"min_value", snap.field.min_value},
           {"integral", snap.field.integral}};
    j["symmetry_defect"] =
        cfg.observables.symmetry_defect ? json(snap.symmetry_defect) : json(nullptr);
    j["negativity_volume"] =
        cfg.observables.negativity ? json(snap.negativity_volume) : json(nullptr);
    return j;
}

std::string comparison_csv(const ComparisonReport &report) {
    std::string out = "time,master_mean_n,qsd_mean_n,qsd_stderr,z,within\n";
    for (const auto &s : report.samples)
        out += fmt::format("{},{},{},{},{},{}\n", num(s.time), num(s.master_n), num(s.qsd_n),
                           num(s.stderr_n), num(s.z), s.within ? 1 : 0);
    return out;
}

// Resolved configuration as {section: {key: value}}.
json config_json(const ScenarioConfig &cfg) {
    namespace pt = boost::property_tree;
    std::istringstream in(dump_config(cfg));
    pt::ptree tree;
    pt::read_ini(in, tree);
    json out = json::object();
    for (const auto &[section, child] : tree)
        for (const auto &[key, value] : child)
            out[section][key] = value.data();
    return out;
}

} // namespace

const std::vector<DensityMatrix> &primary_states(const RunResult &result) {
    if (result.master)
        return result.master->states;
    if (result.qsd)
        return result.qsd->mean_density;
    throw std::logic_error("primary_states: run has neither master nor QSD data");
}

const std::vector<double> &primary_times(const RunResult &result) {
    if (result.master)
        return result.master->times;
    if (result.qsd)
        return result.qsd->times;
    throw std::logic_error("primary_times: run has neither master nor QSD data");
}

ComparisonReport compare_methods(const Trajectory &master, const EnsembleResult &qsd,
                                 double sigmas, double required_fraction) {
    if (master.times.size() != qsd.times.size())
        throw std::invalid_argument("compare_methods: sample grids differ in length");
    ComparisonReport report;
    report.sigmas = sigmas;
    report.required_fraction = required_fraction;
    if (qsd.n_trajectories < 2) {
        report.insufficient_statistics = true;
        report.message = fmt::format(
            "statistics insufficient: {} trajectory, standard error undefined", qsd.n_trajectories);
        return report;
    }
    int within = 0;
    for (std::size_t i = 0; i < master.times.size(); ++i) {
        if (std::abs(master.times[i] - qsd.times[i]) > 1e-9)
            throw std::invalid_argument("compare_methods: sample times differ");
        ComparisonSample s;
        s.time = master.times[i];
        s.master_n = mean_excitation(master.states[i]);
        s.qsd_n = qsd.mean_excitation[i];
        s.stderr_n = qsd.stderr_excitation[i];
        const double diff = std::abs(s.master_n - s.qsd_n);
        if (s.stderr_n > 0.0)
            s.z = diff / s.stderr_n;
        else
            s.z = diff <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
        s.within = diff <= sigmas * s.stderr_n || diff <= 1e-12;
        within += s.within;
        report.samples.push_back(s);
    }
    const auto n = report.samples.size();
    report.fraction_within = n ? static_cast<double>(within) / n : 0.0;
    report.passed = n > 0 && report.fraction_within >= required_fraction;
    report.message =
        fmt::format("{}/{} samples within {} standard errors ({:.1f}%, need {:.1f}%)", within, n,
                    sigmas, 100.0 * report.fraction_within, 100.0 * required_fraction);
    return report;
}

CheckVerdict evaluate_check(const Check &c, const ScenarioConfig &config, const RunResult &result) {
    return std::visit([&](const auto &spec) { return check(spec, config, result); }, c);
}

RunResult simulate(const ScenarioConfig &config) {
    config.validate();
    const PureState psi0 = config.initial.build(config.evolution.basis);
    RunResult result;
    if (config.method != Method::qsd)
        result.master =
            integrate_master(dm_from_pure(psi0), config.evolution, config.model, config.pulses);
    if (config.method != Method::master)
        result.qsd = ensemble_average(*config.qsd, config.model, config.pulses, psi0);
    if (result.master && result.qsd)
        result.comparison = compare_methods(*result.master, *result.qsd);

    if (const auto &req = config.observables.wigner) {
        const auto &times = primary_times(result);
        const auto &states = primary_states(result);
        for (std::size_t k = 0; k < req->times.size(); ++k) {
            const long i = find_sample(times, req->times[k]);
            if (i < 0)
                throw std::logic_error(
                    fmt::format("Wigner time {} is not a sample time", req->times[k]));
            WignerSnapshot snap;
            snap.label = req->labels[k];
            snap.time = times[i];
            snap.field = wigner(states[i], req->grid);
            if (config.observables.symmetry_defect)
                snap.symmetry_defect = symmetry_defect(wigner(states[i], req->symmetry_grid));
            if (config.observables.negativity)
                snap.negativity_volume = negativity_volume(snap.field);
            result.wigner.push_back(std::move(snap));
        }
    }
    return result;
}

RunOutcome run_scenario(const ScenarioConfig &config, const std::vector<Check> &checks) {
    RunOutcome outcome;
    const auto started = std::chrono::steady_clock::now();
    try {
        config.validate();
    } catch (const ConfigError &e) {
        outcome.exit_code = kExitConfig;
        outcome.error = e.what();
        return outcome;
    }

    std::filesystem::create_directories(config.output_dir);
    const auto dir = config.output_dir;
    std::string status = "ok";
    try {
        outcome.result = simulate(config);
    } catch (const TruncationOverflow &e) {
        outcome.exit_code = kExitTruncation;
        outcome.error = e.what();
        status = "truncation_overflow";
    } catch (const IntegrationFailure &e) {
        outcome.exit_code = kExitIntegration;
        outcome.error = e.what();
        status = "integration_failure";
    }

    json checks_json = json::array();
    if (outcome.result) {
        const RunResult &r = *outcome.result;
        write_text(dir / "timeseries.csv", timeseries_csv(config, r), outcome.files);
        for (std::size_t k = 0; k < r.wigner.size(); ++k) {
            write_text(dir / fmt::format("wigner_{}.csv", k), grid_csv(r.wigner[k].field),
                       outcome.files);
            write_text(dir / fmt::format("wigner_{}.json", k),
                       wigner_sidecar(r.wigner[k], config).dump(2) + "\n", outcome.files);
        }
        if (r.comparison)
            write_text(dir / "comparison.csv", comparison_csv(*r.comparison), outcome.files);
        for (const auto &c : checks) {
            try {
                outcome.verdicts.push_back(evaluate_check(c, config, r));
            } catch (const std::exception &e) {
                outcome.verdicts.push_back({"check", false, e.what()});
            }
        }
        for (const auto &v : outcome.verdicts)
            checks_json.push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest{
        {"tool", "pdao-sim"},
        {"version", kToolVersion},
        {"status", status},
        {"exit_code", outcome.exit_code},
        {"partial", outcome.exit_code != kExitOk},
        {"units", {{"gamma", 1.0}, {"time", "1/gamma"}, {"rates", "gamma"}}},
        {"config", config_json(config)},
        {"method", to_string(config.method)},
        {"wall_time_seconds", wall},
        {"checks", checks_json},
    };
    if (!outcome.error.empty())
        manifest["error"] = outcome.error;
    if (config.qsd) {
        manifest["base_seed"] = config.qsd->base_seed;
        manifest["trajectories"] = config.qsd->n_trajectories;
    }
    if (outcome.result && outcome.result->master)
        manifest["master_dt"] = outcome.result->master->dt;
    json files = json::array();
    for (const auto &f : outcome.files)
        files.push_back(f.filename().string());
    manifest["files"] = files;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n", outcome.files);
    return outcome;
}

} // namespace pdao
