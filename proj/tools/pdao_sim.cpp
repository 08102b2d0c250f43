// Command-line front end: run a config file or a catalog scenario.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>

#include "pdao/runner.hpp"

namespace {

struct Overrides {
    std::string method;
    std::optional<std::uint64_t> seed;
    std::optional<int> trajectories;
    std::optional<int> n_max;
    std::optional<int> threads;
    std::string out;
};

void add_overrides(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--method", o.method, "master, qsd or both")
        ->check(CLI::IsMember({"master", "qsd", "both"}));
    cmd->add_option("--seed", o.seed, "QSD base seed");
    cmd->add_option("--trajectories", o.trajectories, "QSD trajectory count");
    cmd->add_option("--n-max", o.n_max, "Fock truncation");
    cmd->add_option("--threads", o.threads, "QSD worker threads (0 = all cores)");
    cmd->add_option("--out", o.out, "output directory");
}

pdao::ScenarioConfig apply(pdao::ScenarioConfig cfg, const Overrides &o) {
    if (o.method == "master")
        cfg.method = pdao::Method::master;
    else if (o.method == "qsd")
        cfg.method = pdao::Method::qsd;
    else if (o.method == "both")
        cfg.method = pdao::Method::both;
    if (o.n_max) {
        cfg.evolution.basis = pdao::make_basis(*o.n_max, cfg.evolution.basis.tail_tolerance());
        if (cfg.qsd)
            cfg.qsd->basis = cfg.evolution.basis;
    }
    const bool wants_qsd = cfg.method != pdao::Method::master;
    if (wants_qsd && !cfg.qsd) {
        pdao::QsdConfig q;
        q.basis = cfg.evolution.basis;
        q.t_start = cfg.evolution.t_start;
        q.sample_times = cfg.evolution.sample_times;
        cfg.qsd = q;
    }
    if (cfg.qsd) {
        if (o.seed)
            cfg.qsd->base_seed = *o.seed;
        if (o.trajectories)
            cfg.qsd->n_trajectories = *o.trajectories;
        if (o.threads)
            cfg.qsd->threads = *o.threads;
    }
    if (!o.out.empty())
        cfg.output_dir = o.out;
    return cfg;
}

int execute(const pdao::ScenarioConfig &cfg, const std::vector<pdao::Check> &checks) {
    const auto outcome = pdao::run_scenario(cfg, checks);
    for (const auto &v : outcome.verdicts)
        fmt::print("{} {}: {}\n", v.passed ? "PASS" : "FAIL", v.name, v.detail);
    if (outcome.exit_code != pdao::kExitOk)
        fmt::print(stderr, "error: {}\n", outcome.error);
    else
        fmt::print("wrote {} files to {}\n", outcome.files.size(), cfg.output_dir.string());
    return outcome.exit_code;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Driven Kerr oscillator simulator (master equation and quantum state diffusion)"};
    app.set_version_flag("--version", std::string(pdao::kToolVersion));
    app.require_subcommand(1);

    Overrides run_opts;
    std::string config_path;
    auto *run = app.add_subcommand("run", "run a scenario described by a config file");
    run->add_option("config", config_path, "config file")->required();
    add_overrides(run, run_opts);

    auto *cat = app.add_subcommand("catalog", "built-in scenarios");
    cat->require_subcommand(1);
    auto *list = cat->add_subcommand("list", "list catalog entries");
    Overrides cat_opts;
    std::string name;
    auto *cat_run = cat->add_subcommand("run", "run a catalog entry and its checks");
    cat_run->add_option("name", name, "entry name")->required();
    add_overrides(cat_run, cat_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pdao::kExitConfig;
    }

    try {
        if (*run) {
            return execute(apply(pdao::load_config(config_path), run_opts), {});
        }
        if (*list) {
            for (const auto &entry : pdao::catalog())
                fmt::print("{:<8} {}\n", entry.name, entry.description);
            return 0;
        }
        if (*cat_run) {
            const auto &entry = pdao::catalog_entry(name);
            return execute(apply(entry.config, cat_opts), entry.expected_checks);
        }
    } catch (const pdao::ConfigError &e) {
        for (const auto &p : e.problems())
            fmt::print(stderr, "config error: {}\n", p);
        return pdao::kExitConfig;
    } catch (const std::out_of_range &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return pdao::kExitConfig;
    } catch (const std::invalid_argument &e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return pdao::kExitConfig;
    }
    return 0;
}
