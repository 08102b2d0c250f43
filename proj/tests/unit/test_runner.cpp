#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pdao/runner.hpp"

using namespace pdao;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("pdao_test_" + name);
    fs::remove_all(dir);
    return dir;
}

ScenarioConfig small_both(const fs::path &out) {
    auto cfg = load_config_text(R"(
[scenario]
name = small
method = both
[model]
delta = -2
chi = 5
drive = 10
phi = 3.141592653589793
[pulses]
t0 = 1
width = 0.5
period = 4
[basis]
n_max = 20
[evolution]
t_end = 2
sample_dt = 0.1
[qsd]
trajectories = 40
seed = 5
threads = 2
[observables]
max_level = 3
fidelity_target = superposition:0,2
wigner_times = tau-6T, 2
wigner_n_x = 41
wigner_n_y = 41
)");
    cfg.output_dir = out;
    return cfg;
}

std::string first_line(const std::string &text) { return text.substr(0, text.find('\n')); }

int run_cli(const std::string &args) {
    const int status = std::system((std::string(PDAO_SIM_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST(CompareMethods, SingleTrajectoryIsInsufficient) {
    const auto b = make_basis(10);
    EvolutionConfig ev;
    ev.basis = b;
    ev.t_end = 1.0;
    ev.sample_times = {0.0, 0.5, 1.0};
    const auto master = integrate_master(fock_density(b, 1), ev, ModelParams{}, PulseTrain::constant());
    QsdConfig q;
    q.basis = b;
    q.n_trajectories = 1;
    q.sample_times = ev.sample_times;
    const auto qsd = ensemble_average(q, ModelParams{}, PulseTrain::constant(), fock_state(b, 1));
    const auto report = compare_methods(master, qsd);
    EXPECT_FALSE(report.passed);
    EXPECT_TRUE(report.insufficient_statistics);
    EXPECT_NE(report.message.find("insufficient"), std::string::npos);
}

TEST(RunScenario, WritesSelfDescribingOutputs) {
    const auto dir = scratch("both");
    const auto outcome = run_scenario(small_both(dir), {checks::MethodAgreement{}});
    ASSERT_EQ(outcome.exit_code, kExitOk) << outcome.error;

    const std::string ts = slurp(dir / "timeseries.csv");
    EXPECT_EQ(first_line(ts), "time,mean_n,p0,p1,p2,p3,trace_error,tail_mass,fidelity,qsd_mean_n,qsd_stderr");
    EXPECT_EQ(std::count(ts.begin(), ts.end(), '\n'), 22);

    for (int k : {0, 1}) {
        const std::string grid = slurp(dir / ("wigner_" + std::to_string(k) + ".csv"));
        EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 41);
        EXPECT_EQ(std::count(grid.begin(), grid.begin() + grid.find('\n'), ','), 40);
        const auto side = nlohmann::json::parse(slurp(dir / ("wigner_" + std::to_string(k) + ".json")));
        for (const char *key : {"x_min", "x_max", "y_min", "y_max", "n_x", "n_y", "min_value",
                                "integral", "symmetry_defect", "negativity_volume"})
            EXPECT_TRUE(side.contains(key)) << key;
        EXPECT_EQ(side["n_x"], 41);
    }
    const auto side0 = nlohmann::json::parse(slurp(dir / "wigner_0.json"));
    EXPECT_DOUBLE_EQ(side0["time"].get<double>(), 1.0);

    EXPECT_TRUE(fs::exists(dir / "comparison.csv"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["status"], "ok");
    EXPECT_EQ(manifest["partial"], false);
    EXPECT_EQ(manifest["base_seed"], 5);
    EXPECT_EQ(manifest["trajectories"], 40);
    EXPECT_EQ(manifest["version"], std::string(kToolVersion));
    EXPECT_EQ(manifest["config"]["model"]["drive"], "10");
    EXPECT_EQ(manifest["units"]["gamma"], 1.0);
    ASSERT_EQ(manifest["checks"].size(), 1u);
    EXPECT_EQ(manifest["checks"][0]["name"], "method_agreement");
}

TEST(RunScenario, ByteIdenticalReruns) {
    const auto a = scratch("rerun_a");
    const auto b = scratch("rerun_b");
    auto cfg_b = small_both(b);
    cfg_b.qsd->threads = 1;
    ASSERT_EQ(run_scenario(small_both(a)).exit_code, kExitOk);
    ASSERT_EQ(run_scenario(cfg_b).exit_code, kExitOk);
    for (const char *f : {"timeseries.csv", "wigner_0.csv", "wigner_1.csv", "wigner_0.json",
                          "comparison.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(RunScenario, TruncationOverflowExitCode) {
    const auto dir = scratch("overflow");
    auto cfg = load_config_text(R"(
[model]
drive = 3
[basis]
n_max = 6
[evolution]
t_end = 5
)");
    cfg.output_dir = dir;
    const auto outcome = run_scenario(cfg);
    EXPECT_EQ(outcome.exit_code, kExitTruncation);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["partial"], true);
    EXPECT_EQ(manifest["status"], "truncation_overflow");
}

TEST(RunScenario, InvalidConfigExitCode) {
    ScenarioConfig cfg;
    cfg.evolution.basis = make_basis(5);
    cfg.evolution.t_end = 1.0;
    cfg.evolution.sample_times = {0.0, 1.0};
    cfg.method = Method::qsd;
    cfg.output_dir = scratch("invalid");
    EXPECT_EQ(run_scenario(cfg).exit_code, kExitConfig);
}

TEST(Cli, ListAndErrors) {
    EXPECT_EQ(run_cli("catalog list"), 0);
    EXPECT_EQ(run_cli("catalog run nosuch"), kExitConfig);
    EXPECT_EQ(run_cli("run /nonexistent.ini"), kExitConfig);
    EXPECT_EQ(run_cli("frobnicate"), kExitConfig);

    const auto dir = scratch("cli");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "bad.ini");
        cfg << "[model]\ndelta = oops\n";
    }
    EXPECT_EQ(run_cli("run " + (dir / "bad.ini").string()), kExitConfig);
    {
        std::ofstream cfg(dir / "decay.ini");
        cfg << "[basis]\nn_max = 6\n[initial]\nstate = fock:1\n[evolution]\nt_end = 1\nsample_dt = 0.25\n";
    }
    EXPECT_EQ(run_cli("run " + (dir / "decay.ini").string() + " --method both --trajectories 8 "
                      "--seed 3 --out " + (dir / "out").string()),
              0);
    const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    EXPECT_EQ(manifest["method"], "both");
    EXPECT_EQ(manifest["trajectories"], 8);
    EXPECT_EQ(manifest["base_seed"], 3);
    EXPECT_NE(first_line(slurp(dir / "out" / "timeseries.csv")).find("qsd_stderr"), std::string::npos);
}
