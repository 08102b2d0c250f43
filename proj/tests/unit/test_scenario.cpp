#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "pdao/runner.hpp"
#include "pdao/scenario.hpp"

using namespace pdao;

namespace {

bool mentions(const ConfigError &e, std::string_view needle) {
    return std::any_of(e.problems().begin(), e.problems().end(),
                       [&](const std::string &p) { return p.find(needle) != std::string::npos; });
}

} // namespace

TEST(LoadConfig, DefaultsApplied) {
    const auto cfg = load_config_text(R"(
[model]
delta = -2
chi = 5
drive = 7
[evolution]
t_end = 1
)");
    EXPECT_EQ(cfg.model.nbath, 0.0);
    EXPECT_EQ(cfg.model.phi, 0.0);
    EXPECT_EQ(cfg.model.gamma, 1.0);
    EXPECT_EQ(cfg.evolution.basis.n_max(), 50);
    EXPECT_EQ(cfg.initial.levels, std::vector<int>{0});
    EXPECT_TRUE(cfg.pulses.monochromatic);
    EXPECT_EQ(cfg.method, Method::master);
    EXPECT_EQ(cfg.evolution.sample_times.size(), 101u);
    EXPECT_EQ(cfg.evolution.sample_times.back(), 1.0);
}

TEST(LoadConfig, CollectsEveryProblem) {
    try {
        load_config_text(R"(
[model]
delta = abc
chi = -1
colour = blue
[scenario]
method = qsd
[evolution]
t_end = 1
[extra]
x = 1
)");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_TRUE(mentions(e, "model.delta")) << e.what();
        EXPECT_TRUE(mentions(e, "model.colour")) << e.what();
        EXPECT_TRUE(mentions(e, "[extra]")) << e.what();
    }
    try {
        load_config_text("[model]\nchi = -1\ngamma = 0\n[scenario]\nmethod = qsd\n[evolution]\nt_end = 1\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_TRUE(mentions(e, "chi")) << e.what();
        EXPECT_TRUE(mentions(e, "gamma")) << e.what();
        EXPECT_TRUE(mentions(e, "[qsd]")) << e.what();
    }
}

TEST(LoadConfig, SyntaxErrorCarriesLineNumber) {
    try {
        load_config_text("[model]\ndelta = 1\nthis line has no equals sign\n", "bad.ini");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        EXPECT_TRUE(mentions(e, "bad.ini:3")) << e.what();
    }
}

TEST(LoadConfig, BundledExample) {
    const auto cfg = load_config(std::string(PDAO_SOURCE_DIR) + "/configs/pulsed_both.ini");
    EXPECT_EQ(cfg.method, Method::both);
    ASSERT_TRUE(cfg.qsd);
    EXPECT_EQ(cfg.qsd->base_seed, 42u);
    EXPECT_EQ(cfg.observables.wigner->labels.size(), 2u);
}

TEST(LoadConfig, MissingFile) {
    EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(LoadConfig, PulsesAndQsd) {
    const auto cfg = load_config_text(R"(
; pulsed run with both methods
[scenario]
name = test
method = both
[pulses]
t0 = 4
width = 0.5
period = 4
count = 3
[basis]
n_max = 12
tail_tolerance = 1e-7
[initial]
state = superposition:0,2
[evolution]
t_end = 10
sample_dt = 0.5
scheme = rk4
[qsd]
trajectories = 20
seed = 18446744073709551615
[observables]
wigner_times = 2tau-0.4T, 7.25
)");
    EXPECT_FALSE(cfg.pulses.monochromatic);
    ASSERT_TRUE(cfg.pulses.count);
    EXPECT_EQ(*cfg.pulses.count, 3);
    EXPECT_EQ(cfg.evolution.scheme, Scheme::classic_rk4);
    EXPECT_EQ(cfg.evolution.basis.tail_tolerance(), 1e-7);
    ASSERT_TRUE(cfg.qsd);
    EXPECT_EQ(cfg.qsd->n_trajectories, 20);
    EXPECT_EQ(cfg.qsd->base_seed, 18446744073709551615ull);
    EXPECT_EQ(cfg.qsd->sample_times, cfg.evolution.sample_times);
    EXPECT_EQ(cfg.initial.levels, (std::vector<int>{0, 2}));
    ASSERT_TRUE(cfg.observables.wigner);
    EXPECT_DOUBLE_EQ(cfg.observables.wigner->times[0], 7.8);
    // Snapshot times are merged into the regular sample grid.
    const auto &s = cfg.evolution.sample_times;
    EXPECT_NE(std::find(s.begin(), s.end(), cfg.observables.wigner->times[0]), s.end());
    EXPECT_NE(std::find(s.begin(), s.end(), 7.25), s.end());
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
}

TEST(LoadConfig, RejectsOutOfRangeLevels) {
    EXPECT_THROW(load_config_text("[basis]\nn_max = 3\n[initial]\nstate = fock:5\n[evolution]\nt_end = 1\n"),
                 ConfigError);
    EXPECT_THROW(load_config_text("[initial]\nstate = coherent:1\n[evolution]\nt_end = 1\n"),
                 ConfigError);
}

TEST(DumpConfig, RoundTrips) {
    for (const auto &entry : catalog()) {
        const std::string text = dump_config(entry.config);
        const auto again = load_config_text(text, entry.name);
        EXPECT_EQ(dump_config(again), text) << entry.name;
        EXPECT_EQ(again.evolution.sample_times, entry.config.evolution.sample_times) << entry.name;
    }
}

TEST(TimeLabel, PulseLandmarks) {
    const double tau = 4.0, width = 0.5;
    EXPECT_DOUBLE_EQ(parse_time_label("2tau-2T", tau, width), 7.0);
    EXPECT_DOUBLE_EQ(parse_time_label("2tau-1.8T", tau, width), 7.1);
    EXPECT_DOUBLE_EQ(parse_time_label("2tau-0.4T", tau, width), 7.8);
    EXPECT_DOUBLE_EQ(parse_time_label("2tau", tau, width), 8.0);
    EXPECT_DOUBLE_EQ(parse_time_label("2tau+0.6T", tau, width), 8.3);
    EXPECT_DOUBLE_EQ(parse_time_label("2 * tau + 0.6 * T", tau, width), 8.3);
    EXPECT_DOUBLE_EQ(parse_time_label("tau", tau, width), 4.0);
    EXPECT_DOUBLE_EQ(parse_time_label("7.5", tau, width), 7.5);
    EXPECT_DOUBLE_EQ(parse_time_label("1e1", tau, width), 10.0);
    EXPECT_THROW(parse_time_label("", tau, width), std::invalid_argument);
    EXPECT_THROW(parse_time_label("2x", tau, width), std::invalid_argument);
    EXPECT_THROW(parse_time_label("2tau 3", tau, width), std::invalid_argument);
}

TEST(InitialState, ParseAndDescribe) {
    EXPECT_EQ(InitialState::parse("vacuum").describe(), "vacuum");
    EXPECT_EQ(InitialState::parse("fock:3").describe(), "fock:3");
    EXPECT_EQ(InitialState::parse("superposition: 0, 2").describe(), "superposition:0,2");
    EXPECT_THROW(InitialState::parse("fock:1,2"), std::invalid_argument);
    EXPECT_THROW(InitialState::parse("fock:-1"), std::invalid_argument);
}

TEST(Catalog, FigureParameters) {
    const auto &fig2 = catalog_entry("fig2").config;
    EXPECT_EQ(fig2.model.delta, -2.0);
    EXPECT_EQ(fig2.model.chi, 5.0);
    EXPECT_EQ(fig2.model.drive, 7.0);
    EXPECT_TRUE(fig2.pulses.monochromatic);

    for (const char *name : {"fig3", "fig4"}) {
        const auto &c = catalog_entry(name).config;
        EXPECT_EQ(c.model.delta, -2.0) << name;
        EXPECT_EQ(c.model.chi, 5.0) << name;
        EXPECT_EQ(c.model.drive, 10.0) << name;
        EXPECT_EQ(c.pulses.period, 4.0) << name;
        EXPECT_EQ(c.pulses.width, 0.5) << name;
        EXPECT_FALSE(c.pulses.monochromatic);
    }
    for (const char *name : {"fig5", "fig6"}) {
        const auto &c = catalog_entry(name).config;
        EXPECT_EQ(c.model.delta, -10.0) << name;
        EXPECT_EQ(c.model.chi, 5.0) << name;
        EXPECT_EQ(c.model.drive, 10.3) << name;
        EXPECT_EQ(c.pulses.period, 4.0) << name;
        EXPECT_EQ(c.pulses.width, 0.5) << name;
    }
    const auto &fig4 = catalog_entry("fig4").config;
    ASSERT_TRUE(fig4.observables.wigner);
    const std::vector<double> expected{7.0, 7.1, 7.8, 8.0, 8.3};
    ASSERT_EQ(fig4.observables.wigner->times.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        EXPECT_DOUBLE_EQ(fig4.observables.wigner->times[i], expected[i]);

    EXPECT_THROW(catalog_entry("fig9"), std::out_of_range);
}

TEST(Catalog, NamesUniqueAndChecksAttached) {
    std::vector<std::string> names;
    for (const auto &e : catalog()) {
        names.push_back(e.name);
        EXPECT_FALSE(e.expected_checks.empty()) << e.name;
        EXPECT_NO_THROW(e.config.validate()) << e.name;
    }
    std::sort(names.begin(), names.end());
    EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());
}
