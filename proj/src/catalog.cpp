#include "pdao/runner.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace pdao {

namespace {

// Shared sections of the pulsed scenarios.
constexpr std::string_view kPulseTrain = R"(
[pulses]
t0 = 4
width = 0.5
period = 4
count = unbounded
)";

constexpr std::string_view kFig3Model = R"(
[model]
delta = -2
chi = 5
drive = 10
phi = 3.141592653589793
)";

constexpr std::string_view kFig5Model = R"(
[model]
delta = -10
chi = 5
drive = 10.3
phi = 3.141592653589793
)";

ScenarioConfig parse(std::string_view name, std::string text) {
    return load_config_text(text, fmt::format("catalog:{}", name));
}

std::vector<ScenarioCatalogEntry> build_catalog() {
    std::vector<ScenarioCatalogEntry> out;

    out.push_back({
        "fig2",
        "monochromatic pump, stationary Wigner function with two humps",
        parse("fig2", R"(
[scenario]
name = fig2
[model]
delta = -2
chi = 5
drive = 7
[basis]
n_max = 30
[evolution]
t_end = 20
sample_dt = 0.05
[observables]
wigner_times = 20
[output]
dir = out/fig2
)"),
        {checks::StationaryTwoHumps{}},
    });

    out.push_back({
        "fig3",
        "pulse train, over-transient regime and |0>,|2> superposition",
        parse("fig3", fmt::format(R"(
[scenario]
name = fig3
{}{}
[basis]
n_max = 30
[evolution]
t_end = 22
sample_dt = 0.01
[observables]
fidelity_target = superposition:0,2
[output]
dir = out/fig3
)",
                                  kFig3Model, kPulseTrain)),
        {checks::Periodicity{}, checks::SuperpositionWindow{.t_from = 6.0, .t_to = 10.0}},
    });

    out.push_back({
        "fig4",
        "Wigner snapshots across the second pulse of the fig3 train",
        parse("fig4", fmt::format(R"(
[scenario]
name = fig4
{}{}
[basis]
n_max = 30
[evolution]
t_end = 10
sample_dt = 0.01
[observables]
fidelity_target = superposition:0,2
wigner_times = 2tau-2T, 2tau-1.8T, 2tau-0.4T, 2tau, 2tau+0.6T
[output]
dir = out/fig4
)",
                                  kFig3Model, kPulseTrain)),
        {checks::WignerSymmetry{}, checks::WignerNormalization{}},
    });

    out.push_back({
        "fig5",
        "resonant two-quantum pumping, population of |2> over a pulse cycle",
        parse("fig5", fmt::format(R"(
[scenario]
name = fig5
{}{}
[basis]
n_max = 30
[evolution]
t_end = 22
sample_dt = 0.01
[observables]
fidelity_target = fock:2
[output]
dir = out/fig5
)",
                                  kFig5Model, kPulseTrain)),
        {checks::PeakPopulation{.t_from = 14.0, .t_to = 18.0}, checks::Periodicity{}},
    });

    out.push_back({
        "fig6",
        "Wigner snapshot near the |2> population maximum of the fig5 train",
        parse("fig6", fmt::format(R"(
[scenario]
name = fig6
{}{}
[basis]
n_max = 30
[evolution]
t_end = 10
sample_dt = 0.01
[observables]
fidelity_target = fock:2
wigner_times = 2tau-0.8T, 2tau-0.25T
[output]
dir = out/fig6
)",
                                  kFig5Model, kPulseTrain)),
        {checks::WignerSymmetry{}, checks::WignerNormalization{}},
    });

    out.push_back({
        "decay",
        "free decay of |1> into a zero-temperature bath, master and QSD",
        parse("decay", R"(
[scenario]
name = decay
method = both
[model]
delta = 0
chi = 0
drive = 0
[basis]
n_max = 20
[initial]
state = fock:1
[evolution]
t_end = 5
sample_dt = 0.05
[qsd]
trajectories = 500
dt = 0.001
seed = 1
[output]
dir = out/decay
)"),
        {checks::DecayLaw{}, checks::MethodAgreement{}},
    });

    out.push_back({
        "thermal",
        "undriven oscillator relaxing to the thermal state with N = 0.5",
        parse("thermal", R"(
[scenario]
name = thermal
[model]
delta = 0
chi = 0
drive = 0
nbath = 0.5
[basis]
n_max = 20
[evolution]
t_end = 20
sample_dt = 0.1
[output]
dir = out/thermal
)"),
        {checks::StationaryExcitation{}},
    });

    return out;
}

} // namespace

const std::vector<ScenarioCatalogEntry> &catalog() {
    static const std::vector<ScenarioCatalogEntry> entries = build_catalog();
    return entries;
}

const ScenarioCatalogEntry &catalog_entry(std::string_view name) {
    for (const auto &entry : catalog())
        if (entry.name == name)
            return entry;
    throw std::out_of_range(fmt::format("no catalog entry named '{}'", name));
}

} // namespace pdao
