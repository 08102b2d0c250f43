#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdao/master.hpp"
#include "pdao/model.hpp"
#include "pdao/phase_space.hpp"
#include "pdao/qsd.hpp"

namespace pdao {

/// Parse or validation failure; `problems` lists every offending key.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems);

    const std::vector<std::string> &problems() const { return problems_; }

  private:
    std::vector<std::string> problems_;
};

enum class Method { master, qsd, both };

std::string_view to_string(Method m);
std::string_view to_string(Scheme s);

/// Initial pure state: vacuum, a Fock level, or an equal superposition.
struct InitialState {
    std::vector<int> levels{0};

    static InitialState parse(std::string_view text);
    std::string describe() const;
    PureState build(const FockBasis &basis) const;
};

struct WignerRequest {
    std::vector<std::string> labels; ///< as written, e.g. "2tau-0.4T"
    std::vector<double> times;
    CartesianGrid grid = default_wigner_grid();
    PolarGrid symmetry_grid = symmetry_test_grid();
};

struct Observables {
    int max_level = 5;
    std::optional<InitialState> fidelity_target;
    bool symmetry_defect = true;
    bool negativity = true;
    std::optional<WignerRequest> wigner;
};

struct ScenarioConfig {
    std::string name = "scenario";
    ModelParams model;
    PulseTrain pulses;
    Method method = Method::master;
    EvolutionConfig evolution;
    double sample_dt = 0.01;
    std::optional<QsdConfig> qsd;
    InitialState initial;
    Observables observables;
    std::filesystem::path output_dir = "out";

    /// Throws ConfigError listing every violated invariant.
    void validate() const;
};

/// Evaluates a pulse-landmark time such as "2tau-0.4T", "2*tau + 0.6*T" or
/// "7.5" with the given period tau and width T.
double parse_time_label(std::string_view label, double tau, double width);

/// Reads the INI-style key/value file documented in the README.
ScenarioConfig load_config(const std::filesystem::path &path);
ScenarioConfig load_config_text(std::string_view text, std::string_view origin = "<text>");

/// Resolved configuration in the same key/value layout.
std::string dump_config(const ScenarioConfig &config);

/// Sample times for a run: the regular sample_dt grid merged with the
/// Wigner snapshot times.
std::vector<double> merged_sample_times(double t_start, double t_end, double sample_dt,
                                        const std::vector<double> &extra);

} // namespace pdao
