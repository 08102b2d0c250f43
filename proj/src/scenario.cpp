#include "pdao/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace pdao {

namespace pt = boost::property_tree;

namespace {

std::string join(const std::vector<std::string> &items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += sep;
        out += items[i];
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

std::optional<double> to_double(std::string_view text) {
    const std::string s = trim(text);
    double value = 0.0;
    const char *begin = s.data();
    const char *end = s.data() + s.size();
    if (!s.empty() && *begin == '+')
        ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || s.empty())
        return std::nullopt;
    return value;
}

std::optional<long long> to_integer(std::string_view text) {
    const std::string s = trim(text);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return value;
}

std::optional<bool> to_bool(std::string_view text) {
    const std::string s = trim(text);
    if (s == "true" || s == "yes" || s == "on" || s == "1")
        return true;
    if (s == "false" || s == "no" || s == "off" || s == "0")
        return false;
    return std::nullopt;
}

// Every key the loader understands; anything else is reported.
const std::map<std::string, std::set<std::string>> &known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"scenario", {"name", "method"}},
        {"model", {"delta", "chi", "drive", "phi", "gamma", "nbath"}},
        {"pulses", {"monochromatic", "t0", "width", "period", "count"}},
        {"basis", {"n_max", "tail_tolerance"}},
        {"initial", {"state"}},
        {"evolution",
         {"t_start", "t_end", "sample_dt", "initial_dt", "rel_tol", "abs_tol",
          "verify_convergence", "max_halvings", "scheme"}},
        {"qsd", {"trajectories", "dt", "seed", "threads"}},
        {"observables",
         {"max_level", "fidelity_target", "symmetry_defect", "negativity", "wigner_times",
          "wigner_x_min", "wigner_x_max", "wigner_y_min", "wigner_y_max", "wigner_n_x",
          "wigner_n_y", "symmetry_r_max", "symmetry_n_r", "symmetry_n_theta"}},
        {"output", {"dir"}},
    };
    return keys;
}

// Collects problems instead of stopping at the first one.
class Reader {
  public:
    explicit Reader(const pt::ptree &tree) : tree_(tree) {}

    std::vector<std::string> problems;

    bool has(const std::string &key) const { return tree_.get_optional<std::string>(key).has_value(); }
    bool has_section(const std::string &section) const {
        return tree_.get_child_optional(section).has_value();
    }

    std::optional<std::string> raw(const std::string &key) const {
        auto v = tree_.get_optional<std::string>(key);
        if (!v)
            return std::nullopt;
        return trim(*v);
    }

    void real(const std::string &key, double &out) {
        if (auto v = raw(key)) {
            if (auto d = to_double(*v))
                out = *d;
            else
                problems.push_back(fmt::format("{}: '{}' is not a number", key, *v));
        }
    }

    void integer(const std::string &key, int &out) {
        if (auto v = raw(key)) {
            auto i = to_integer(*v);
            if (i && *i >= std::numeric_limits<int>::min() && *i <= std::numeric_limits<int>::max())
                out = static_cast<int>(*i);
            else
                problems.push_back(fmt::format("{}: '{}' is not an integer", key, *v));
        }
    }

    void boolean(const std::string &key, bool &out) {
        if (auto v = raw(key)) {
            if (auto b = to_bool(*v))
                out = *b;
            else
                problems.push_back(fmt::format("{}: '{}' is not a boolean", key, *v));
        }
    }

  private:
    const pt::ptree &tree_;
};

ScenarioConfig from_tree(const pt::ptree &tree) {
    Reader in(tree);
    ScenarioConfig cfg;

    for (const auto &[section, child] : tree) {
        auto known = known_keys().find(section);
        if (known == known_keys().end()) {
            in.problems.push_back(fmt::format("unknown section [{}]", section));
            continue;
        }
        if (child.empty() && !child.data().empty()) {
            in.problems.push_back(fmt::format("key '{}' must live inside a section", section));
            continue;
        }
        for (const auto &[key, value] : child)
            if (!known->second.contains(key))
                in.problems.push_back(fmt::format("unknown key {}.{}", section, key));
    }

    if (auto v = in.raw("scenario.name"))
        cfg.name = *v;
    if (auto v = in.raw("scenario.method")) {
        if (*v == "master")
            cfg.method = Method::master;
        else if (*v == "qsd")
            cfg.method = Method::qsd;
        else if (*v == "both")
            cfg.method = Method::both;
        else
            in.problems.push_back(
                fmt::format("scenario.method: '{}' is not one of master, qsd, both", *v));
    }

    in.real("model.delta", cfg.model.delta);
    in.real("model.chi", cfg.model.chi);
    in.real("model.drive", cfg.model.drive);
    in.real("model.phi", cfg.model.phi);
    in.real("model.gamma", cfg.model.gamma);
    in.real("model.nbath", cfg.model.nbath);

    cfg.pulses.monochromatic = !in.has_section("pulses");
    in.boolean("pulses.monochromatic", cfg.pulses.monochromatic);
    in.real("pulses.t0", cfg.pulses.t0);
    in.real("pulses.width", cfg.pulses.width);
    in.real("pulses.period", cfg.pulses.period);
    if (auto v = in.raw("pulses.count")) {
        if (*v == "unbounded") {
            cfg.pulses.count.reset();
        } else {
            int count = 0;
            in.integer("pulses.count", count);
            cfg.pulses.count = count;
        }
    }

    int n_max = 50;
    double tail_tolerance = 1e-6;
    in.integer("basis.n_max", n_max);
    in.real("basis.tail_tolerance", tail_tolerance);
    try {
        cfg.evolution.basis = make_basis(n_max, tail_tolerance);
    } catch (const std::invalid_argument &e) {
        in.problems.push_back(fmt::format("basis: {}", e.what()));
    }

    if (auto v = in.raw("initial.state")) {
        try {
            cfg.initial = InitialState::parse(*v);
        } catch (const std::invalid_argument &e) {
            in.problems.push_back(fmt::format("initial.state: {}", e.what()));
        }
    }

    auto &ev = cfg.evolution;
    in.real("evolution.t_start", ev.t_start);
    in.real("evolution.t_end", ev.t_end);
    in.real("evolution.sample_dt", cfg.sample_dt);
    in.real("evolution.initial_dt", ev.step.initial_dt);
    in.real("evolution.rel_tol", ev.step.rel_tol);
    in.real("evolution.abs_tol", ev.step.abs_tol);
    in.boolean("evolution.verify_convergence", ev.step.verify_convergence);
    in.integer("evolution.max_halvings", ev.step.max_halvings);
    if (auto v = in.raw("evolution.scheme")) {
        if (*v == "lawson_rk4")
            ev.scheme = Scheme::integrating_factor_rk4;
        else if (*v == "rk4")
            ev.scheme = Scheme::classic_rk4;
        else
            in.problems.push_back(
                fmt::format("evolution.scheme: '{}' is not one of lawson_rk4, rk4", *v));
    }

    if (in.has_section("qsd")) {
        QsdConfig q;
        in.integer("qsd.trajectories", q.n_trajectories);
        in.real("qsd.dt", q.dt);
        if (auto v = in.raw("qsd.seed")) {
            std::uint64_t seed = 0;
            auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), seed);
            if (ec != std::errc() || ptr != v->data() + v->size())
                in.problems.push_back(fmt::format("qsd.seed: '{}' is not an unsigned integer", *v));
            else
                q.base_seed = seed;
        }
        in.integer("qsd.threads", q.threads);
        cfg.qsd = q;
    }

    auto &obs = cfg.observables;
    in.integer("observables.max_level", obs.max_level);
    if (auto v = in.raw("observables.fidelity_target")) {
        try {
            obs.fidelity_target = InitialState::parse(*v);
        } catch (const std::invalid_argument &e) {
            in.problems.push_back(fmt::format("observables.fidelity_target: {}", e.what()));
        }
    }
    in.boolean("observables.symmetry_defect", obs.symmetry_defect);
    in.boolean("observables.negativity", obs.negativity);
    if (auto v = in.raw("observables.wigner_times"); v && !v->empty()) {
        WignerRequest req;
        for (const auto &label : split(*v, ',')) {
            try {
                req.times.push_back(parse_time_label(label, cfg.pulses.period, cfg.pulses.width));
                req.labels.push_back(label);
            } catch (const std::invalid_argument &e) {
                in.problems.push_back(fmt::format("observables.wigner_times: {}", e.what()));
            }
        }
        in.real("observables.wigner_x_min", req.grid.x_min);
        in.real("observables.wigner_x_max", req.grid.x_max);
        in.real("observables.wigner_y_min", req.grid.y_min);
        in.real("observables.wigner_y_max", req.grid.y_max);
        in.integer("observables.wigner_n_x", req.grid.n_x);
        in.integer("observables.wigner_n_y", req.grid.n_y);
        in.real("observables.symmetry_r_max", req.symmetry_grid.r_max);
        in.integer("observables.symmetry_n_r", req.symmetry_grid.n_r);
        in.integer("observables.symmetry_n_theta", req.symmetry_grid.n_theta);
        obs.wigner = std::move(req);
    }

    if (auto v = in.raw("output.dir"))
        cfg.output_dir = *v;

    if (!in.problems.empty())
        throw ConfigError(std::move(in.problems));

    std::vector<double> extra;
    if (obs.wigner)
        extra = obs.wigner->times;
    ev.sample_times.clear();
    if (ev.t_start < ev.t_end && cfg.sample_dt > 0.0)
        ev.sample_times = merged_sample_times(ev.t_start, ev.t_end, cfg.sample_dt, extra);
    if (cfg.qsd) {
        cfg.qsd->basis = ev.basis;
        cfg.qsd->t_start = ev.t_start;
        cfg.qsd->sample_times = ev.sample_times;
    }
    cfg.validate();
    return cfg;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("configuration error: " + join(problems, "; ")),
      problems_(std::move(problems)) {}

std::string_view to_string(Method m) {
    switch (m) {
    case Method::master:
        return "master";
    case Method::qsd:
        return "qsd";
    case Method::both:
        return "both";
    }
    return "?";
}

std::string_view to_string(Scheme s) {
    return s == Scheme::classic_rk4 ? "rk4" : "lawson_rk4";
}

InitialState InitialState::parse(std::string_view text) {
    const std::string s = trim(text);
    InitialState out;
    if (s == "vacuum") {
        out.levels = {0};
        return out;
    }
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument(fmt::format(
            "'{}' is not one of vacuum, fock:<n>, superposition:<n>,<m>,...", s));
    const std::string kind = trim(std::string_view(s).substr(0, colon));
    const auto items = split(std::string_view(s).substr(colon + 1), ',');
    out.levels.clear();
    for (const auto &item : items) {
        auto n = to_integer(item);
        if (!n || *n < 0)
            throw std::invalid_argument(fmt::format("'{}' is not a Fock level", item));
        out.levels.push_back(static_cast<int>(*n));
    }
    if (kind == "fock") {
        if (out.levels.size() != 1)
            throw std::invalid_argument("fock: takes exactly one level");
    } else if (kind != "superposition") {
        throw std::invalid_argument(fmt::format("unknown state kind '{}'", kind));
    }
    return out;
}

std::string InitialState::describe() const {
    if (levels.size() == 1)
        return levels[0] == 0 ? "vacuum" : fmt::format("fock:{}", levels[0]);
    std::vector<std::string> parts;
    for (int n : levels)
        parts.push_back(std::to_string(n));
    return "superposition:" + join(parts, ",");
}

PureState InitialState::build(const FockBasis &basis) const {
    return superposition(basis, levels);
}

void ScenarioConfig::validate() const {
    std::vector<std::string> problems;
    auto capture = [&](auto &&fn) {
        try {
            fn();
        } catch (const std::invalid_argument &e) {
            problems.emplace_back(e.what());
        }
    };
    capture([&] { model.validate(); });
    capture([&] { pulses.validate(); });
    capture([&] { evolution.validate(); });
    if (!(sample_dt > 0.0))
        problems.push_back("evolution.sample_dt must be > 0");
    if ((method == Method::qsd || method == Method::both) && !qsd)
        problems.push_back(
            fmt::format("method {} requires a [qsd] section", to_string(method)));
    if (qsd)
        capture([&] { qsd->validate(); });
    for (int n : initial.levels)
        if (n > evolution.basis.n_max())
            problems.push_back(fmt::format("initial.state level {} exceeds n_max {}", n,
                                           evolution.basis.n_max()));
    if (observables.fidelity_target)
        for (int n : observables.fidelity_target->levels)
            if (n > evolution.basis.n_max())
                problems.push_back(fmt::format("observables.fidelity_target level {} exceeds n_max {}",
                                               n, evolution.basis.n_max()));
    if (observables.max_level < 0 || observables.max_level > evolution.basis.n_max())
        problems.push_back(fmt::format("observables.max_level must lie in 0..{}",
                                       evolution.basis.n_max()));
    if (observables.wigner) {
        capture([&] { validate_grid(observables.wigner->grid); });
        capture([&] { validate_grid(observables.wigner->symmetry_grid); });
        if (observables.symmetry_defect && observables.wigner->symmetry_grid.n_theta % 2 != 0)
            problems.push_back("observables.symmetry_n_theta must be even");
        for (double t : observables.wigner->times)
            if (t < evolution.t_start || t > evolution.t_end)
                problems.push_back(fmt::format("Wigner time {} outside [{}, {}]", t,
                                               evolution.t_start, evolution.t_end));
    }
    if (!problems.empty())
        throw ConfigError(std::move(problems));
}

double parse_time_label(std::string_view label, double tau, double width) {
    std::string s;
    for (char c : label)
        if (!std::isspace(static_cast<unsigned char>(c)) && c != '*')
            s += c;
    if (s.empty())
        throw std::invalid_argument("empty time label");

    double total = 0.0;
    std::size_t pos = 0;
    while (pos < s.size()) {
        double sign = 1.0;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = s[pos] == '-' ? -1.0 : 1.0;
            ++pos;
        } else if (pos != 0) {
            throw std::invalid_argument(fmt::format("malformed time label '{}'", label));
        }
        std::size_t end = pos;
        while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
                                  ((s[end] == 'e' || s[end] == 'E') && end > pos &&
                                   end + 1 < s.size() &&
                                   (std::isdigit(static_cast<unsigned char>(s[end + 1])) ||
                                    s[end + 1] == '-'))))
            end += (s[end] == 'e' || s[end] == 'E') && s[end + 1] == '-' ? 2 : 1;
        double coef = 1.0;
        if (end > pos) {
            auto v = to_double(std::string_view(s).substr(pos, end - pos));
            if (!v)
                throw std::invalid_argument(fmt::format("malformed number in '{}'", label));
            coef = *v;
        }
        double unit = 1.0;
        if (s.compare(end, 3, "tau") == 0) {
            unit = tau;
            end += 3;
        } else if (end < s.size() && s[end] == 'T') {
            unit = width;
            end += 1;
        } else if (end == pos) {
            throw std::invalid_argument(fmt::format("malformed time label '{}'", label));
        }
        total += sign * coef * unit;
        pos = end;
    }
    return total;
}

std::vector<double> merged_sample_times(double t_start, double t_end, double sample_dt,
                                        const std::vector<double> &extra) {
    std::vector<double> times;
    const long count = static_cast<long>(std::floor((t_end - t_start) / sample_dt + 1e-9));
    for (long k = 0; k <= count; ++k)
        times.push_back(t_start + static_cast<double>(k) * sample_dt);
    if (t_end - times.back() > 1e-9 * sample_dt)
        times.push_back(t_end);
    times.insert(times.end(), extra.begin(), extra.end());
    std::sort(times.begin(), times.end());
    // Merge points closer than a millionth of the sample spacing.
    std::vector<double> merged;
    for (double t : times) {
        if (!merged.empty() && t - merged.back() < 1e-6 * sample_dt) {
            // Keep exact extra times over grid approximations.
            if (std::find(extra.begin(), extra.end(), t) != extra.end())
                merged.back() = t;
            continue;
        }
        merged.push_back(t);
    }
    return merged;
}

ScenarioConfig load_config_text(std::string_view text, std::string_view origin) {
    std::istringstream stream{std::string(text)};
    pt::ptree tree;
    try {
        pt::read_ini(stream, tree);
    } catch (const pt::ini_parser_error &e) {
        throw ConfigError({fmt::format("{}:{}: {}", origin, e.line(), e.message())});
    }
    return from_tree(tree);
}

ScenarioConfig load_config(const std::filesystem::path &path) {
    std::ifstream file(path);
    if (!file)
        throw ConfigError({fmt::format("{}: cannot open file", path.string())});
    std::stringstream buffer;
    buffer << file.rdbuf();
    return load_config_text(buffer.str(), path.string());
}

std::string dump_config(const ScenarioConfig &c) {
    // Shortest representation that reads back to the same double.
    auto num = [](double v) { return fmt::format("{}", v); };
    std::string out;
    out += fmt::format("[scenario]\nname = {}\nmethod = {}\n\n", c.name, to_string(c.method));
    out += fmt::format("[model]\ndelta = {}\nchi = {}\ndrive = {}\nphi = {}\ngamma = {}\nnbath = {}\n\n",
                       num(c.model.delta), num(c.model.chi), num(c.model.drive), num(c.model.phi),
                       num(c.model.gamma), num(c.model.nbath));
    out += fmt::format("[pulses]\nmonochromatic = {}\nt0 = {}\nwidth = {}\nperiod = {}\ncount = {}\n\n",
                       c.pulses.monochromatic, num(c.pulses.t0), num(c.pulses.width),
                       num(c.pulses.period),
                       c.pulses.count ? std::to_string(*c.pulses.count) : "unbounded");
    out += fmt::format("[basis]\nn_max = {}\ntail_tolerance = {}\n\n", c.evolution.basis.n_max(),
                       num(c.evolution.basis.tail_tolerance()));
    out += fmt::format("[initial]\nstate = {}\n\n", c.initial.describe());
    const auto &ev = c.evolution;
    out += fmt::format("[evolution]\nt_start = {}\nt_end = {}\nsample_dt = {}\ninitial_dt = {}\n"
                       "rel_tol = {}\nabs_tol = {}\nverify_convergence = {}\nmax_halvings = {}\n"
                       "scheme = {}\n\n",
                       num(ev.t_start), num(ev.t_end), num(c.sample_dt), num(ev.step.initial_dt),
                       num(ev.step.rel_tol), num(ev.step.abs_tol), ev.step.verify_convergence,
                       ev.step.max_halvings, to_string(ev.scheme));
    if (c.qsd)
        out += fmt::format("[qsd]\ntrajectories = {}\ndt = {}\nseed = {}\nthreads = {}\n\n",
                           c.qsd->n_trajectories, num(c.qsd->dt), c.qsd->base_seed, c.qsd->threads);
    const auto &obs = c.observables;
    out += fmt::format("[observables]\nmax_level = {}\n", obs.max_level);
    if (obs.fidelity_target)
        out += fmt::format("fidelity_target = {}\n", obs.fidelity_target->describe());
    out += fmt::format("symmetry_defect = {}\nnegativity = {}\n", obs.symmetry_defect, obs.negativity);
    if (obs.wigner) {
        const auto &w = *obs.wigner;
        out += fmt::format("wigner_times = {}\n", join(w.labels, ", "));
        out += fmt::format("wigner_x_min = {}\nwigner_x_max = {}\nwigner_y_min = {}\nwigner_y_max = {}\n"
                           "wigner_n_x = {}\nwigner_n_y = {}\n",
                           num(w.grid.x_min), num(w.grid.x_max), num(w.grid.y_min),
                           num(w.grid.y_max), w.grid.n_x, w.grid.n_y);
        out += fmt::format("symmetry_r_max = {}\nsymmetry_n_r = {}\nsymmetry_n_theta = {}\n",
                           num(w.symmetry_grid.r_max), w.symmetry_grid.n_r,
                           w.symmetry_grid.n_theta);
    }
    out += fmt::format("\n[output]\ndir = {}\n", c.output_dir.string());
    return out;
}

} // namespace pdao
