#include "pdao/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace pdao {

void ModelParams::validate() const {
    std::string errors;
    auto require = [&](bool ok, const char *msg) {
        if (!ok) {
            if (!errors.empty())
                errors += "; ";
            errors += msg;
        }
    };
    require(std::isfinite(delta), "delta must be finite");
    require(std::isfinite(phi), "phi must be finite");
    require(gamma > 0.0 && std::isfinite(gamma), "gamma must be > 0");
    require(chi >= 0.0 && std::isfinite(chi), "chi must be >= 0");
    require(drive >= 0.0 && std::isfinite(drive), "drive must be >= 0");
    require(nbath >= 0.0 && std::isfinite(nbath), "nbath must be >= 0");
    if (!errors.empty())
        throw std::invalid_argument("invalid model parameters: " + errors);
}

void PulseTrain::validate() const {
    if (monochromatic)
        return;
    std::string errors;
    if (!(width > 0.0))
        errors += "width must be > 0";
    if (!(t0 >= 0.0))
        errors += errors.empty() ? "t0 must be >= 0" : "; t0 must be >= 0";
    if (count && *count < 1)
        errors += errors.empty() ? "count must be >= 1" : "; count must be >= 1";
    if ((!count || *count > 1) && !(period > 0.0))
        errors += errors.empty() ? "period must be > 0" : "; period must be > 0";
    if (!errors.empty())
        throw std::invalid_argument("invalid pulse train: " + errors);
}

double PulseTrain::peak_bound() const {
    if (monochromatic)
        return 1.0;
    if (count && *count == 1)
        return 1.0;
    // Nearest pulse contributes at most 1; the k-th neighbour on either side
    // sits at least (k - 1/2) periods away.
    double bound = 1.0;
    for (int k = 1; k < 64; ++k) {
        const double x = (k - 0.5) * period / width;
        const double term = 2.0 * std::exp(-x * x);
        bound += term;
        if (term < 1e-18)
            break;
    }
    return bound;
}

double pulse_envelope(double t, const PulseTrain &train) {
    if (train.monochromatic)
        return 1.0;
    const double window = 8.0 * train.width * std::max(1.0, train.period / train.width);
    long first = 0;
    long last = train.count ? *train.count - 1 : 0;
    if (!train.count || *train.count > 1) {
        first = std::max(0L, static_cast<long>(std::ceil((t - train.t0 - window) / train.period)));
        const long reach = static_cast<long>(std::floor((t - train.t0 + window) / train.period));
        last = train.count ? std::min<long>(last, reach) : reach;
    }
    double f = 0.0;
    for (long k = first; k <= last; ++k) {
        const double offset = t - train.t0 - static_cast<double>(k) * train.period;
        if (std::abs(offset) > window)
            continue;
        const double x = offset / train.width;
        f += std::exp(-x * x);
    }
    return f;
}

Eigen::VectorXd static_energies(const ModelParams &params, const FockBasis &basis) {
    Eigen::VectorXd e(basis.dimension());
    for (int n = 0; n < basis.dimension(); ++n) {
        const double nd = n;
        e(n) = params.delta * nd + params.chi * nd * nd;
    }
    return e;
}

Operator pump_operator(const ModelParams &params, const FockBasis &basis) {
    const int d = basis.dimension();
    const Complex up = std::polar(1.0, params.phi);
    Matrix p = Matrix::Zero(d, d);
    // <n+2| a^+^2 |n> = sqrt((n+1)(n+2))
    for (int n = 0; n + 2 < d; ++n) {
        const double amp = std::sqrt(static_cast<double>(n + 1) * (n + 2));
        p(n + 2, n) = up * amp;
        p(n, n + 2) = std::conj(up) * amp;
    }
    return {std::move(p), basis};
}

Operator hamiltonian_at(double t, const ModelParams &params, const PulseTrain &train,
                        const FockBasis &basis) {
    Operator h = pump_operator(params, basis);
    h.elements *= params.drive * pulse_envelope(t, train);
    h.elements.diagonal() += static_energies(params, basis).cast<Complex>();
    return h;
}

std::vector<Operator> lindblad_ops(const ModelParams &params, const FockBasis &basis) {
    std::vector<Operator> ops;
    Operator loss = annihilation(basis);
    loss.elements *= std::sqrt((params.nbath + 1.0) * params.gamma);
    ops.push_back(std::move(loss));
    if (params.nbath != 0.0) {
        Operator gain = creation(basis);
        gain.elements *= std::sqrt(params.nbath * params.gamma);
        ops.push_back(std::move(gain));
    }
    return ops;
}

double two_quanta_detuning(int n, const ModelParams &params) {
    if (n < 0)
        throw std::invalid_argument("two_quanta_detuning: n must be >= 0");
    return 2.0 * params.delta + params.chi * (4.0 * n + 4.0);
}

double threshold_intensity(const ModelParams &params, double coupling) {
    if (!(coupling > 0.0))
        throw std::invalid_argument("threshold_intensity: coupling must be > 0");
    const double g = params.gamma;
    const double ratio = params.delta / g;
    return (g * g) / (coupling * coupling) * (1.0 + ratio * ratio);
}

SemiclassicalSolution semiclassical_steady_state(const ModelParams &params, double coupling,
                                                 double intensity) {
    if (!(params.chi > 0.0))
        throw std::invalid_argument("semiclassical_steady_state: chi must be > 0");
    if (!(coupling > 0.0))
        throw std::invalid_argument("semiclassical_steady_state: coupling must be > 0");
    if (!(intensity >= 0.0))
        throw std::invalid_argument("semiclassical_steady_state: intensity must be >= 0");

    const double g = params.gamma;
    SemiclassicalSolution out;
    out.j = coupling * coupling / (g * g) * intensity;
    if (out.j < 1.0)
        return out;

    const double scale = g / (2.0 * params.chi);
    const double bracket = params.delta / g + std::sqrt(out.j - 1.0);
    double n = scale * bracket;
    // Exactly at I_th with delta <= 0 the bracket cancels to rounding level.
    if (n < 0.0 && std::abs(bracket) <= 1e-12 * (1.0 + std::abs(params.delta / g)))
        n = 0.0;
    if (n < 0.0)
        return out;

    const double phase = 0.5 * (params.phi - std::asin(1.0 / std::sqrt(out.j)));
    out.n = n;
    out.phases = std::array<double, 2>{phase, phase + std::numbers::pi};
    out.above_threshold = intensity > threshold_intensity(params, coupling);
    return out;
}

} // namespace pdao
