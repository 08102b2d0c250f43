#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pdao/fock.hpp"

namespace pdao {

/// Physical constants of the driven oscillator, all rates in units of gamma.
///
/// `drive` is the product E0*Omega/gamma quoted by every scenario; the
/// semiclassical helpers take Omega and the pump intensity separately.
struct ModelParams {
    double delta = 0.0; ///< detuning omega0 - omega/2
    double chi = 0.0;   ///< Kerr strength
    double drive = 0.0; ///< peak E0*Omega
    double phi = 0.0;   ///< drive phase (rad)
    double gamma = 1.0; ///< damping rate
    double nbath = 0.0; ///< reservoir quanta N

    /// Throws std::invalid_argument listing every violated constraint.
    void validate() const;
};

/// Train of Gaussian pulses f(t) = sum_k exp(-(t - t0 - k*period)^2 / width^2).
struct PulseTrain {
    double t0 = 0.0;
    double width = 1.0;
    double period = 1.0;
    std::optional<int> count; ///< nullopt: unbounded train
    bool monochromatic = false;

    static PulseTrain constant() {
        PulseTrain p;
        p.monochromatic = true;
        return p;
    }

    void validate() const;
    /// Upper bound on max_t f(t).
    double peak_bound() const;
};

double pulse_envelope(double t, const PulseTrain &train);

/// Time-independent diagonal part delta*n + chi*n^2 (entries, not a matrix).
Eigen::VectorXd static_energies(const ModelParams &params, const FockBasis &basis);

/// e^{i phi} a^dagger^2 + e^{-i phi} a^2, without the drive amplitude.
Operator pump_operator(const ModelParams &params, const FockBasis &basis);

/// Rotating-frame Hamiltonian (hbar = 1):
/// delta a^+a + chi (a^+a)^2 + drive f(t) (e^{i phi} a^+^2 + e^{-i phi} a^2).
Operator hamiltonian_at(double t, const ModelParams &params, const PulseTrain &train,
                        const FockBasis &basis);

/// [sqrt((N+1) gamma) a] for N == 0, otherwise [sqrt((N+1) gamma) a, sqrt(N gamma) a^+].
std::vector<Operator> lindblad_ops(const ModelParams &params, const FockBasis &basis);

/// Detuning of the two-quantum transition |n> -> |n+2>: 2 delta + chi (4n + 4).
double two_quanta_detuning(int n, const ModelParams &params);

/// I_th = (gamma^2 / Omega^2)(1 + delta^2 / gamma^2).
double threshold_intensity(const ModelParams &params, double coupling);

struct SemiclassicalSolution {
    std::optional<double> n;
    std::optional<std::array<double, 2>> phases;
    bool above_threshold = false;
    double j = 0.0; ///< reduced pump J = Omega^2 I / gamma^2
};

/// Mean-field steady amplitude of the monochromatically pumped oscillator.
///
/// n = (gamma / 2 chi)(delta/gamma + sqrt(J - 1)) with the two locked phases
/// phi = (Phi - asin(J^{-1/2})) / 2 and phi + pi. Below J = 1, or when the
/// branch has negative intensity, n and the phases are left empty.
/// `above_threshold` is true only for I > I_th.
SemiclassicalSolution semiclassical_steady_state(const ModelParams &params, double coupling,
                                                 double intensity);

} // namespace pdao
