#include "pdao/qsd.hpp"
#include "pdao/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "propagation.hpp"

namespace pdao {

void QsdConfig::validate() const {
    std::string errors;
    auto add = [&](const std::string &msg) {
        if (!errors.empty())
            errors += "; ";
        errors += msg;
    };
    if (n_trajectories < 1)
        add("n_trajectories must be >= 1");
    if (!(dt > 0.0))
        add("dt must be > 0");
    if (threads < 0)
        add("threads must be >= 0");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < t_start) {
            add(fmt::format("sample time {} precedes t_start {}", sample_times[i], t_start));
            break;
        }
        if (i > 0 && !(sample_times[i] > sample_times[i - 1])) {
            add("sample times must be strictly increasing");
            break;
        }
    }
    if (!errors.empty())
        throw std::invalid_argument("invalid QSD config: " + errors);
}

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(base_seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

namespace {

class QsdStepper {
  public:
    QsdStepper(const ModelParams &params, const PulseTrain &train, const FockBasis &basis)
        : gen_(params, train, basis) {
        const int d = basis.dimension();
        for (Vector *v : {&k1_, &k2_, &k3_, &k4_, &stage_, &base_, &jump_, &noise_})
            v->resize(d);
    }

    std::size_t n_noises() const { return gen_.jumps().size(); }

    void step(Vector &psi, double t, double h, std::span<const Complex> increments) {
        if (increments.size() != n_noises())
            throw std::invalid_argument(fmt::format(
                "qsd_step: expected {} Wiener increments, got {}", n_noises(), increments.size()));
        if (half_.s != 0.5 * h) {
            half_ = detail::FreePhases(gen_.energies(), 0.5 * h);
            full_ = detail::FreePhases(gen_.energies(), h);
        }

        // Ito noise at the step start.
        noise_.setZero();
        const double n2 = psi.squaredNorm();
        for (std::size_t i = 0; i < n_noises(); ++i) {
            jump_.noalias() = gen_.jumps()[i] * psi;
            const Complex mean = psi.dot(jump_) / n2;
            noise_ += increments[i] * (jump_ - mean * psi);
        }

        const Vector &ph = half_.vector;
        const Vector &pf = full_.vector;
        drift(t, psi, k1_);
        stage_ = ph.cwiseProduct(psi + (0.5 * h) * k1_);
        drift(t + 0.5 * h, stage_, k2_);
        base_ = ph.cwiseProduct(psi);
        stage_ = base_ + (0.5 * h) * k2_;
        drift(t + 0.5 * h, stage_, k3_);
        base_ = pf.cwiseProduct(psi);
        stage_ = base_ + h * ph.cwiseProduct(k3_);
        drift(t + h, stage_, k4_);
        psi = base_ + (h / 6.0) * (pf.cwiseProduct(k1_) + 2.0 * ph.cwiseProduct(k2_ + k3_) + k4_) +
              pf.cwiseProduct(noise_);
        psi.normalize();
    }

  private:
    // Interaction-frame drift: (-iV - K/2) psi + sum_i (<L_i>* L_i - |<L_i>|^2 / 2) psi.
    void drift(double t, const Vector &psi, Vector &out) {
        gen_.effective_apply(t, psi, out);
        const double n2 = psi.squaredNorm();
        for (const Matrix &jump : gen_.jumps()) {
            jump_.noalias() = jump * psi;
            const Complex mean = psi.dot(jump_) / n2;
            out += std::conj(mean) * jump_ - (0.5 * std::norm(mean)) * psi;
        }
    }

    detail::Generator gen_;
    detail::FreePhases half_;
    detail::FreePhases full_;
    Vector k1_, k2_, k3_, k4_, stage_, base_, jump_, noise_;
};

void draw_increments(std::mt19937_64 &rng, double dt, std::span<Complex> out) {
    std::normal_distribution<double> normal;
    const double scale = std::sqrt(0.5 * dt);
    for (Complex &x : out) {
        const double g1 = normal(rng);
        const double g2 = normal(rng);
        x = Complex(g1, g2) * scale;
    }
}

void check_normalized(const PureState &psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-8)
        throw std::invalid_argument(
            fmt::format("QSD requires a normalized state, norm is {:.12g}", psi.norm()));
}

} // namespace

PureState qsd_step(const PureState &psi, double t, double dt, const ModelParams &params,
                   const PulseTrain &train, std::span<const Complex> increments) {
    check_normalized(psi);
    QsdStepper stepper(params, train, psi.basis);
    PureState out = psi;
    stepper.step(out.amplitudes, t, dt, increments);
    return out;
}

PureState qsd_step(const PureState &psi, double t, double dt, const ModelParams &params,
                   const PulseTrain &train, std::mt19937_64 &rng) {
    check_normalized(psi);
    QsdStepper stepper(params, train, psi.basis);
    std::vector<Complex> increments(stepper.n_noises());
    draw_increments(rng, dt, increments);
    PureState out = psi;
    stepper.step(out.amplitudes, t, dt, increments);
    return out;
}

std::vector<PureState> run_trajectory(std::uint64_t seed, const QsdConfig &config,
                                      const ModelParams &params, const PulseTrain &train,
                                      const PureState &psi0) {
    config.validate();
    params.validate();
    train.validate();
    if (psi0.basis != config.basis)
        throw std::invalid_argument("run_trajectory: initial state basis differs from config");
    check_normalized(psi0);

    std::vector<long> sample_steps;
    sample_steps.reserve(config.sample_times.size());
    for (double s : config.sample_times)
        sample_steps.push_back(std::lround((s - config.t_start) / config.dt));

    QsdStepper stepper(params, train, config.basis);
    std::mt19937_64 rng(seed);
    std::vector<Complex> increments(stepper.n_noises());
    const int band = std::min(kGuardBand, config.basis.n_max());

    std::vector<PureState> out;
    out.reserve(sample_steps.size());
    PureState psi = psi0;
    long step = 0;
    for (std::size_t i = 0; i < sample_steps.size(); ++i) {
        while (step < sample_steps[i]) {
            const double t = config.t_start + static_cast<double>(step) * config.dt;
            draw_increments(rng, config.dt, increments);
            stepper.step(psi.amplitudes, t, config.dt, increments);
            ++step;
        }
        if (!psi.amplitudes.allFinite())
            throw IntegrationFailure("QSD trajectory became non-finite",
                                     i > 0 ? config.sample_times[i - 1] : config.t_start);
        const double tail = tail_mass(psi, band);
        if (tail >= config.basis.tail_tolerance())
            throw TruncationOverflow(config.sample_times[i], tail, config.basis.tail_tolerance());
        out.push_back(psi);
    }
    return out;
}

EnsembleResult ensemble_average(const QsdConfig &config, const ModelParams &params,
                                const PulseTrain &train, const PureState &psi0) {
    config.validate();
    const std::size_t n_samples = config.sample_times.size();
    const int d = config.basis.dimension();
    const int n_traj = config.n_trajectories;
    const int workers = std::max(
        1, std::min(n_traj, config.threads > 0
                                ? config.threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))));

    std::vector<Matrix> sums(n_samples, Matrix::Zero(d, d));
    // excitation[k * n_samples + s]: <a^+a> of trajectory k at sample s.
    std::vector<double> excitation(static_cast<std::size_t>(n_traj) * n_samples);

    // Trajectories run in waves of `workers`; each wave is folded into the
    // sums in index order before the next one starts.
    std::vector<std::vector<PureState>> wave(workers);
    std::vector<std::exception_ptr> failures(workers);
    for (int first = 0; first < n_traj; first += workers) {
        const int count = std::min(workers, n_traj - first);
        auto work = [&](int slot) {
            try {
                wave[slot] = run_trajectory(trajectory_seed(config.base_seed, first + slot), config,
                                            params, train, psi0);
            } catch (...) {
                failures[slot] = std::current_exception();
            }
        };
        if (count == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(count);
            for (int slot = 0; slot < count; ++slot)
                pool.emplace_back(work, slot);
        }
        for (int slot = 0; slot < count; ++slot)
            if (failures[slot])
                std::rethrow_exception(failures[slot]);
        for (int slot = 0; slot < count; ++slot) {
            const auto &states = wave[slot];
            for (std::size_t s = 0; s < n_samples; ++s) {
                const Vector &psi = states[s].amplitudes;
                sums[s].noalias() += psi * psi.adjoint();
                double n = 0.0;
                for (int k = 0; k < d; ++k)
                    n += k * std::norm(psi(k));
                excitation[static_cast<std::size_t>(first + slot) * n_samples + s] = n;
            }
        }
    }

    EnsembleResult result;
    result.n_trajectories = n_traj;
    result.times = config.sample_times;
    for (std::size_t s = 0; s < n_samples; ++s) {
        DensityMatrix mean{sums[s] / static_cast<double>(n_traj), config.basis};
        mean.hermitize();
        result.mean_density.push_back(std::move(mean));

        double total = 0.0;
        for (int k = 0; k < n_traj; ++k)
            total += excitation[static_cast<std::size_t>(k) * n_samples + s];
        const double avg = total / n_traj;
        double var = 0.0;
        for (int k = 0; k < n_traj; ++k) {
            const double dev = excitation[static_cast<std::size_t>(k) * n_samples + s] - avg;
            var += dev * dev;
        }
        result.mean_excitation.push_back(avg);
        result.stderr_excitation.push_back(
            n_traj > 1 ? std::sqrt(var / (n_traj - 1) / n_traj)
                       : std::numeric_limits<double>::quiet_NaN());
    }
    return result;
}

} // namespace pdao
