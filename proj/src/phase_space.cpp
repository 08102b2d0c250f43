#include "pdao/phase_space.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace pdao {

std::vector<double> populations(const DensityMatrix &rho) {
    std::vector<double> p(rho.basis.dimension());
    for (int n = 0; n < rho.basis.dimension(); ++n)
        p[n] = rho.elements(n, n).real();
    return p;
}

double mean_excitation(const DensityMatrix &rho) {
    double n = 0.0;
    for (int k = 0; k < rho.basis.dimension(); ++k)
        n += k * rho.elements(k, k).real();
    return n;
}

double fidelity_pure(const DensityMatrix &rho, const PureState &psi) {
    if (psi.basis != rho.basis)
        throw std::invalid_argument("fidelity_pure: state and target live in different bases");
    if (std::abs(psi.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("fidelity_pure: target state is not normalized");
    return psi.amplitudes.dot(rho.elements * psi.amplitudes).real();
}

double laguerre(int n, double alpha, double x) {
    if (n < 0)
        throw std::invalid_argument("laguerre: degree must be >= 0");
    double prev = 1.0;
    if (n == 0)
        return prev;
    double cur = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

Complex wigner_fock_coeff(const FockBasis &basis, int m, int n, double r, double theta) {
    if (m < 0 || n < 0 || m > basis.n_max() || n > basis.n_max())
        throw std::invalid_argument(
            fmt::format("wigner_fock_coeff: indices ({}, {}) outside 0..{}", m, n, basis.n_max()));
    if (m < n)
        return std::conj(wigner_fock_coeff(basis, n, m, r, theta));
    const int k = m - n;
    // sqrt(n!/m!) (2r)^k accumulated factor by factor.
    double scale = 1.0;
    for (int j = n + 1; j <= m; ++j)
        scale *= 2.0 * r / std::sqrt(static_cast<double>(j));
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double mag = 2.0 / std::numbers::pi * sign * scale * std::exp(-2.0 * r * r) *
                       laguerre(n, k, 4.0 * r * r);
    return std::polar(1.0, k * theta) * mag;
}

namespace {

// Full double sum sum_{n,m} rho_nm W_mn at r e^{i theta}.
Complex wigner_point(const Matrix &rho, double r, double theta) {
    const int d = static_cast<int>(rho.rows());
    const double x = 4.0 * r * r;
    const double base = 2.0 / std::numbers::pi * std::exp(-2.0 * r * r);
    Complex total = 0.0;
    double lead = 1.0; // (2r)^k / sqrt(k!)
    for (int k = 0; k < d; ++k) {
        if (k > 0)
            lead *= 2.0 * r / std::sqrt(static_cast<double>(k));
        const Complex rot = std::polar(1.0, k * theta);
        double ratio = lead; // sqrt(n!/(n+k)!) (2r)^k at n = 0
        double lag_prev = 0.0;
        double lag = 1.0;
        Complex up = 0.0;
        Complex down = 0.0;
        for (int n = 0; n + k < d; ++n) {
            if (n == 1) {
                lag_prev = lag;
                lag = 1.0 + k - x;
            } else if (n > 1) {
                const double next =
                    ((2.0 * (n - 1) + 1.0 + k - x) * lag - (n - 1 + k) * lag_prev) / n;
                lag_prev = lag;
                lag = next;
            }
            const double c = ((n % 2 == 0) ? 1.0 : -1.0) * ratio * lag;
            up += rho(n, n + k) * c;
            if (k > 0)
                down += rho(n + k, n) * c;
            ratio *= std::sqrt((n + 1.0) / (n + k + 1.0));
        }
        total += k == 0 ? up : up * rot + down * std::conj(rot);
    }
    return base * total;
}

std::vector<double> trapezoid(int count, double spacing) {
    std::vector<double> w(count, spacing);
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

constexpr double kImagLimit = 1e-10;

} // namespace

double PolarGrid::theta(int j) const { return 2.0 * std::numbers::pi * j / n_theta; }

void validate_grid(const WignerGrid &grid) {
    if (const auto *c = std::get_if<CartesianGrid>(&grid)) {
        if (c->n_x < 2 || c->n_y < 2)
            throw std::invalid_argument("Cartesian Wigner grid needs >= 2 points per axis");
        if (!(c->x_max > c->x_min) || !(c->y_max > c->y_min))
            throw std::invalid_argument("Cartesian Wigner grid needs positive extents");
    } else {
        const auto &p = std::get<PolarGrid>(grid);
        if (p.n_r < 2 || p.n_theta < 2)
            throw std::invalid_argument("polar Wigner grid needs >= 2 points per axis");
        if (!(p.r_max > 0.0))
            throw std::invalid_argument("polar Wigner grid needs r_max > 0");
    }
}

double wigner_at(const DensityMatrix &rho, double x, double y) {
    return wigner_point(rho.elements, std::hypot(x, y), std::atan2(y, x)).real();
}

WignerField wigner(const DensityMatrix &rho, const WignerGrid &grid) {
    validate_grid(grid);
    WignerField field;
    field.grid = grid;
    double residue = 0.0;

    if (const auto *c = std::get_if<CartesianGrid>(&grid)) {
        field.values.resize(c->n_y, c->n_x);
        for (int j = 0; j < c->n_y; ++j) {
            for (int i = 0; i < c->n_x; ++i) {
                const double x = c->x(i), y = c->y(j);
                const Complex w = wigner_point(rho.elements, std::hypot(x, y), std::atan2(y, x));
                field.values(j, i) = w.real();
                residue = std::max(residue, std::abs(w.imag()));
            }
        }
        const auto wx = trapezoid(c->n_x, (c->x_max - c->x_min) / (c->n_x - 1));
        const auto wy = trapezoid(c->n_y, (c->y_max - c->y_min) / (c->n_y - 1));
        double sum = 0.0;
        for (int j = 0; j < c->n_y; ++j)
            for (int i = 0; i < c->n_x; ++i)
                sum += wy[j] * wx[i] * field.values(j, i);
        field.integral = sum;
    } else {
        const auto &p = std::get<PolarGrid>(grid);
        field.values.resize(p.n_r, p.n_theta);
        for (int k = 0; k < p.n_r; ++k) {
            for (int j = 0; j < p.n_theta; ++j) {
                const Complex w = wigner_point(rho.elements, p.r(k), p.theta(j));
                field.values(k, j) = w.real();
                residue = std::max(residue, std::abs(w.imag()));
            }
        }
        const auto wr = trapezoid(p.n_r, p.r_max / (p.n_r - 1));
        const double dtheta = 2.0 * std::numbers::pi / p.n_theta;
        double sum = 0.0;
        for (int k = 0; k < p.n_r; ++k)
            for (int j = 0; j < p.n_theta; ++j)
                sum += wr[k] * p.r(k) * dtheta * field.values(k, j);
        field.integral = sum;
    }

    if (residue > kImagLimit)
        throw std::runtime_error(fmt::format(
            "Wigner field has imaginary residue {:.3e}; density matrix is not Hermitian", residue));
    field.max_imag_residue = residue;
    field.min_value = field.values.minCoeff();
    return field;
}

double symmetry_defect(const WignerField &field) {
    const Eigen::MatrixXd &v = field.values;
    double defect = 0.0;
    if (const auto *c = std::get_if<CartesianGrid>(&field.grid)) {
        const double tol = 1e-12 * std::max({1.0, std::abs(c->x_max), std::abs(c->y_max)});
        if (std::abs(c->x_min + c->x_max) > tol || std::abs(c->y_min + c->y_max) > tol)
            throw std::invalid_argument(
                "symmetry_defect: Cartesian grid is not symmetric about the origin");
        for (int j = 0; j < c->n_y; ++j)
            for (int i = 0; i < c->n_x; ++i)
                defect = std::max(defect, std::abs(v(j, i) - v(c->n_y - 1 - j, c->n_x - 1 - i)));
        return defect;
    }
    const auto &p = std::get<PolarGrid>(field.grid);
    if (p.n_theta % 2 != 0)
        throw std::invalid_argument("symmetry_defect: polar grid needs an even n_theta");
    const int half = p.n_theta / 2;
    for (int k = 0; k < p.n_r; ++k)
        for (int j = 0; j < p.n_theta; ++j)
            defect = std::max(defect, std::abs(v(k, (j + half) % p.n_theta) - v(k, j)));
    return defect;
}

double negativity_volume(const WignerField &field) {
    double sum = 0.0;
    if (const auto *c = std::get_if<CartesianGrid>(&field.grid)) {
        const auto wx = trapezoid(c->n_x, (c->x_max - c->x_min) / (c->n_x - 1));
        const auto wy = trapezoid(c->n_y, (c->y_max - c->y_min) / (c->n_y - 1));
        for (int j = 0; j < c->n_y; ++j)
            for (int i = 0; i < c->n_x; ++i)
                sum += wy[j] * wx[i] * std::max(0.0, -field.values(j, i));
        return sum;
    }
    const auto &p = std::get<PolarGrid>(field.grid);
    const auto wr = trapezoid(p.n_r, p.r_max / (p.n_r - 1));
    const double dtheta = 2.0 * std::numbers::pi / p.n_theta;
    for (int k = 0; k < p.n_r; ++k)
        for (int j = 0; j < p.n_theta; ++j)
            sum += wr[k] * p.r(k) * dtheta * std::max(0.0, -field.values(k, j));
    return sum;
}

std::vector<PhasePoint> local_maxima(const WignerField &field, double rel_threshold) {
    const auto *c = std::get_if<CartesianGrid>(&field.grid);
    if (!c)
        throw std::invalid_argument("local_maxima: needs a Cartesian grid");
    const Eigen::MatrixXd &v = field.values;
    const double floor = rel_threshold * v.maxCoeff();
    std::vector<PhasePoint> peaks;
    for (int j = 1; j + 1 < c->n_y; ++j) {
        for (int i = 1; i + 1 < c->n_x; ++i) {
            const double w = v(j, i);
            if (w <= floor)
                continue;
            bool peak = true;
            for (int dj = -1; dj <= 1 && peak; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if ((di != 0 || dj != 0) && !(w > v(j + dj, i + di))) {
                        peak = false;
                        break;
                    }
            if (peak)
                peaks.push_back({c->x(i), c->y(j), w});
        }
    }
    return peaks;
}

} // namespace pdao
