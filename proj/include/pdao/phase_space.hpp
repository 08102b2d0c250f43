#pragma once

#include <variant>
#include <vector>

#include "pdao/fock.hpp"

namespace pdao {

std::vector<double> populations(const DensityMatrix &rho);
double mean_excitation(const DensityMatrix &rho);
/// <psi|rho|psi>. Throws std::invalid_argument for an unnormalized psi.
double fidelity_pure(const DensityMatrix &rho, const PureState &psi);

/// Generalized Laguerre polynomial L_n^(alpha)(x) by upward recurrence.
double laguerre(int n, double alpha, double x);

/// Wigner kernel of |n><m| at alpha = r e^{i theta}, normalised so that the
/// vacuum peaks at 2/pi and integrates to 1 over d^2alpha:
///   m >= n: (2/pi)(-1)^n sqrt(n!/m!) e^{i(m-n)theta} (2r)^{m-n} e^{-2r^2} L_n^(m-n)(4r^2)
///   m <  n: complex conjugate of the swapped kernel.
/// Throws std::invalid_argument when m or n lies outside the basis.
Complex wigner_fock_coeff(const FockBasis &basis, int m, int n, double r, double theta);

struct CartesianGrid {
    double x_min = -5.0, x_max = 5.0;
    double y_min = -5.0, y_max = 5.0;
    int n_x = 201, n_y = 201;

    double x(int i) const { return x_min + (x_max - x_min) * i / (n_x - 1); }
    double y(int j) const { return y_min + (y_max - y_min) * j / (n_y - 1); }
};

/// r_k = r_max k / (n_r - 1), theta_j = 2 pi j / n_theta.
struct PolarGrid {
    double r_max = 5.0;
    int n_r = 101, n_theta = 128;

    double r(int k) const { return r_max * k / (n_r - 1); }
    double theta(int j) const;
};

using WignerGrid = std::variant<CartesianGrid, PolarGrid>;

/// Throws std::invalid_argument unless every axis has >= 2 points and a
/// positive extent.
void validate_grid(const WignerGrid &grid);

inline CartesianGrid default_wigner_grid() { return {}; }
inline PolarGrid symmetry_test_grid() { return {}; }

/// Samples on a grid. Cartesian: values(j, i) at (x_i, y_j), rows follow y.
/// Polar: values(k, j) at (r_k, theta_j).
struct WignerField {
    WignerGrid grid;
    Eigen::MatrixXd values;
    double min_value = 0.0;
    double integral = 0.0;
    double max_imag_residue = 0.0;
};

/// W(x + iy) at a single phase-space point.
double wigner_at(const DensityMatrix &rho, double x, double y);

/// Throws std::runtime_error if the field has an imaginary residue above 1e-10.
WignerField wigner(const DensityMatrix &rho, const WignerGrid &grid);

/// max |W(r, theta + pi) - W(r, theta)|. Polar grids need an even n_theta;
/// Cartesian grids must be symmetric about the origin.
double symmetry_defect(const WignerField &field);

/// Quadrature of max(0, -W) over the grid.
double negativity_volume(const WignerField &field);

struct PhasePoint {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
};

/// Strict interior local maxima of a Cartesian field (larger than all eight
/// neighbours) whose value exceeds rel_threshold * max W.
std::vector<PhasePoint> local_maxima(const WignerField &field, double rel_threshold = 0.1);

} // namespace pdao
