#pragma once

#include <span>
#include <vector>

#include "pxcald/profiles.hpp"

namespace pxcald {

/// Flux constant K = gamma (u')^{p-1} for the Dirichlet gap m = B - A.
struct FluxConstant {
    double K = 0.0;
    double m = 0.0;
};

/// m(K) = \int_a^b (K / gamma)^{1/(p-1)} dx.
double dirichlet_gap(double K, const CommonGrid& grid);

/// Inverts K -> m(K). Iterates until |m(K) - m| <= tol * m or the bracket
/// collapses to adjacent doubles, so tol = 0 asks for machine precision.
FluxConstant solve_flux(double m, const CommonGrid& grid, double tol = 1e-12);

/// u(x) = A + \int_a^x (K / gamma)^{1/(p-1)} ds. Piecewise linear on the grid.
double potential(double x, const FluxConstant& flux, const CommonGrid& grid, double A = 0.0);

/// Lambda as a function of K: \int f K^{q} dx.
double dn_map_of_K(double K, const CommonGrid& grid);

/// Flux constant for unit conductivity; needs only p.
double unit_flux(double m, const ExponentProfile& p, double tol = 1e-12);

/// gamma |u'|^{r} per grid cell = gamma^{(p-r-1)/(p-1)} K^{r/(p-1)}.
std::vector<double> interior_power_data(std::span<const double> r, const FluxConstant& flux,
                                        const CommonGrid& grid);

/// Inverts interior_power_data cell by cell. Cells with |p - r - 1| < eps carry
/// no information about gamma; they are reported together in one error.
std::vector<double> recover_from_interior(std::span<const double> data, std::span<const double> r,
                                          const FluxConstant& flux, const CommonGrid& grid,
                                          double eps = 1e-8);

}  // namespace pxcald
