#pragma once

#include <span>
#include <vector>

#include "pxcald/dn_curve.hpp"

namespace pxcald {

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Lambda(m) for every m, one query per thread-chunk (OpenMP). Curve queries
/// are read-only, so the result is identical to sample_curve_serial.
std::vector<DNSample> sample_curve(const DNCurve& curve, std::span<const double> ms);

/// Reference loop kept for tests and the benchmark.
std::vector<DNSample> sample_curve_serial(const DNCurve& curve, std::span<const double> ms);

/// K_m for every m on a fixed grid.
std::vector<FluxConstant> solve_flux_batch(std::span<const double> ms, const CommonGrid& grid, double tol);
std::vector<FluxConstant> solve_flux_batch_serial(std::span<const double> ms, const CommonGrid& grid,
                                                  double tol);

}  // namespace pxcald
