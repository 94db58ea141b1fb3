#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pxcald/dn_curve.hpp"
#include "pxcald/profiles.hpp"
#include "pxcald/sigma_projection.hpp"

namespace pxcald {

/// mu_n = \int f g^n dx, n = 0..N, with f = gamma^{-1/(p-1)} and g = 1/(p-1).
struct MomentVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t n) const { return values[n]; }
    /// mu_0 min(g)^n <= mu_n <= mu_0 max(g)^n, within rel_tol.
    bool within_bounds(double g_min, double g_max, double rel_tol = 1e-9) const;
};

// ---------------------------------------------------------------------------
// Fixed point and extremal limits
// ---------------------------------------------------------------------------

/// The unique k > 0 with Lambda(k) = k, found by half-interval search.
/// The bracket starts at [bracket_hi/2, bracket_hi] and grows by factors of 2.
/// tol = 0 bisects until the bracket is two adjacent doubles; tol > 0 stops
/// once |Lambda(k) - k| <= tol.
double fixed_point(const DNCurve& curve, double tol = 0.0, double bracket_hi = 1.0);

enum class ExtremalSide {
    MaxQ,  // Q+ : where p = p_min, m -> infinity
    MinQ,  // Q- : where p = p_max, m -> 0
};

struct WeightBounds {
    double inf_f;
    double sup_f;
};

struct ExtremalStep {
    double m;
    double unit_flux;
    double scaled_value;
    double recovered_average;
};

struct ExtremalEstimate {
    ExtremalSide side;
    double level_p;          // p_min or p_max
    double level_measure;    // |Q+| or |Q-|
    double m_used;
    double scaled_value;     // Kbar^{-q} Lambda(m) / |Q|
    double recovered_average;  // estimate of the mean of f over Q
    double diagnostic_bound;   // c_m >= max(K/Kbar, Kbar/K)
    std::vector<ExtremalStep> history;
};

/// 10^1..10^6 for MaxQ, 10^-1..10^-6 for MinQ.
std::vector<double> default_schedule(ExtremalSide side);

/// Evaluates the scaled DN map along a monotone schedule. When bounds on f
/// are not supplied they come from the profile grid (exact curves) or from
/// the recovered averages (tabulated curves).
ExtremalEstimate extremal_recovery(const DNCurve& curve, const ExponentProfile& p, ExtremalSide side,
                                   std::span<const double> m_schedule,
                                   std::optional<WeightBounds> f_bounds = std::nullopt);

// ---------------------------------------------------------------------------
// Derivatives
// ---------------------------------------------------------------------------

struct FiniteDifferenceScheme {
    double h0_rel = 1e-2;  // initial step as a fraction of k
    int levels = 3;        // Richardson levels (step halving)
    int max_order = 8;
};

struct DerivativeEstimate {
    std::vector<double> values;  // d^n Lambda / dm^n at k, n = 0..N
    std::vector<double> error;   // |last two Richardson diagonal entries|; error[0] = 0
    double step = 0.0;           // h0
};

/// Central finite differences of Lambda(m) at m = k with Richardson extrapolation.
DerivativeEstimate dn_derivatives(const DNCurve& curve, double k, int N, const FiniteDifferenceScheme& scheme = {});

struct OracleDerivatives {
    std::vector<double> m_jet;       // d^n m / dK^n at K = 1, n = 0..N
    std::vector<double> lambda_jet;  // d^n Lambda / dK^n at K = 1, n = 0..N
};

/// Exact cell sums of the product formulas; needs gamma, so testing/simulation only.
OracleDerivatives dn_oracle_derivatives(const CommonGrid& grid, int N);

/// d^n K/dm^n, n = 1..N, from d^j m/dK^j (index j of m_jet, j = 1..N).
/// Index 0 of the result is unused and set to 0.
std::vector<double> inverse_derivatives(std::span<const double> m_jet, int N);

/// n-th derivative of outer(inner(m)) from the jets (indices 1..n used).
double faa_di_bruno(std::span<const double> outer, std::span<const double> inner, int n);

/// Triangular recovery of mu_0..mu_N from dLambda/dm jet at the fixed point.
MomentVector extract_moments(std::span<const double> dlambda_dm, double mu0, int N);

// ---------------------------------------------------------------------------
// Level averages and reconstruction
// ---------------------------------------------------------------------------

struct LevelAverages {
    std::vector<double> integrals;  // |L| * mean_L(f)
    std::vector<double> averages;   // mean_L(f)
    std::vector<double> residuals;  // relative moment residual per used moment
    double condition = 0.0;         // 2-norm condition of the square Vandermonde block
    bool least_squares = false;
    std::vector<std::string> warnings;
};

/// Solves mu_n = sum_l g_l^n |L_l| mean_l(f). Square systems use
/// Bjorck-Pereyra elimination; extra moments switch to scaled least squares.
LevelAverages moments_to_level_averages(const MomentVector& mu, const LevelSetPartition& part,
                                        double condition_warning = 1e12);

enum class DerivativeSource { Measured, Oracle };

struct ReconstructOptions {
    DerivativeSource mode = DerivativeSource::Measured;
    FiniteDifferenceScheme scheme{};
    double fixed_point_tol = 0.0;
    double merge_tol = 0.0;
    double condition_warning = 1e12;
};

struct ReconstructionReport {
    DerivativeSource mode;
    int order;
    double fixed_point;
    std::vector<double> dlambda_dm;
    std::vector<double> derivative_error;  // empty in oracle mode
    MomentVector mu;
    LevelAverages levels;
    ProjectedFunction reconstructed;  // P~(gamma) per level of p
};

/// fixed point -> derivatives -> moments -> level averages -> P~(gamma).
/// Oracle mode needs an exact curve (it reads the profile grid).
ReconstructionReport reconstruct(const DNCurve& curve, const ExponentProfile& p, int N,
                                 const ReconstructOptions& options = {});

}  // namespace pxcald
