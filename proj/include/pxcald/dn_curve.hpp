#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pxcald/forward.hpp"
#include "pxcald/profiles.hpp"

namespace pxcald {

struct DNSample {
    double m;
    double lambda;
};

/// Multiplicative measurement noise Lambda -> Lambda (1 + level * xi), xi ~ N(0, 1).
struct NoiseModel {
    double level = 0.0;
    std::uint64_t seed = 0;

    /// Deterministic draw tied to (seed, m) so that repeated or concurrent
    /// queries at the same m see the same perturbation.
    double factor(double m) const;
};

/// Queryable Dirichlet-to-Neumann map m -> Lambda(m), m = B - A >= 0.
///
/// Exact mode holds the profile pair and evaluates the forward problem on
/// every query. Tabulated mode interpolates measured samples with a monotone
/// piecewise cubic in (log m, log Lambda) and refuses to extrapolate.
class DNCurve {
public:
    enum class Mode { Exact, Tabulated };

    /// root_tol is passed to solve_flux; 0 resolves K to machine precision.
    static DNCurve exact(CommonGrid grid, double root_tol = 0.0);
    /// Samples sorted by strictly increasing m > 0 with positive lambda.
    /// An optional leading (0, 0) row is accepted and dropped.
    static DNCurve tabulated(std::vector<DNSample> samples);

    Mode mode() const noexcept { return mode_; }
    double operator()(double m) const;

    /// Exact mode only.
    const CommonGrid& grid() const;
    FluxConstant flux(double m) const;
    double root_tol() const noexcept { return root_tol_; }

    /// Tabulated mode: the stored samples. Valid query range is [m_min, m_max] and m = 0.
    std::span<const DNSample> samples() const noexcept { return samples_; }
    double m_min() const;
    double m_max() const;

    const std::optional<NoiseModel>& noise() const noexcept { return noise_; }

private:
    DNCurve() = default;
    void build_interpolant();
    double interpolate(double m) const;

    Mode mode_ = Mode::Exact;
    std::optional<CommonGrid> grid_;
    double root_tol_ = 0.0;
    std::vector<DNSample> samples_;
    std::vector<double> log_m_;
    std::vector<double> log_l_;
    std::vector<double> slope_;
    std::optional<NoiseModel> noise_;

    friend DNCurve add_noise(const DNCurve& curve, double level, std::uint64_t seed);
};

/// Lambda_gamma(m).
inline double dn_map(double m, const DNCurve& curve) { return curve(m); }

/// Level 0 returns the curve unchanged. Tabulated curves get one draw per
/// stored sample; exact curves perturb every query through NoiseModel.
DNCurve add_noise(const DNCurve& curve, double level, std::uint64_t seed);

/// CSV with header "m,lambda", ascending in m, 17 significant digits.
void write_dn_csv(std::ostream& os, std::span<const DNSample> samples);
std::vector<DNSample> read_dn_csv(std::istream& is);

}  // namespace pxcald
