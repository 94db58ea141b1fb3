#include "pxcald/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pxcald {

double dirichlet_gap(double K, const CommonGrid& grid) {
    if (!(K >= 0.0)) throw DomainError("flux constant must be nonnegative");
    if (K == 0.0) return 0.0;
    double m = 0.0;
    for (const Cell& c : grid.cells()) m += std::pow(K / c.gamma, c.g()) * c.length();
    return m;
}

namespace {

constexpr int kMaxBracketSteps = 4096;
constexpr int kMaxRefineSteps = 400;

struct Sample {
    double K;
    double resid;  // log(m(K) / m)
};

}  // namespace

FluxConstant solve_flux(double m, const CommonGrid& grid, double tol) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("Dirichlet gap must be finite and nonnegative");
    if (!(tol >= 0.0)) throw DomainError("tolerance must be nonnegative");
    if (m == 0.0) return {0.0, 0.0};

    const double log_m = std::log(m);
    auto eval = [&](double K) { return Sample{K, std::log(dirichlet_gap(K, grid)) - log_m}; };

    // geometric bracket from K = 1, factor 2 either way
    Sample lo = eval(1.0);
    Sample hi = lo;
    int steps = 0;
    if (lo.resid < 0.0) {
        while (hi.resid < 0.0) {
            lo = hi;
            hi = eval(hi.K * 2.0);
            if (++steps > kMaxBracketSteps || !std::isfinite(hi.K)) throw BracketError("solve_flux: no upper bracket");
        }
    } else {
        while (lo.resid > 0.0) {
            hi = lo;
            lo = eval(lo.K * 0.5);
            if (++steps > kMaxBracketSteps || lo.K == 0.0) throw BracketError("solve_flux: no lower bracket");
        }
    }
    if (lo.resid == 0.0) return {lo.K, m};
    if (hi.resid == 0.0) return {hi.K, m};

    // Secant steps in (log K, log m), safeguarded by geometric bisection.
    Sample prev = lo;
    Sample cur = hi;
    double last_width = hi.K - lo.K;
    for (int it = 0; it < kMaxRefineSteps; ++it) {
        double cand = std::numeric_limits<double>::quiet_NaN();
        if (cur.resid != prev.resid) {
            const double x0 = std::log(prev.K);
            const double x1 = std::log(cur.K);
            cand = std::exp(x1 - cur.resid * (x1 - x0) / (cur.resid - prev.resid));
        }
        const double width = hi.K - lo.K;
        const bool stalled = width > 0.5 * last_width;
        if (!(cand > lo.K && cand < hi.K) || (stalled && it % 2 == 1)) {
            cand = std::sqrt(lo.K) * std::sqrt(hi.K);
            if (!(cand > lo.K && cand < hi.K)) cand = lo.K + 0.5 * width;
        }
        if (!(cand > lo.K && cand < hi.K)) break;  // bracket is two adjacent doubles
        last_width = width;

        const Sample s = eval(cand);
        prev = cur;
        cur = s;
        if (s.resid == 0.0) return {s.K, m};
        (s.resid < 0.0 ? lo : hi) = s;
        if (std::abs(std::expm1(s.resid)) <= tol) return {s.K, m};
    }
    return {std::abs(lo.resid) <= std::abs(hi.resid) ? lo.K : hi.K, m};
}

double potential(double x, const FluxConstant& flux, const CommonGrid& grid, double A) {
    if (!grid.interval().contains(x)) throw DomainError("potential evaluated outside the interval");
    double u = A;
    for (const Cell& c : grid.cells()) {
        if (x <= c.left) break;
        const double slope = flux.K == 0.0 ? 0.0 : std::pow(flux.K / c.gamma, c.g());
        u += slope * (std::min(x, c.right) - c.left);
    }
    return u;
}

double dn_map_of_K(double K, const CommonGrid& grid) {
    if (!(K >= 0.0)) throw DomainError("flux constant must be nonnegative");
    return integrate_cellwise(grid, [K](double p, double gamma, double len) {
        const double g = 1.0 / (p - 1.0);
        return std::pow(gamma, -g) * std::pow(K, p * g) * len;
    });
}

double unit_flux(double m, const ExponentProfile& p, double tol) {
    return solve_flux(m, CommonGrid::unit_conductivity(p), tol).K;
}

std::vector<double> interior_power_data(std::span<const double> r, const FluxConstant& flux,
                                        const CommonGrid& grid) {
    if (r.size() != grid.size()) throw DomainError("interior exponent must have one value per grid cell");
    std::vector<double> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Cell& c = grid[i];
        if (!(r[i] >= 0.0)) throw DomainError("interior exponent must be nonnegative");
        out.push_back(std::pow(c.gamma, (c.p - r[i] - 1.0) * c.g()) * std::pow(flux.K, r[i] * c.g()));
    }
    return out;
}

std::vector<double> recover_from_interior(std::span<const double> data, std::span<const double> r,
                                          const FluxConstant& flux, const CommonGrid& grid, double eps) {
    if (r.size() != grid.size() || data.size() != grid.size()) {
        throw DomainError("interior data must have one value per grid cell");
    }
    if (!(flux.K > 0.0)) throw DomainError("interior recovery needs K > 0");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i].p - r[i] - 1.0) < eps) bad.push_back(i);
    }
    if (!bad.empty()) {
        std::string list;
        for (std::size_t i : bad) list += (list.empty() ? "" : ",") + std::to_string(i);
        throw NonRecoverableCellsError("p - r = 1 on cells [" + list + "]", std::move(bad));
    }
    std::vector<double> gamma;
    gamma.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Cell& c = grid[i];
        if (!(data[i] > 0.0)) throw DomainError("interior data must be positive");
        const double scaled = data[i] / std::pow(flux.K, r[i] * c.g());
        gamma.push_back(std::pow(scaled, (c.p - 1.0) / (c.p - r[i] - 1.0)));
    }
    return gamma;
}

}  // namespace pxcald
