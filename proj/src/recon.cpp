#include "pxcald/recon.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "pxcald/combinatorics.hpp"
#include "pxcald/sampling.hpp"

namespace pxcald {

bool MomentVector::within_bounds(double g_min, double g_max, double rel_tol) const {
    if (values.empty() || !(values[0] > 0.0)) return false;
    for (std::size_t n = 0; n < values.size(); ++n) {
        const double lo = values[0] * std::pow(g_min, static_cast<double>(n));
        const double hi = values[0] * std::pow(g_max, static_cast<double>(n));
        if (values[n] < lo * (1.0 - rel_tol) || values[n] > hi * (1.0 + rel_tol)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

double fixed_point(const DNCurve& curve, double tol, double bracket_hi) {
    if (!(tol >= 0.0)) throw DomainError("fixed_point tolerance must be nonnegative");
    if (!(bracket_hi > 0.0)) throw DomainError("fixed_point bracket must be positive");
    constexpr int kGrowthCap = 1100;

    const double lo_limit = curve.m_min();
    const double hi_limit = curve.m_max();
    auto excess = [&](double m) { return curve(m) - m; };

    double hi = std::clamp(bracket_hi, lo_limit, hi_limit);
    double f_hi = excess(hi);
    double lo = hi;
    double f_lo = f_hi;
    int steps = 0;
    if (f_hi < 0.0) {
        while (f_hi < 0.0) {
            if (hi >= hi_limit || ++steps > kGrowthCap) throw BracketError("fixed_point: Lambda(m) < m on the whole range");
            lo = hi;
            f_lo = f_hi;
            hi = std::min(hi * 2.0, hi_limit);
            f_hi = excess(hi);
        }
    } else {
        while (f_lo > 0.0) {
            if (lo <= lo_limit || ++steps > kGrowthCap) throw BracketError("fixed_point: Lambda(m) > m on the whole range");
            hi = lo;
            f_hi = f_lo;
            lo = std::max(lo * 0.5, lo_limit);
            f_lo = excess(lo);
        }
    }
    // endpoint hits are returned as-is
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;

    for (;;) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        const double f_mid = excess(mid);
        if (f_mid == 0.0 || (tol > 0.0 && std::abs(f_mid) <= tol)) return mid;
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return -f_lo <= f_hi ? lo : hi;
}

std::vector<double> default_schedule(ExtremalSide side) {
    std::vector<double> out;
    for (int e = 1; e <= 6; ++e) out.push_back(std::pow(10.0, side == ExtremalSide::MaxQ ? e : -e));
    return out;
}

ExtremalEstimate extremal_recovery(const DNCurve& curve, const ExponentProfile& p, ExtremalSide side,
                                   std::span<const double> m_schedule, std::optional<WeightBounds> f_bounds) {
    if (m_schedule.empty()) throw DomainError("extremal schedule is empty");
    for (std::size_t i = 0; i < m_schedule.size(); ++i) {
        if (!(m_schedule[i] > 0.0)) throw DomainError("extremal schedule entries must be positive");
        if (i > 0) {
            const bool ok = side == ExtremalSide::MaxQ ? m_schedule[i] > m_schedule[i - 1]
                                                       : m_schedule[i] < m_schedule[i - 1];
            if (!ok) throw DomainError("extremal schedule must be monotone toward the limit");
        }
    }
    for (double m : m_schedule) {
        if (m < curve.m_min() || m > curve.m_max()) {
            throw RangeError("extremal schedule leaves the tabulated DN range at m = " + std::to_string(m));
        }
    }

    const LevelSetPartition part = level_sets(p);
    const Level& level = part[side == ExtremalSide::MaxQ ? part.max_q_level() : part.min_q_level()];
    const CommonGrid unit = CommonGrid::unit_conductivity(p);

    const auto lambdas = sample_curve(curve, m_schedule);
    ExtremalEstimate est{side, level.p, level.measure, 0.0, 0.0, 0.0, 0.0, {}};
    for (std::size_t i = 0; i < m_schedule.size(); ++i) {
        const double m = m_schedule[i];
        const double kbar = solve_flux(m, unit, 0.0).K;
        const double scaled = std::exp(std::log(lambdas[i].lambda) - level.q * std::log(kbar) - std::log(level.measure));
        const double avg = std::pow(scaled, -level.g);
        est.history.push_back({m, kbar, scaled, avg});
    }
    const ExtremalStep& last = est.history.back();
    est.m_used = last.m;
    est.scaled_value = last.scaled_value;
    est.recovered_average = last.recovered_average;

    WeightBounds bounds;
    if (f_bounds) {
        bounds = *f_bounds;
    } else if (curve.mode() == DNCurve::Mode::Exact) {
        const auto f = curve.grid().transformed_weight();
        const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
        bounds = {*lo, *hi};
    } else {
        bounds = {HUGE_VAL, 0.0};
        for (const auto& s : est.history) {
            bounds.inf_f = std::min(bounds.inf_f, s.recovered_average);
            bounds.sup_f = std::max(bounds.sup_f, s.recovered_average);
        }
    }
    // worst case p* = p_max of the mean-value bound
    est.diagnostic_bound =
        std::pow(std::max(1.0, bounds.sup_f) / std::min(1.0, bounds.inf_f), p.p_max() - 1.0);
    return est;
}

// ---------------------------------------------------------------------------

DerivativeEstimate dn_derivatives(const DNCurve& curve, double k, int N, const FiniteDifferenceScheme& scheme) {
    if (N < 1) throw DomainError("derivative order must be >= 1");
    if (N > scheme.max_order) {
        throw UnsupportedOrderError("derivative order " + std::to_string(N) + " exceeds maximum " +
                                    std::to_string(scheme.max_order));
    }
    if (!(k > 0.0)) throw DomainError("derivative base point must be positive");
    if (scheme.levels < 1 || !(scheme.h0_rel > 0.0)) throw DomainError("invalid finite-difference scheme");
    const double h0 = scheme.h0_rel * k;
    if (!(k - 0.5 * N * h0 > 0.0)) throw DomainError("finite-difference stencil reaches m <= 0");

    // Stencil points for order n at step h: k + (n/2 - i) h, i = 0..n.
    auto point = [&](int n, int i, double h) { return k + (0.5 * n - i) * h; };
    std::map<double, double> cache;
    for (int lev = 0; lev < scheme.levels; ++lev) {
        const double h = std::ldexp(h0, -lev);
        for (int n = 1; n <= N; ++n) {
            for (int i = 0; i <= n; ++i) cache.emplace(point(n, i, h), 0.0);
        }
    }
    cache.emplace(k, 0.0);
    std::vector<double> ms;
    ms.reserve(cache.size());
    for (const auto& kv : cache) ms.push_back(kv.first);
    const auto samples = sample_curve(curve, ms);
    for (const auto& s : samples) cache[s.m] = s.lambda;

    DerivativeEstimate out;
    out.step = h0;
    out.values.assign(static_cast<std::size_t>(N) + 1, 0.0);
    out.error.assign(static_cast<std::size_t>(N) + 1, 0.0);
    out.values[0] = cache.at(k);

    const int L = scheme.levels;
    for (int n = 1; n <= N; ++n) {
        std::vector<std::vector<double>> table(static_cast<std::size_t>(L));
        for (int lev = 0; lev < L; ++lev) {
            const double h = std::ldexp(h0, -lev);
            double sum = 0.0;
            double binom = 1.0;
            for (int i = 0; i <= n; ++i) {
                sum += (i % 2 == 0 ? 1.0 : -1.0) * binom * cache.at(point(n, i, h));
                binom = binom * (n - i) / (i + 1);
            }
            auto& row = table[static_cast<std::size_t>(lev)];
            row.push_back(sum / std::pow(h, n));
            double factor = 1.0;
            for (int j = 1; j <= lev; ++j) {
                factor *= 4.0;
                const double prev = table[static_cast<std::size_t>(lev - 1)][static_cast<std::size_t>(j - 1)];
                row.push_back(row[static_cast<std::size_t>(j - 1)] + (row[static_cast<std::size_t>(j - 1)] - prev) / (factor - 1.0));
            }
        }
        const auto& last = table.back();
        out.values[static_cast<std::size_t>(n)] = last.back();
        out.error[static_cast<std::size_t>(n)] =
            L > 1 ? std::abs(last.back() - table[static_cast<std::size_t>(L - 2)].back()) : HUGE_VAL;
    }
    return out;
}

OracleDerivatives dn_oracle_derivatives(const CommonGrid& grid, int N) {
    if (N < 0) throw DomainError("derivative order must be >= 0");
    OracleDerivatives out;
    out.m_jet.assign(static_cast<std::size_t>(N) + 1, 0.0);
    out.lambda_jet.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (const Cell& c : grid.cells()) {
        const double w = c.f() * c.length();
        double ff_g = 1.0;
        double ff_q = 1.0;
        for (int j = 0; j <= N; ++j) {
            out.m_jet[static_cast<std::size_t>(j)] += w * ff_g;
            out.lambda_jet[static_cast<std::size_t>(j)] += w * ff_q;
            ff_g *= c.g() - j;
            ff_q *= c.q() - j;
        }
    }
    return out;
}

std::vector<double> inverse_derivatives(std::span<const double> m_jet, int N) {
    if (N < 1) throw DomainError("inverse derivative order must be >= 1");
    if (m_jet.size() < static_cast<std::size_t>(N) + 1) throw DomainError("m jet shorter than requested order");
    const double m1 = m_jet[1];
    if (m1 == 0.0) throw DomainError("dm/dK vanishes; inverse is not differentiable");

    std::vector<double> out(static_cast<std::size_t>(N) + 1, 0.0);
    for (int n = 1; n <= N; ++n) {
        double sum = 0.0;
        for (const IndexTuple& t : inverse_tuples(n)) {
            const int s1 = t.s[0];
            std::int64_t num = factorial(2 * n - s1 - 2);
            std::int64_t den = 1;
            for (int j = 2; j <= n; ++j) {
                const int sj = t.s[static_cast<std::size_t>(j - 1)];
                for (int r = 0; r < sj; ++r) den *= factorial(j);
                den *= factorial(sj);
            }
            double term = (s1 % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(num) / static_cast<double>(den);
            for (int j = 1; j <= n; ++j) {
                const int sj = t.s[static_cast<std::size_t>(j - 1)];
                if (sj > 0) term *= std::pow(m_jet[static_cast<std::size_t>(j)], sj);
            }
            sum += term;
        }
        const double sign = (n - 1) % 2 == 0 ? 1.0 : -1.0;
        out[static_cast<std::size_t>(n)] = sign * sum / std::pow(m1, 2 * n - 1);
    }
    return out;
}

double faa_di_bruno(std::span<const double> outer, std::span<const double> inner, int n) {
    if (n < 1) throw DomainError("Faa di Bruno order must be >= 1");
    if (outer.size() < static_cast<std::size_t>(n) + 1 || inner.size() < static_cast<std::size_t>(n) + 1) {
        throw DomainError("jet shorter than requested order");
    }
    double sum = 0.0;
    for (const IndexTuple& t : fdb_tuples(n)) {
        std::int64_t coef = factorial(n);
        for (int kj : t.s) coef /= factorial(kj);
        double term = static_cast<double>(coef) * outer[static_cast<std::size_t>(t.count())];
        for (int j = 1; j <= n; ++j) {
            const int kj = t.s[static_cast<std::size_t>(j - 1)];
            if (kj > 0) term *= std::pow(inner[static_cast<std::size_t>(j)] / static_cast<double>(factorial(j)), kj);
        }
        sum += term;
    }
    return sum;
}

MomentVector extract_moments(std::span<const double> dlambda_dm, double mu0, int N) {
    if (N < 0) throw DomainError("moment order must be >= 0");
    if (dlambda_dm.size() < static_cast<std::size_t>(N) + 1) throw DomainError("derivative jet shorter than N");
    if (!(mu0 > 0.0)) throw DomainError("mu_0 must be positive");
    const auto n_max = static_cast<std::size_t>(N);

    // falling[n] = \int f prod_{l<n} (g - l) dx = d^n m / dK^n at K = 1
    std::vector<double> falling(n_max + 1, 0.0);
    falling[0] = mu0;
    if (N >= 1) {
        const double slope = dlambda_dm[1];
        if (!(slope > 1.0)) {
            throw InconsistentDataError("dLambda/dm at the fixed point is " + std::to_string(slope) +
                                        " <= 1, impossible for p > 1");
        }
        falling[1] = mu0 / (slope - 1.0);
    }
    for (std::size_t n = 2; n <= n_max; ++n) {
        // Everything but the unknown falling[n] is known; d^n Lambda/dm^n is
        // affine in it with slope -mu0 / falling[1]^{n+1}.
        std::vector<double> m_jet(falling.begin(), falling.begin() + static_cast<long>(n) + 1);
        m_jet[n] = 0.0;
        std::vector<double> lambda_jet(n + 1);
        lambda_jet[0] = m_jet[0];
        for (std::size_t j = 1; j <= n; ++j) lambda_jet[j] = m_jet[j] + static_cast<double>(j) * m_jet[j - 1];
        const auto k_jet = inverse_derivatives(m_jet, static_cast<int>(n));
        const double known = faa_di_bruno(lambda_jet, k_jet, static_cast<int>(n));
        const double slope = -mu0 / std::pow(falling[1], static_cast<double>(n + 1));
        falling[n] = (dlambda_dm[n] - known) / slope;
    }

    MomentVector mu;
    mu.values.assign(n_max + 1, 0.0);
    mu.values[0] = mu0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        double acc = falling[n];
        for (std::size_t j = 1; j < n; ++j) {
            acc -= static_cast<double>(stirling_first(static_cast<int>(n), static_cast<int>(j))) * mu.values[j];
        }
        mu.values[n] = acc;
    }
    return mu;
}

// ---------------------------------------------------------------------------

namespace {

// Solves sum_j x_j^i z_j = b_i, i = 0..n (dual Vandermonde system).
std::vector<double> bjorck_pereyra(std::span<const double> x, std::vector<double> b) {
    const std::size_t n = x.size() - 1;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = n; i > k; --i) b[i] -= x[k] * b[i - 1];
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t i = kk + 1; i <= n; ++i) b[i] /= x[i] - x[i - kk - 1];
        for (std::size_t i = kk; i < n; ++i) b[i] -= b[i + 1];
    }
    return b;
}

}  // namespace

LevelAverages moments_to_level_averages(const MomentVector& mu, const LevelSetPartition& part,
                                        double condition_warning) {
    const std::size_t L = part.size();
    if (mu.size() < L) {
        throw InsufficientMomentOrderError("partition has " + std::to_string(L) + " levels but only " +
                                           std::to_string(mu.size()) + " moments are available");
    }
    std::vector<double> nodes(L);
    for (std::size_t l = 0; l < L; ++l) nodes[l] = part[l].g;

    Eigen::MatrixXd square(L, L);
    for (std::size_t n = 0; n < L; ++n)
        for (std::size_t l = 0; l < L; ++l) square(n, l) = std::pow(nodes[l], static_cast<double>(n));
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(square);
    const auto sv = svd.singularValues();

    LevelAverages out;
    out.condition = sv(0) / sv(sv.size() - 1);
    if (!(out.condition <= condition_warning)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "Vandermonde condition estimate %.3e exceeds %.3e", out.condition,
                      condition_warning);
        out.warnings.emplace_back(buf);
    }

    const std::size_t used = mu.size();
    if (used == L) {
        out.integrals = bjorck_pereyra(nodes, mu.values);
    } else {
        out.least_squares = true;
        Eigen::MatrixXd A(used, L);
        Eigen::VectorXd b(used);
        for (std::size_t n = 0; n < used; ++n) {
            const double scale = mu[n] != 0.0 ? 1.0 / std::abs(mu[n]) : 1.0;
            for (std::size_t l = 0; l < L; ++l) A(n, l) = scale * std::pow(nodes[l], static_cast<double>(n));
            b(n) = scale * mu[n];
        }
        const Eigen::VectorXd w = A.colPivHouseholderQr().solve(b);
        out.integrals.assign(w.data(), w.data() + L);
    }

    for (std::size_t n = 0; n < used; ++n) {
        double pred = 0.0;
        for (std::size_t l = 0; l < L; ++l) pred += std::pow(nodes[l], static_cast<double>(n)) * out.integrals[l];
        const double denom = mu[n] != 0.0 ? std::abs(mu[n]) : 1.0;
        out.residuals.push_back((pred - mu[n]) / denom);
    }
    out.averages.resize(L);
    for (std::size_t l = 0; l < L; ++l) out.averages[l] = out.integrals[l] / part[l].measure;
    return out;
}

ReconstructionReport reconstruct(const DNCurve& curve, const ExponentProfile& p, int N,
                                 const ReconstructOptions& options) {
    if (N < 0) throw DomainError("moment order must be >= 0");
    LevelSetPartition part = level_sets(p, options.merge_tol);
    if (part.size() > static_cast<std::size_t>(N) + 1) {
        throw InsufficientMomentOrderError("partition has " + std::to_string(part.size()) +
                                           " levels; need N >= " + std::to_string(part.size() - 1));
    }

    ReconstructionReport rep{options.mode, N, 0.0, {}, {}, {}, {}, {part, {}}};
    if (options.mode == DerivativeSource::Oracle) {
        const OracleDerivatives od = dn_oracle_derivatives(curve.grid(), N);
        rep.fixed_point = od.m_jet[0];
        rep.dlambda_dm.assign(static_cast<std::size_t>(N) + 1, 0.0);
        rep.dlambda_dm[0] = od.lambda_jet[0];
        if (N >= 1) {
            const auto k_jet = inverse_derivatives(od.m_jet, N);
            for (int n = 1; n <= N; ++n) rep.dlambda_dm[static_cast<std::size_t>(n)] = faa_di_bruno(od.lambda_jet, k_jet, n);
        }
    } else {
        rep.fixed_point = fixed_point(curve, options.fixed_point_tol);
        if (N >= 1) {
            DerivativeEstimate d = dn_derivatives(curve, rep.fixed_point, N, options.scheme);
            rep.dlambda_dm = std::move(d.values);
            rep.derivative_error = std::move(d.error);
        } else {
            rep.dlambda_dm = {curve(rep.fixed_point)};
        }
    }

    rep.mu = extract_moments(rep.dlambda_dm, rep.fixed_point, N);
    rep.levels = moments_to_level_averages(rep.mu, part, options.condition_warning);

    rep.reconstructed.values.resize(part.size());
    for (std::size_t l = 0; l < part.size(); ++l) {
        const double avg = rep.levels.averages[l];
        if (!(avg > 0.0)) {
            throw InconsistentDataError("recovered mean of f on level p = " + std::to_string(part[l].p) +
                                        " is not positive");
        }
        rep.reconstructed.values[l] = std::pow(avg, -(part[l].p - 1.0));
    }
    return rep;
}

}  // namespace pxcald
