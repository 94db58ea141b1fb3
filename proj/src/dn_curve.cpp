#include "pxcald/dn_curve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace pxcald {

double NoiseModel::factor(double m) const {
    if (level == 0.0) return 1.0;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(m)),
                      static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(m) >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    return 1.0 + level * normal(rng);
}

DNCurve DNCurve::exact(CommonGrid grid, double root_tol) {
    DNCurve c;
    c.mode_ = Mode::Exact;
    c.grid_.emplace(std::move(grid));
    c.root_tol_ = root_tol;
    return c;
}

DNCurve DNCurve::tabulated(std::vector<DNSample> samples) {
    if (!samples.empty() && samples.front().m == 0.0) {
        if (samples.front().lambda != 0.0) throw DomainError("DN table: Lambda(0) must be 0");
        samples.erase(samples.begin());
    }
    if (samples.size() < 2) throw DomainError("DN table needs at least two samples with m > 0");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!(s.m > 0.0) || !std::isfinite(s.m)) throw DomainError("DN table: m must be positive and finite");
        if (!(s.lambda > 0.0) || !std::isfinite(s.lambda)) {
            throw DomainError("DN table: lambda must be positive and finite at row " + std::to_string(i));
        }
        if (i > 0 && !(s.m > samples[i - 1].m)) throw DomainError("DN table: m must be strictly increasing");
    }
    DNCurve c;
    c.mode_ = Mode::Tabulated;
    c.samples_ = std::move(samples);
    c.build_interpolant();
    return c;
}

// Fritsch-Carlson slopes (weighted harmonic mean) on the log-log data.
void DNCurve::build_interpolant() {
    const std::size_t n = samples_.size();
    log_m_.resize(n);
    log_l_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        log_m_[i] = std::log(samples_[i].m);
        log_l_[i] = std::log(samples_[i].lambda);
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = log_m_[i + 1] - log_m_[i];
        delta[i] = (log_l_[i + 1] - log_l_[i]) / h[i];
    }
    slope_.assign(n, 0.0);
    if (n == 2) {
        slope_[0] = slope_[1] = delta[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) continue;
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
        return s;
    };
    slope_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double DNCurve::interpolate(double m) const {
    if (m < samples_.front().m || m > samples_.back().m) {
        throw RangeError("DN table queried at m = " + std::to_string(m) + " outside [" +
                         std::to_string(samples_.front().m) + ", " + std::to_string(samples_.back().m) + "]");
    }
    const double x = std::log(m);
    auto it = std::upper_bound(log_m_.begin(), log_m_.end(), x);
    std::size_t i = it == log_m_.begin() ? 0 : static_cast<std::size_t>(it - log_m_.begin()) - 1;
    i = std::min(i, log_m_.size() - 2);
    const double h = log_m_[i + 1] - log_m_[i];
    const double t = (x - log_m_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double y = (2 * t3 - 3 * t2 + 1) * log_l_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
                     (-2 * t3 + 3 * t2) * log_l_[i + 1] + (t3 - t2) * h * slope_[i + 1];
    return std::exp(y);
}

double DNCurve::operator()(double m) const {
    if (!(m >= 0.0)) throw DomainError("DN map needs m >= 0");
    if (m == 0.0) return 0.0;
    double lambda;
    if (mode_ == Mode::Exact) {
        const FluxConstant k = solve_flux(m, *grid_, root_tol_);
        lambda = dn_map_of_K(k.K, *grid_);
    } else {
        lambda = interpolate(m);
    }
    return noise_ ? lambda * noise_->factor(m) : lambda;
}

const CommonGrid& DNCurve::grid() const {
    if (!grid_) throw DomainError("tabulated DN curve has no profile grid");
    return *grid_;
}

FluxConstant DNCurve::flux(double m) const { return solve_flux(m, grid(), root_tol_); }

double DNCurve::m_min() const {
    if (mode_ == Mode::Exact) return 0.0;
    return samples_.front().m;
}

double DNCurve::m_max() const {
    if (mode_ == Mode::Exact) return HUGE_VAL;
    return samples_.back().m;
}

DNCurve add_noise(const DNCurve& curve, double level, std::uint64_t seed) {
    if (!(level >= 0.0)) throw DomainError("noise level must be nonnegative");
    if (level == 0.0) return curve;
    NoiseModel model{level, seed};
    if (curve.mode() == DNCurve::Mode::Exact) {
        DNCurve out = curve;
        out.noise_ = model;
        return out;
    }
    std::vector<DNSample> noisy(curve.samples().begin(), curve.samples().end());
    for (auto& s : noisy) s.lambda *= model.factor(s.m);
    DNCurve out = DNCurve::tabulated(std::move(noisy));
    return out;
}

void write_dn_csv(std::ostream& os, std::span<const DNSample> samples) {
    os << "m,lambda\n";
    char buf[64];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.m, s.lambda);
        os << buf;
    }
}

std::vector<DNSample> read_dn_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("csv:1", "empty DN curve file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "m,lambda") throw ValidationError("csv:1", "expected header \"m,lambda\"");
    std::vector<DNSample> out;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ValidationError("csv:" + std::to_string(row), "expected two columns");
        try {
            std::size_t used = 0;
            const std::string a = line.substr(0, comma);
            const std::string b = line.substr(comma + 1);
            const double m = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument("m");
            const double l = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument("lambda");
            out.push_back({m, l});
        } catch (const std::logic_error&) {
            throw ValidationError("csv:" + std::to_string(row), "unparseable number");
        }
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i].m > out[i - 1].m)) {
            throw ValidationError("csv:" + std::to_string(i + 2), "m must be strictly ascending");
        }
    }
    return out;
}

}  // namespace pxcald
