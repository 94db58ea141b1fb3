#include "pxcald/profiles.hpp"

#include <algorithm>
#include <iterator>
#include <limits>
#include <set>

namespace pxcald {

Interval::Interval(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw DomainError("interval requires finite a < b");
    }
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (breaks_.size() < 2) throw DomainError("need at least two breakpoints");
    if (values_.size() + 1 != breaks_.size()) {
        throw DomainError("expected " + std::to_string(breaks_.size() - 1) + " cell values, got " +
                          std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        if (!std::isfinite(breaks_[i])) throw DomainError("non-finite breakpoint");
        // zero-length cells are null sets and are rejected
        if (i > 0 && !(breaks_[i] > breaks_[i - 1])) {
            throw DomainError("breakpoints must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("non-finite cell value");
    }
}

std::size_t PiecewiseConstant::cell_of(double x) const {
    if (x < breaks_.front() || x > breaks_.back()) throw DomainError("point outside profile interval");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    auto idx = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
    return std::min(idx == 0 ? 0 : idx - 1, values_.size() - 1);
}

double PiecewiseConstant::at(double x) const { return values_[cell_of(x)]; }

ExponentProfile::ExponentProfile(std::vector<double> breaks, std::vector<double> values)
    : fn_(std::move(breaks), std::move(values)) {
    auto [lo, hi] = std::minmax_element(fn_.values().begin(), fn_.values().end());
    p_min_ = *lo;
    p_max_ = *hi;
    if (!(p_min_ > 1.0)) throw DomainError("exponent must satisfy p > 1 on every cell");
}

ConductivityProfile::ConductivityProfile(std::vector<double> breaks, std::vector<double> values)
    : fn_(std::move(breaks), std::move(values)) {
    auto [lo, hi] = std::minmax_element(fn_.values().begin(), fn_.values().end());
    gamma_min_ = *lo;
    gamma_max_ = *hi;
    if (!(gamma_min_ > 0.0)) throw DomainError("conductivity must be positive on every cell");
}

CommonGrid::CommonGrid(Interval interval, std::vector<Cell> cells)
    : interval_(interval), cells_(std::move(cells)) {
    if (cells_.empty()) throw DomainError("grid has no cells");
    p_min_ = std::numeric_limits<double>::infinity();
    p_max_ = -p_min_;
    for (const Cell& c : cells_) {
        if (!(c.right > c.left)) throw DomainError("zero-length grid cell");
        if (!(c.p > 1.0) || !std::isfinite(c.p)) throw DomainError("grid exponent must exceed 1");
        if (!(c.gamma > 0.0) || !std::isfinite(c.gamma)) throw DomainError("grid conductivity must be positive");
        p_min_ = std::min(p_min_, c.p);
        p_max_ = std::max(p_max_, c.p);
    }
}

CommonGrid CommonGrid::unit_conductivity(const ExponentProfile& p) {
    const auto& fn = p.function();
    std::vector<Cell> cells;
    cells.reserve(fn.cell_count());
    for (std::size_t i = 0; i < fn.cell_count(); ++i) {
        cells.push_back({fn.breaks()[i], fn.breaks()[i + 1], fn.values()[i], 1.0});
    }
    return CommonGrid(p.interval(), std::move(cells));
}

std::vector<double> CommonGrid::breaks() const {
    std::vector<double> out;
    out.reserve(cells_.size() + 1);
    out.push_back(cells_.front().left);
    for (const Cell& c : cells_) out.push_back(c.right);
    return out;
}

std::vector<double> CommonGrid::transformed_weight() const {
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const Cell& c : cells_) out.push_back(c.f());
    return out;
}

std::vector<double> CommonGrid::conductivity_from_weight(std::span<const double> f) const {
    if (f.size() != cells_.size()) throw DomainError("weight size does not match grid");
    std::vector<double> out;
    out.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] > 0.0)) throw DomainError("transformed weight must be positive");
        out.push_back(std::pow(f[i], -(cells_[i].p - 1.0)));
    }
    return out;
}

CommonGrid merge_grids(const ExponentProfile& p, const ConductivityProfile& gamma) {
    if (!(p.interval() == gamma.interval())) {
        throw DomainMismatchError("exponent and conductivity are defined on different intervals");
    }
    std::set<double> merged(p.function().breaks().begin(), p.function().breaks().end());
    merged.insert(gamma.function().breaks().begin(), gamma.function().breaks().end());
    std::vector<double> breaks(merged.begin(), merged.end());

    std::vector<Cell> cells;
    cells.reserve(breaks.size() - 1);
    std::size_t ip = 0;
    std::size_t ig = 0;
    const auto pb = p.function().breaks();
    const auto gb = gamma.function().breaks();
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double left = breaks[i];
        while (pb[ip + 1] <= left) ++ip;
        while (gb[ig + 1] <= left) ++ig;
        cells.push_back({left, breaks[i + 1], p.p(ip), gamma.gamma(ig)});
    }
    return CommonGrid(p.interval(), std::move(cells));
}

}  // namespace pxcald
