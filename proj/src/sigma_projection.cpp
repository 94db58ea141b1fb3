#include "pxcald/sigma_projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace pxcald {

LevelSetPartition::LevelSetPartition(std::vector<Level> levels, std::vector<double> cell_lengths)
    : levels_(std::move(levels)), cell_lengths_(std::move(cell_lengths)),
      level_of_cell_(cell_lengths_.size(), static_cast<std::size_t>(-1)) {
    if (levels_.empty()) throw DomainError("partition has no levels");
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        if (l > 0 && !(levels_[l].p > levels_[l - 1].p)) {
            throw DomainError("partition levels must have strictly increasing p");
        }
        for (std::size_t c : levels_[l].cells) {
            if (c >= cell_lengths_.size() || level_of_cell_[c] != static_cast<std::size_t>(-1)) {
                throw DomainError("partition cell index invalid or duplicated");
            }
            level_of_cell_[c] = l;
        }
    }
    for (std::size_t l : level_of_cell_) {
        if (l == static_cast<std::size_t>(-1)) throw DomainError("partition leaves a cell uncovered");
    }
    total_ = std::accumulate(cell_lengths_.begin(), cell_lengths_.end(), 0.0);
}

namespace {

LevelSetPartition build_levels(std::span<const double> p_values, std::vector<double> lengths, double merge_tol) {
    if (!(merge_tol >= 0.0)) throw DomainError("merge tolerance must be nonnegative");
    std::vector<std::size_t> order(p_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });

    std::vector<Level> levels;
    double prev = 0.0;
    for (std::size_t idx : order) {
        const double p = p_values[idx];
        if (levels.empty() || p - prev > merge_tol) levels.push_back({p, 0.0, 0.0, {}, 0.0});
        prev = p;
        levels.back().cells.push_back(idx);
    }
    for (Level& lv : levels) {
        std::sort(lv.cells.begin(), lv.cells.end());
        double weighted = 0.0;
        bool mixed = false;
        for (std::size_t c : lv.cells) {
            lv.measure += lengths[c];
            weighted += lengths[c] * p_values[c];
            mixed = mixed || p_values[c] != lv.p;
        }
        // merged levels take the measure-weighted exponent
        if (mixed) lv.p = weighted / lv.measure;
        lv.g = 1.0 / (lv.p - 1.0);
        lv.q = lv.p / (lv.p - 1.0);
    }
    return LevelSetPartition(std::move(levels), std::move(lengths));
}

}  // namespace

LevelSetPartition level_sets(const ExponentProfile& p, double merge_tol) {
    const auto& fn = p.function();
    std::vector<double> lengths(fn.cell_count());
    for (std::size_t i = 0; i < lengths.size(); ++i) lengths[i] = fn.cell_length(i);
    return build_levels(fn.values(), std::move(lengths), merge_tol);
}

LevelSetPartition level_sets(const CommonGrid& grid, double merge_tol) {
    std::vector<double> ps(grid.size());
    std::vector<double> lengths(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ps[i] = grid[i].p;
        lengths[i] = grid[i].length();
    }
    return build_levels(ps, std::move(lengths), merge_tol);
}

std::vector<double> ProjectedFunction::expand() const {
    std::vector<double> out(partition.cell_count());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = values[partition.level_of(c)];
    return out;
}

ProjectedFunction project(std::span<const double> h, const LevelSetPartition& part) {
    if (h.size() != part.cell_count()) throw DomainError("function must have one value per partition cell");
    std::vector<double> values(part.size(), 0.0);
    const auto lengths = part.cell_lengths();
    for (std::size_t l = 0; l < part.size(); ++l) {
        double integral = 0.0;
        for (std::size_t c : part[l].cells) integral += h[c] * lengths[c];
        values[l] = integral / part[l].measure;
    }
    return {part, std::move(values)};
}

ProjectedFunction project_conductivity(const ConductivityProfile& gamma, const ExponentProfile& p,
                                       double merge_tol) {
    const CommonGrid grid = merge_grids(p, gamma);
    const LevelSetPartition part = level_sets(grid, merge_tol);
    ProjectedFunction out = project(grid.transformed_weight(), part);

    std::vector<double> lo(part.size(), HUGE_VAL), hi(part.size(), -HUGE_VAL);
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const std::size_t l = part.level_of(c);
        lo[l] = std::min(lo[l], grid[c].gamma);
        hi[l] = std::max(hi[l], grid[c].gamma);
    }
    for (std::size_t l = 0; l < part.size(); ++l) {
        out.values[l] = std::pow(out.values[l], -(part[l].p - 1.0));
        // essinf gamma <= P~(gamma) <= esssup gamma on each level; a violation is a bug
        const double slack = 64.0 * 2.220446049250313e-16 * hi[l];
        if (out.values[l] < lo[l] - slack || out.values[l] > hi[l] + slack) {
            throw std::logic_error("project_conductivity: bound invariant violated");
        }
    }
    return out;
}

bool kernel_test(std::span<const double> h, const LevelSetPartition& part) {
    if (h.size() != part.cell_count()) throw DomainError("function must have one value per partition cell");
    double norm = 0.0;
    for (double v : h) norm = std::max(norm, std::abs(v));
    const double threshold = 1e-12 * norm * part.total_measure();
    const auto lengths = part.cell_lengths();
    for (const Level& lv : part.levels()) {
        double integral = 0.0;
        for (std::size_t c : lv.cells) integral += h[c] * lengths[c];
        if (std::abs(integral) > threshold) return false;
    }
    return true;
}

void write_projection_csv(std::ostream& os, const ProjectedFunction& fn) {
    os << "level_p,measure,value\n";
    char buf[96];
    for (std::size_t l = 0; l < fn.partition.size(); ++l) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", fn.partition[l].p, fn.partition[l].measure,
                      fn.values[l]);
        os << buf;
    }
}

}  // namespace pxcald
