#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pxcald/profiles.hpp"

namespace pxcald {

struct Level {
    double p;        // exponent value on the level set
    double g;        // 1/(p-1)
    double q;        // p/(p-1)
    std::vector<std::size_t> cells;
    double measure;
};

/// Finite sigma-algebra generated by a piecewise-constant exponent: the atoms
/// are the level sets of p. Levels are ordered by increasing p, so g and q
/// decrease with the level index.
class LevelSetPartition {
public:
    LevelSetPartition(std::vector<Level> levels, std::vector<double> cell_lengths);

    std::span<const Level> levels() const noexcept { return levels_; }
    std::size_t size() const noexcept { return levels_.size(); }
    const Level& operator[](std::size_t l) const { return levels_[l]; }
    std::size_t cell_count() const noexcept { return cell_lengths_.size(); }
    std::span<const double> cell_lengths() const noexcept { return cell_lengths_; }
    std::size_t level_of(std::size_t cell) const { return level_of_cell_[cell]; }
    double total_measure() const noexcept { return total_; }

    /// Level with the largest q (smallest p), where Q+ lives.
    std::size_t max_q_level() const noexcept { return 0; }
    /// Level with the smallest q (largest p), where Q- lives.
    std::size_t min_q_level() const noexcept { return levels_.size() - 1; }

private:
    std::vector<Level> levels_;
    std::vector<double> cell_lengths_;
    std::vector<std::size_t> level_of_cell_;
    double total_;
};

/// Level sets over the cells of p itself. Values within merge_tol of their
/// neighbour (in sorted order) share a level.
LevelSetPartition level_sets(const ExponentProfile& p, double merge_tol = 0.0);
/// Level sets over the cells of a common grid.
LevelSetPartition level_sets(const CommonGrid& grid, double merge_tol = 0.0);

/// A sigma(p)-measurable function: one value per level.
struct ProjectedFunction {
    LevelSetPartition partition;
    std::vector<double> values;

    /// Value on every cell of the partition's grid.
    std::vector<double> expand() const;
};

/// Conditional expectation onto sigma(p): the measure-weighted mean of h on
/// each level set. h holds one value per partition cell.
ProjectedFunction project(std::span<const double> h, const LevelSetPartition& part);

/// Nonlinear projection gamma -> (P gamma^{-1/(p-1)})^{-(p-1)} on the common grid of (gamma, p).
ProjectedFunction project_conductivity(const ConductivityProfile& gamma, const ExponentProfile& p,
                                       double merge_tol = 0.0);

/// True iff h integrates to zero on every level set (hence on every sigma(p)-set).
bool kernel_test(std::span<const double> h, const LevelSetPartition& part);

/// CSV "level_p,measure,value".
void write_projection_csv(std::ostream& os, const ProjectedFunction& fn);

}  // namespace pxcald
