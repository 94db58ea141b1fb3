#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pxcald/errors.hpp"

namespace pxcald {

/// Open bounded interval ]a, b[.
class Interval {
public:
    Interval(double a, double b);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double length() const noexcept { return b_ - a_; }
    bool contains(double x) const noexcept { return x >= a_ && x <= b_; }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double a_;
    double b_;
};

/// Piecewise-constant function on a strictly increasing breakpoint list.
/// Cell i is [breaks[i], breaks[i+1]) with value values[i].
class PiecewiseConstant {
public:
    PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

    Interval interval() const { return {breaks_.front(), breaks_.back()}; }
    std::size_t cell_count() const noexcept { return values_.size(); }
    std::span<const double> breaks() const noexcept { return breaks_; }
    std::span<const double> values() const noexcept { return values_; }
    double cell_length(std::size_t i) const { return breaks_[i + 1] - breaks_[i]; }

    /// Value at x; right-continuous, the last cell includes b.
    double at(double x) const;
    std::size_t cell_of(double x) const;

private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

/// Exponent p(x) with 1 < p < inf. Bounds are derived from the stored values.
class ExponentProfile {
public:
    ExponentProfile(std::vector<double> breaks, std::vector<double> values);

    const PiecewiseConstant& function() const noexcept { return fn_; }
    Interval interval() const { return fn_.interval(); }
    std::size_t cell_count() const noexcept { return fn_.cell_count(); }
    double p_min() const noexcept { return p_min_; }
    double p_max() const noexcept { return p_max_; }

    double p(std::size_t i) const { return fn_.values()[i]; }
    double conjugate(std::size_t i) const { return conjugate_exponent(p(i)); }  // q
    double inverse_gap(std::size_t i) const { return inverse_gap_exponent(p(i)); }  // g

    static double conjugate_exponent(double p) noexcept { return p / (p - 1.0); }
    static double inverse_gap_exponent(double p) noexcept { return 1.0 / (p - 1.0); }

private:
    PiecewiseConstant fn_;
    double p_min_;
    double p_max_;
};

/// Conductivity gamma(x) >= gamma_min > 0.
class ConductivityProfile {
public:
    ConductivityProfile(std::vector<double> breaks, std::vector<double> values);

    const PiecewiseConstant& function() const noexcept { return fn_; }
    Interval interval() const { return fn_.interval(); }
    std::size_t cell_count() const noexcept { return fn_.cell_count(); }
    double gamma(std::size_t i) const { return fn_.values()[i]; }
    double gamma_min() const noexcept { return gamma_min_; }
    double gamma_max() const noexcept { return gamma_max_; }

private:
    PiecewiseConstant fn_;
    double gamma_min_;
    double gamma_max_;
};

struct Cell {
    double left;
    double right;
    double p;
    double gamma;

    double length() const noexcept { return right - left; }
    double g() const noexcept { return 1.0 / (p - 1.0); }
    double q() const noexcept { return p / (p - 1.0); }
    /// Transformed weight gamma^{-1/(p-1)}.
    double f() const noexcept { return std::pow(gamma, -g()); }
};

/// Common refinement of an exponent/conductivity pair.
class CommonGrid {
public:
    CommonGrid(Interval interval, std::vector<Cell> cells);

    /// Grid of p alone with gamma = 1 on every cell.
    static CommonGrid unit_conductivity(const ExponentProfile& p);

    const Interval& interval() const noexcept { return interval_; }
    std::span<const Cell> cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }
    const Cell& operator[](std::size_t i) const { return cells_[i]; }
    std::vector<double> breaks() const;

    double p_min() const noexcept { return p_min_; }
    double p_max() const noexcept { return p_max_; }

    /// f = gamma^{-1/(p-1)} per cell.
    std::vector<double> transformed_weight() const;
    /// Inverse of transformed_weight: gamma = f^{-(p-1)} per cell.
    std::vector<double> conductivity_from_weight(std::span<const double> f) const;

private:
    Interval interval_;
    std::vector<Cell> cells_;
    double p_min_;
    double p_max_;
};

CommonGrid merge_grids(const ExponentProfile& p, const ConductivityProfile& gamma);

/// Exact integral of a piecewise-constant integrand: sum of fn(p_i, gamma_i, len_i).
template <class CellFn>
double integrate_cellwise(const CommonGrid& grid, CellFn&& fn) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Cell& c = grid[i];
        const double v = fn(c.p, c.gamma, c.length());
        if (!std::isfinite(v)) {
            throw EvaluationError("non-finite integrand on cell " + std::to_string(i) + " [" +
                                      std::to_string(c.left) + ", " + std::to_string(c.right) + "]",
                                  i);
        }
        sum += v;
    }
    return sum;
}

}  // namespace pxcald
