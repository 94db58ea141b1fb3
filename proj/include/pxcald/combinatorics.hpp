#pragma once

#include <cstdint>
#include <vector>

namespace pxcald {

/// Largest order for which every factorial used by the derivative formulas
/// ((2n-2)! in the inverse-function sum) fits in a signed 64-bit integer.
inline constexpr int kMaxExactOrder = 10;

/// Multiplicity tuple (s_1, ..., s_n); entry j-1 is the count of part j.
struct IndexTuple {
    std::vector<int> s;

    int order() const noexcept { return static_cast<int>(s.size()); }
    int count() const noexcept;     // sum of s_j
    int weight() const noexcept;    // sum of j * s_j
    friend auto operator<=>(const IndexTuple&, const IndexTuple&) = default;
};

/// Tuples of length n with sum s_j = n - 1 and sum j s_j = 2n - 2, lexicographic order.
std::vector<IndexTuple> inverse_tuples(int n);

/// Partitions of n as multiplicity tuples (sum j k_j = n), lexicographic order.
std::vector<IndexTuple> fdb_tuples(int n);

/// Signed Stirling number of the first kind: prod_{l<n}(x - l) = sum_j s(n, j) x^j.
std::int64_t stirling_first(int n, int j);

std::int64_t factorial(int n);

}  // namespace pxcald
