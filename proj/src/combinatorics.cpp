#include "pxcald/combinatorics.hpp"

#include <limits>
#include <string>

#include "pxcald/errors.hpp"

namespace pxcald {

int IndexTuple::count() const noexcept {
    int c = 0;
    for (int v : s) c += v;
    return c;
}

int IndexTuple::weight() const noexcept {
    int w = 0;
    for (std::size_t j = 0; j < s.size(); ++j) w += static_cast<int>(j + 1) * s[j];
    return w;
}

namespace {

void check_order(int n) {
    if (n < 1) throw DomainError("tuple order must be >= 1");
    if (n > kMaxExactOrder) {
        throw UnsupportedOrderError("order " + std::to_string(n) + " exceeds exact-integer ceiling " +
                                    std::to_string(kMaxExactOrder));
    }
}

// Depth-first over positions 1..n in order, so output is lexicographic.
// Each position j takes s_j from 0 upward.
void enumerate(int n, int pos, int remaining_count, int remaining_weight, bool count_fixed,
               std::vector<int>& cur, std::vector<IndexTuple>& out) {
    if (pos > n) {
        if (remaining_weight == 0 && (!count_fixed || remaining_count == 0)) out.push_back({cur});
        return;
    }
    for (int k = 0; k * pos <= remaining_weight && (!count_fixed || k <= remaining_count); ++k) {
        cur[static_cast<std::size_t>(pos - 1)] = k;
        enumerate(n, pos + 1, remaining_count - k, remaining_weight - k * pos, count_fixed, cur, out);
    }
    cur[static_cast<std::size_t>(pos - 1)] = 0;
}

}  // namespace

std::vector<IndexTuple> inverse_tuples(int n) {
    check_order(n);
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    std::vector<IndexTuple> out;
    enumerate(n, 1, n - 1, 2 * n - 2, true, cur, out);
    return out;
}

std::vector<IndexTuple> fdb_tuples(int n) {
    check_order(n);
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    std::vector<IndexTuple> out;
    enumerate(n, 1, 0, n, false, cur, out);
    return out;
}

std::int64_t stirling_first(int n, int j) {
    if (n < 0 || j < 0 || j > n) throw DomainError("stirling_first needs 0 <= j <= n");
    if (n > 20) throw UnsupportedOrderError("stirling_first limited to n <= 20");
    // row-by-row recurrence s(k+1, i) = s(k, i-1) - k s(k, i)
    std::vector<std::int64_t> row(static_cast<std::size_t>(n) + 1, 0);
    row[0] = 1;
    for (int k = 0; k < n; ++k) {
        for (int i = k + 1; i >= 1; --i) {
            row[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(i - 1)] - k * row[static_cast<std::size_t>(i)];
        }
        row[0] = -k * row[0];
    }
    return row[static_cast<std::size_t>(j)];
}

std::int64_t factorial(int n) {
    if (n < 0) throw DomainError("factorial of a negative number");
    if (n > 20) throw UnsupportedOrderError("factorial overflows int64 beyond 20");
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace pxcald
