#include "pxcald/sampling.hpp"

#include <cmath>
#include <exception>
#include <mutex>

namespace pxcald {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log grid needs 0 < lo <= hi");
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + step * static_cast<double>(i));
    out.front() = lo;
    out.back() = hi;
    return out;
}

namespace {

// Runs body(i) for i in [0, n) under OpenMP; the first exception thrown by
// any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr first;
    std::mutex guard;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace

std::vector<DNSample> sample_curve(const DNCurve& curve, std::span<const double> ms) {
    std::vector<DNSample> out(ms.size());
    parallel_for(ms.size(), [&](std::size_t i) { out[i] = {ms[i], curve(ms[i])}; });
    return out;
}

std::vector<DNSample> sample_curve_serial(const DNCurve& curve, std::span<const double> ms) {
    std::vector<DNSample> out;
    out.reserve(ms.size());
    for (double m : ms) out.push_back({m, curve(m)});
    return out;
}

std::vector<FluxConstant> solve_flux_batch(std::span<const double> ms, const CommonGrid& grid, double tol) {
    std::vector<FluxConstant> out(ms.size());
    parallel_for(ms.size(), [&](std::size_t i) { out[i] = solve_flux(ms[i], grid, tol); });
    return out;
}

std::vector<FluxConstant> solve_flux_batch_serial(std::span<const double> ms, const CommonGrid& grid,
                                                  double tol) {
    std::vector<FluxConstant> out;
    out.reserve(ms.size());
    for (double m : ms) out.push_back(solve_flux(m, grid, tol));
    return out;
}

}  // namespace pxcald
