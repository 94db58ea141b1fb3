// Serial vs OpenMP DN-curve sampling and batched flux solves.
//   bench_sampling [points] [cells]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "pxcald/dn_curve.hpp"
#include "pxcald/sampling.hpp"

using namespace pxcald;

namespace {

CommonGrid random_grid(std::size_t cells, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> p(1.2, 6.0), gamma(0.1, 10.0);
    std::vector<Cell> out;
    for (std::size_t i = 0; i < cells; ++i) {
        const double left = static_cast<double>(i) / cells;
        const double right = static_cast<double>(i + 1) / cells;
        out.push_back({left, right, p(rng), gamma(rng)});
    }
    out.back().right = 1.0;
    return CommonGrid(Interval(0.0, 1.0), std::move(out));
}

template <class Fn>
double time_ms(Fn&& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t points = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 2000;
    const std::size_t cells = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 64;
    const auto grid = random_grid(cells, 7);
    const auto curve = DNCurve::exact(grid);
    const auto ms = log_grid(1e-6, 1e6, points);

    std::vector<DNSample> serial, parallel;
    const double t_serial = time_ms([&] { serial = sample_curve_serial(curve, ms); }, 3);
    const double t_parallel = time_ms([&] { parallel = sample_curve(curve, ms); }, 3);
    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i) same = serial[i].lambda == parallel[i].lambda;

    const double f_serial = time_ms([&] { (void)solve_flux_batch_serial(ms, grid, 0.0); }, 3);
    const double f_parallel = time_ms([&] { (void)solve_flux_batch(ms, grid, 0.0); }, 3);

    std::printf("threads=%d points=%zu cells=%zu\n", omp_get_max_threads(), points, cells);
    std::printf("sample_curve      serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx  identical=%s\n", t_serial,
                t_parallel, t_serial / t_parallel, same ? "yes" : "NO");
    std::printf("solve_flux_batch  serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx\n", f_serial, f_parallel,
                f_serial / f_parallel);
    return same ? 0 : 1;
}
