#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "pxcald/sigma_projection.hpp"

using namespace pxcald;
using doctest::Approx;

namespace {

// Independent level-wise integral: loops over cells and compares p directly.
double level_integral(const CommonGrid& grid, std::span<const double> h, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i].p == p) s += h[i] * grid[i].length();
    return s;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("level_sets examples") {
    const auto one = level_sets(fixture::exponent({{0, 1}, {2}}));
    REQUIRE(one.size() == 1);
    CHECK(one[0].measure == Approx(1.0));

    const auto two = level_sets(fixture::exponent({{0, 0.5, 1}, {2, 3}}));
    REQUIRE(two.size() == 2);
    CHECK(two[0].measure == Approx(0.5));
    CHECK(two[1].measure == Approx(0.5));
    CHECK(two[0].g == Approx(1.0));
    CHECK(two[1].q == Approx(1.5));

    const auto uni = level_sets(fixture::exponent({{0, 0.3, 0.6, 1}, {2, 3, 2}}));
    REQUIRE(uni.size() == 2);
    CHECK(uni[0].p == 2.0);
    CHECK(uni[0].measure == Approx(0.7));
    CHECK(uni[0].cells == std::vector<std::size_t>{0, 2});
    CHECK(uni.level_of(1) == 1);
    CHECK(uni.max_q_level() == 0);
    CHECK(uni.min_q_level() == 1);
}

TEST_CASE("level_sets merges nearby exponents") {
    const auto p = fixture::exponent({{0, 0.25, 0.5, 1}, {2.0, 2.0 + 1e-9, 3.0}});
    CHECK(level_sets(p).size() == 3);
    const auto merged = level_sets(p, 1e-6);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].measure == Approx(0.5));
    CHECK_THROWS_AS(level_sets(p, -1.0), DomainError);
}

TEST_CASE("project examples") {
    const auto two = level_sets(fixture::exponent({{0, 0.5, 1}, {2, 3}}));
    const std::vector<double> h{1, 3};
    const auto ph = project(h, two);
    CHECK(ph.values[0] == Approx(1));
    CHECK(ph.values[1] == Approx(3));

    const auto one = level_sets(fixture::exponent({{0, 0.5, 1}, {2, 2}}));
    CHECK(project(h, one).values[0] == Approx(2));

    const auto uni = level_sets(fixture::exponent({{0, 0.3, 0.6, 1}, {2, 3, 2}}));
    const std::vector<double> h3{1, 5, 2};
    const auto p3 = project(h3, uni);
    CHECK(p3.values[0] == Approx(11.0 / 7.0).epsilon(1e-14));
    CHECK(p3.values[1] == Approx(5));
    CHECK(p3.expand() == std::vector<double>{p3.values[0], 5, p3.values[0]});
}

TEST_CASE("project_conductivity examples") {
    const auto p2 = fixture::exponent({{0, 1}, {2}});
    const auto hm = project_conductivity(fixture::conductivity({{0, 0.5, 1}, {1, 4}}), p2);
    REQUIRE(hm.values.size() == 1);
    CHECK(hm.values[0] == Approx(1.6).epsilon(1e-14));

    // sigma(p)-measurable gamma is a fixed point
    const auto p = fixture::exponent({{0, 0.3, 0.6, 1}, {2, 3, 2}});
    const auto fixed = project_conductivity(fixture::conductivity({{0, 0.3, 0.6, 1}, {7, 0.2, 7}}), p);
    CHECK(fixed.values[0] == Approx(7).epsilon(1e-14));
    CHECK(fixed.values[1] == Approx(0.2).epsilon(1e-14));

    // constant p: ((1/|I|) \int gamma^{-1/(p-1)})^{-(p-1)} on a non-unit interval
    std::mt19937_64 rng(5);
    for (double pv : {1.3, 2.0, 3.5, 8.0}) {
        const oracle::Raw pr{{-1, 2}, {pv}};
        const oracle::Raw gr{{-1, 0, 0.5, 2}, random_values(rng, 3, 0.1, 10)};
        const double avg = oracle::integrate(pr, gr, [](double pp, double gg) { return std::pow(gg, -1 / (pp - 1)); }) / 3.0;
        const auto pc = project_conductivity(fixture::conductivity(gr), fixture::exponent(pr));
        CHECK(oracle::rel(pc.values[0], std::pow(avg, -(pv - 1))) < 1e-13);
    }
}

TEST_CASE("kernel_test examples") {
    const auto p = fixture::exponent({{-1, -0.4, 0, 0.4, 1}, {3, 2, 2, 3}});  // even on (-1,1)
    const auto part = level_sets(p);
    CHECK(kernel_test(std::vector<double>(4, 0.0), part));
    CHECK_FALSE(kernel_test(std::vector<double>(4, 1.0), part));
    // odd: h(-x) = -h(x), cellwise mirror values with matching lengths
    CHECK(kernel_test(std::vector<double>{-2.5, -0.7, 0.7, 2.5}, part));
    CHECK_FALSE(kernel_test(std::vector<double>{-2.5, -0.7, 0.7, 2.6}, part));
}

TEST_CASE("projection CSV") {
    const auto part = level_sets(fixture::exponent({{0, 0.5, 1}, {2, 3}}));
    std::ostringstream os;
    write_projection_csv(os, project(std::vector<double>{1, 3}, part));
    CHECK(os.str() == "level_p,measure,value\n2,0.5,1\n3,0.5,3\n");
}

TEST_CASE("projection properties over random profiles") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> ucells(1, 12);
    std::uniform_real_distribution<double> ualpha(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const int cells = ucells(rng);
        const int levels = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(cells, 5)));
        const auto pair = oracle::random_pair(rng, cells, levels, 1.1, 8.0);
        const auto grid = fixture::grid(pair.p, pair.gamma);
        const auto part = level_sets(grid);
        CAPTURE(trial);

        // partition invariants
        double total = 0.0;
        for (std::size_t l = 0; l < part.size(); ++l) {
            total += part[l].measure;
            if (l > 0) {
                CHECK(part[l].p > part[l - 1].p);
                CHECK(part[l].q < part[l - 1].q);
            }
        }
        CHECK(total == Approx(1.0).epsilon(1e-12));
        CHECK(part.size() == static_cast<std::size_t>(levels));

        const auto h1 = random_values(rng, grid.size(), -5, 5);
        const auto h2 = random_values(rng, grid.size(), -5, 5);
        const double alpha = ualpha(rng);
        const auto P1 = project(h1, part);
        const auto P2 = project(h2, part);
        const auto e1 = P1.expand();

        // idempotence
        const auto PP = project(e1, part);
        for (std::size_t l = 0; l < part.size(); ++l)
            CHECK(std::abs(PP.values[l] - P1.values[l]) <= 1e-12 * std::max(1.0, std::abs(P1.values[l])));

        // linearity
        std::vector<double> comb(grid.size());
        for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = alpha * h1[i] + h2[i];
        const auto Pc = project(comb, part);
        for (std::size_t l = 0; l < part.size(); ++l)
            CHECK(std::abs(Pc.values[l] - (alpha * P1.values[l] + P2.values[l])) <= 1e-12 * 20.0);

        // conservation per level, against an independent cell loop
        for (std::size_t l = 0; l < part.size(); ++l) {
            const double lhs = level_integral(grid, e1, part[l].p);
            const double rhs = level_integral(grid, h1, part[l].p);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * 5.0);
        }

        // orthogonality against a random sigma(p)-measurable s
        ProjectedFunction s{part, random_values(rng, part.size(), -5, 5)};
        const auto se = s.expand();
        double inner = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) inner += (h1[i] - e1[i]) * se[i] * grid[i].length();
        CHECK(std::abs(inner) <= 1e-12 * 25.0);

        // bounds
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& cells = part[part.level_of(i)].cells;
            double lo = 1e300, hi = -1e300;
            for (std::size_t c : cells) {
                lo = std::min(lo, h1[c]);
                hi = std::max(hi, h1[c]);
            }
            CHECK(e1[i] >= lo - 1e-12 * std::abs(lo));
            CHECK(e1[i] <= hi + 1e-12 * std::abs(hi));
        }

        // kernel characterization: h - Ph lies in the kernel, Ph does not unless zero
        std::vector<double> resid(grid.size());
        for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = h1[i] - e1[i];
        CHECK(kernel_test(resid, part));
        CHECK_FALSE(kernel_test(se, part));
        const auto Pr = project(resid, part);
        for (double v : Pr.values) CHECK(std::abs(v) <= 1e-12 * 10.0);

        // nonlinear projection: idempotent and bounded by gamma's range
        const auto p = fixture::exponent(pair.p);
        const auto gamma = fixture::conductivity(pair.gamma);
        const auto pt = project_conductivity(gamma, p);
        for (double v : pt.values) {
            CHECK(v >= gamma.gamma_min() * (1 - 1e-12));
            CHECK(v <= gamma.gamma_max() * (1 + 1e-12));
        }
        // feed P~(gamma) back as a profile on p's own cells
        std::vector<double> pt_cells(p.cell_count());
        const auto ppart = level_sets(p);
        for (std::size_t c = 0; c < pt_cells.size(); ++c) pt_cells[c] = pt.values[ppart.level_of(c)];
        const ConductivityProfile again(pair.p.breaks, pt_cells);
        const auto pt2 = project_conductivity(again, p);
        for (std::size_t l = 0; l < pt.values.size(); ++l) CHECK(oracle::rel(pt2.values[l], pt.values[l]) < 1e-12);

        // P~ agrees with the quadrature level means of f
        for (std::size_t l = 0; l < pt.values.size(); ++l) {
            const double mean = oracle::level_mean_f(pair.p, pair.gamma, pt.partition[l].p);
            CHECK(oracle::rel(pt.values[l], std::pow(mean, -(pt.partition[l].p - 1))) < 1e-12);
        }
    }
}
