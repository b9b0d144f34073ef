#include <doctest.h>

#include <cmath>

#include "khist/oracle.hpp"
#include "khist/theory.hpp"
#include "support.hpp"

using namespace khist;

namespace {

BudgetInputs inputs(int k, int d, std::int64_t m, double eps, double delta) {
    BudgetInputs in;
    in.k = k;
    in.d = d;
    in.m = m;
    in.eps = eps;
    in.delta = delta;
    return in;
}

// Point strictly inside a grid cell.
Point cell_centre(const Grid& g, const std::vector<std::int64_t>& cell) {
    const Box b = g.cell_box(cell);
    Point x(g.dim());
    for (int i = 0; i < g.dim(); ++i) x[i] = g.domain().is_discrete() ? b.lo[i] : 0.5 * (b.lo[i] + b.hi[i]);
    return x;
}

std::vector<std::vector<std::int64_t>> all_cells(const Grid& g) {
    std::vector<std::vector<std::int64_t>> out{{}};
    for (int i = 0; i < g.dim(); ++i) {
        std::vector<std::vector<std::int64_t>> next;
        for (const auto& c : out) {
            for (std::int64_t j = 0; j < g.side(); ++j) {
                auto cc = c;
                cc.push_back(j);
                next.push_back(cc);
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("sample budget golden values") {
    CHECK(sample_budget(BudgetFormula::L2, inputs(1, 1, 0, 0.01, std::exp(-1.0))).n == 100);
    CHECK(sample_budget(BudgetFormula::FixedGridL1, inputs(2, 1, 256, 0.1, std::exp(-1.0))).n == 51300);
    // (1+1) * 2 * 1 * log2(1/0.5)^3 + ln 2, over 0.25
    const double adaptive = (2.0 * 2.0 * 1.0 * 1.0 + std::log(2.0)) / 0.25;
    CHECK(sample_budget(BudgetFormula::AdaptiveL1, inputs(1, 1, 0, 0.5, 0.5)).n ==
          static_cast<std::int64_t>(std::ceil(adaptive)));
    BudgetInputs c = inputs(2, 1, 256, 0.1, std::exp(-1.0));
    c.C = 2.0;
    CHECK(sample_budget(BudgetFormula::FixedGridL1, c).n == 102600);
}

TEST_CASE("sample budget monotonicity") {
    for (auto f : {BudgetFormula::FixedGridL1, BudgetFormula::AdaptiveL1, BudgetFormula::L2}) {
        std::int64_t prev = -1;
        for (double eps = 0.9; eps > 0.01; eps *= 0.8) {
            const auto n = sample_budget(f, inputs(3, 2, 64, eps, 0.1)).n;
            CHECK(n >= prev);
            prev = n;
        }
        prev = -1;
        for (double delta = 0.9; delta > 1e-6; delta *= 0.5) {
            const auto n = sample_budget(f, inputs(3, 2, 64, 0.1, delta)).n;
            CHECK(n >= prev);
            prev = n;
        }
        prev = -1;
        for (int k = 1; k < 20; ++k) {
            const auto n = sample_budget(f, inputs(k, 2, 64, 0.1, 0.1)).n;
            CHECK(n >= prev);
            prev = n;
        }
        prev = -1;
        for (int d = 1; d < 6; ++d) {
            const auto n = sample_budget(f, inputs(3, d, 64, 0.1, 0.1)).n;
            CHECK(n >= prev);
            CHECK(n >= 1);
            prev = n;
        }
    }
}

TEST_CASE("sample budget argument errors") {
    CHECK_THROWS_AS(sample_budget(BudgetFormula::L2, inputs(1, 1, 0, 0.0, 0.1)), ArgumentError);
    CHECK_THROWS_AS(sample_budget(BudgetFormula::L2, inputs(1, 1, 0, 1.0, 0.1)), ArgumentError);
    CHECK_THROWS_AS(sample_budget(BudgetFormula::L2, inputs(1, 1, 0, 0.1, 1.5)), ArgumentError);
    CHECK_THROWS_AS(sample_budget(BudgetFormula::L2, inputs(0, 1, 0, 0.1, 0.1)), ArgumentError);
    CHECK_THROWS_AS(sample_budget(BudgetFormula::L2, inputs(1, 0, 0, 0.1, 0.1)), ArgumentError);
}

TEST_CASE("dyadic cover") {
    const auto c = dyadic_cover(1, 7);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == std::pair<int, std::int64_t>{0, 1});
    CHECK(c[1] == std::pair<int, std::int64_t>{1, 1});
    CHECK(c[2] == std::pair<int, std::int64_t>{1, 2});
    CHECK(c[3] == std::pair<int, std::int64_t>{0, 6});
    CHECK(dyadic_cover(0, 8).size() == 1);
    CHECK(dyadic_cover(3, 3).empty());
    for (std::int64_t lo = 0; lo < 64; ++lo) {
        for (std::int64_t hi = lo + 1; hi <= 64; ++hi) {
            const auto cov = dyadic_cover(lo, hi);
            CHECK(cov.size() <= 2 * 6);
            std::int64_t at = lo;
            for (auto [level, idx] : cov) {
                CHECK((idx << level) == at);
                at += std::int64_t{1} << level;
            }
            CHECK(at == hi);
        }
    }
}

TEST_CASE("to_hierarchical examples") {
    const Domain dom = Domain::discrete(1, 8);
    const Grid g = Grid::uniform(dom, 8);
    const Histogram dyadic = Histogram::arbitrary(dom, {Piece{Box{{1}, {5}}, 0.1}, Piece{Box{{5}, {9}}, 0.15}});
    CHECK(to_hierarchical(dyadic, g).size() == 2);

    // ranks [1,7) of M = 8
    const Histogram mid = Histogram::arbitrary(
        dom, {Piece{Box{{1}, {2}}, 0.1}, Piece{Box{{2}, {8}}, 0.1}, Piece{Box{{8}, {9}}, 0.3}});
    const Histogram h = to_hierarchical(mid, g);
    CHECK(h.size() == 1 + 4 + 1);
    CHECK(h.kind() == HistKind::Hierarchical);
    CHECK(l1_dist(h, mid) == 0.0);

    const Histogram off = Histogram::arbitrary(Domain::unit(1), {Piece{Box{{0}, {0.3}}, 1}, Piece{Box{{0.3}, {1}}, 1}});
    CHECK_THROWS_AS(to_hierarchical(off, Grid::uniform(Domain::unit(1), 4)), StructureError);
}

TEST_CASE("to_hierarchical preserves values on random inputs") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const int d = 1 + static_cast<int>(seed % 2);
        const Domain dom = Domain::discrete(d, 8);
        const Grid g = Grid::uniform(dom, 8);
        const int k = 1 + static_cast<int>(seed % 3);
        const Histogram h = gen_truth(k, dom, seed);
        const Histogram hh = to_hierarchical(h, g);
        CHECK(l1_dist(h, hh) == 0.0);
        const double bound = k * std::pow(2.0 * g.depth(), d);
        CHECK(static_cast<double>(hh.size()) <= bound);
    }
}

TEST_CASE("strictly greater region examples") {
    const Domain u = Domain::unit(1);
    const Grid g = Grid::uniform(u, 8);
    Rng rng(1);
    const Histogram f = testing::random_hierarchical(rng, g, 5);
    CHECK(strictly_greater_region(f, f).empty());

    const Histogram h = Histogram::partial_hierarchical(g, {DyadicRect{2, {0}}}, {1.0});
    const Histogram half = Histogram::hierarchical(g, {g.root()}, {0.5});
    const auto region = strictly_greater_region(h, half);
    REQUIRE(region.size() == 1);
    CHECK(region[0] == DyadicRect{2, {0}});

    const Grid other = Grid::uniform(u, 4);
    CHECK_THROWS_AS(strictly_greater_region(h, Histogram::hierarchical(other, {other.root()}, {1.0})), ConfigError);
}

TEST_CASE("strictly greater region on random pairs") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + trial % 2;
        const Grid g = Grid::uniform(Domain::unit(d), trial % 3 == 0 ? 4 : 8);
        const Histogram h = testing::random_hierarchical(rng, g, d == 1 ? 4 : 7, true);
        const Histogram f = testing::random_hierarchical(rng, g, d == 1 ? 4 : 7);
        const auto region = strictly_greater_region(h, f);
        const std::size_t k = std::max(h.size(), f.size());
        CHECK(region.size() <= 2 * k);
        for (std::size_t i = 0; i < region.size(); ++i)
            for (std::size_t j = i + 1; j < region.size(); ++j) CHECK(region[i].disjoint(region[j]));
        for (const auto& cell : all_cells(g)) {
            const Point x = cell_centre(g, cell);
            bool inside = false;
            for (const DyadicRect& r : region) inside = inside || r.contains(DyadicRect{0, cell});
            CHECK(inside == (eval(h, x) > eval(f, x)));
        }
        // l1 = 2 D_{2k} for a partial h against a full g, once the masses agree
        const double mh = total_mass(h), mf = total_mass(f);
        if (mh > 0 && mf > 0) {
            const Histogram hn = h.scaled(1.0 / mh), fn = f.scaled(1.0 / mf);
            CHECK(l1_dist(hn, fn) ==
                  doctest::Approx(2.0 * dk_distance(hn, fn, g, static_cast<int>(2 * k))).epsilon(1e-10));
        }
    }
}
