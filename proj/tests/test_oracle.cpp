#include <doctest.h>

#include <limits>

#include "khist/ddist.hpp"
#include "khist/oracle.hpp"
#include "khist/split.hpp"
#include "support.hpp"

using namespace khist;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent reference: min l2 cost of a dyadic tree partition with <= k
// leaves, by a knapsack over the tree.
double tree_dp_l2(const Empirical& g, const Grid& grid, int k) {
    const DyadicTable t(grid);
    std::vector<std::vector<double>> best(t.size());
    for (std::size_t i = t.size(); i-- > 0;) {
        const Box b = grid.box(t.rect(i));
        const double vol = volume(b, g.domain());
        double leaf = 0.0;
        if (vol > 0) {
            const double a = flatten(g, b);
            double inside = 0.0;
            for (std::size_t p = 0; p < g.support_size(); ++p) {
                if (box_contains(b, g.points()[p], g.domain())) {
                    leaf += std::pow(g.mass_of(p) - a, 2);
                    inside += 1.0;
                }
            }
            leaf += (vol - inside) * a * a;
        }
        std::vector<double> acc(k + 1, kInf);
        const auto ch = t.children(i);
        if (!ch.empty()) {
            acc[0] = 0.0;
            for (int c : ch) {
                std::vector<double> next(k + 1, kInf);
                for (int x = 0; x <= k; ++x)
                    for (int y = 1; x + y <= k; ++y)
                        if (acc[x] < kInf && best[c][y] < kInf) next[x + y] = std::min(next[x + y], acc[x] + best[c][y]);
                acc = std::move(next);
            }
            acc[0] = kInf;
        }
        for (int j = 1; j <= k; ++j) acc[j] = std::min(acc[j], leaf);
        for (int j = 1; j <= k; ++j) acc[j] = std::min(acc[j], acc[j - 1]);
        best[i] = std::move(acc);
    }
    return best[0][k];
}

// min over <= k interval partitions of [m], by enumerating cut sets.
double brute_intervals_l2(const Empirical& g, int k) {
    const std::int64_t m = g.domain().m();
    std::vector<double> p(m, 0.0);
    for (std::size_t i = 0; i < g.support_size(); ++i) p[static_cast<std::int64_t>(g.points()[i][0]) - 1] += g.mass_of(i);
    double best = kInf;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (m - 1)); ++mask) {
        if (std::popcount(mask) + 1 > k) continue;
        double cost = 0.0;
        std::int64_t start = 0;
        for (std::int64_t x = 1; x <= m; ++x) {
            if (x == m || (mask >> (x - 1) & 1)) {
                double s = 0.0;
                for (std::int64_t y = start; y < x; ++y) s += p[y];
                const double a = s / static_cast<double>(x - start);
                for (std::int64_t y = start; y < x; ++y) cost += (p[y] - a) * (p[y] - a);
                start = x;
            }
        }
        best = std::min(best, cost);
    }
    return best;
}

Histogram constant(const Grid& g, double a) { return Histogram::hierarchical(g, {g.root()}, {a}); }

}  // namespace

TEST_CASE("dyadic table") {
    const DyadicTable t(Grid::uniform(Domain::unit(2), 8));
    CHECK(t.size() == 85);
    CHECK(t.rect(0).level == 3);
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (int c : t.children(i)) CHECK(static_cast<std::size_t>(c) > i);
    }
    OracleGuard small;
    small.max_dyadic_rects = 84;
    CHECK_THROWS_AS(DyadicTable(Grid::uniform(Domain::unit(2), 8), small), OracleTooLarge);
}

TEST_CASE("dk_distance basics") {
    const Grid g = Grid::uniform(Domain::unit(2), 4);
    std::vector<double> zero(16, 0.0);
    CHECK(dk_distance(g, zero, 3) == 0.0);
    CHECK_THROWS_AS(dk_distance(g, zero, 0), ArgumentError);

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const Grid gg = Grid::uniform(trial % 2 ? Domain::unit(1) : Domain::discrete(2, 8), trial % 2 ? 8 : 4);
        const Empirical e = testing::random_empirical(rng, gg, 1 + trial % 10);
        const double a = uniform01(rng) * 2.0 / gg.volume(gg.root());
        CHECK(dk_distance(e, constant(gg, a), gg, 1) ==
              doctest::Approx(brute_d1(e, gg, gg.root(), a).err).epsilon(1e-12));
    }
}

TEST_CASE("dk_distance matches subset enumeration") {
    Rng rng(5);
    for (int trial = 0; trial < 120; ++trial) {
        const int d = 1 + trial % 2;
        const Grid g = Grid::uniform(Domain::unit(d), d == 1 ? 8 : 4);
        const DyadicTable t(g);
        std::vector<double> cells(static_cast<std::size_t>(g.cell_count()));
        for (double& c : cells) c = uniform01(rng) - 0.5;
        const auto node_u = t.node_sums(cells);
        double prev = 0.0;
        for (int k = 1; k <= 4; ++k) {
            const double fast = dk_distance(g, cells, k);
            CHECK(fast == doctest::Approx(testing::brute_dk(t, node_u, k)).epsilon(1e-12));
            CHECK(fast >= prev);
            prev = fast;
            const DkWitness w = dk_best_union(t, node_u, k);
            CHECK(static_cast<int>(w.rects.size()) <= k);
            double sum = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i)
                for (const DyadicRect& r : w.rects)
                    if (t.rect(i) == r) sum += node_u[i];
            CHECK(w.sign * sum == doctest::Approx(w.value).epsilon(1e-12));
        }
    }
}

TEST_CASE("hierarchical difference identity") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 2;
        const Grid g = Grid::uniform(Domain::unit(d), 8);
        // the identity needs equal total mass
        Histogram f = testing::random_hierarchical(rng, g, d == 1 ? 3 : 7);
        Histogram h = testing::random_hierarchical(rng, g, d == 1 ? 3 : 7);
        if (total_mass(f) <= 0 || total_mass(h) <= 0) continue;
        f = f.scaled(1.0 / total_mass(f));
        h = h.scaled(1.0 / total_mass(h));
        const int k = static_cast<int>(std::max(f.size(), h.size()));
        CHECK(l1_dist(f, h) == doctest::Approx(2.0 * dk_distance(f, h, g, 2 * k)).epsilon(1e-12));
    }
}

TEST_CASE("opt_hier_l2 examples") {
    const Grid g2 = Grid::uniform(Domain::discrete(1, 2), 2);
    const Empirical e(g2.domain(), {{1}, {2}}, {3, 1});
    const OracleFit one = opt_hier_l2(e, g2, 1);
    CHECK(one.value == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(one.hypothesis.size() == 1);
    CHECK(opt_hier_l2(e, g2, 2).value == 0.0);

    Rng rng(2);
    const Grid g = Grid::uniform(Domain::discrete(2, 4), 4);
    const Empirical r = testing::random_empirical(rng, g, 6);
    CHECK(opt_hier_l2(r, g, 16).value == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(opt_hier_l2(r, Grid::uniform(Domain::unit(2), 4), 1), ConfigError);
    const Grid gu = Grid::uniform(Domain::unit(1), 4);
    CHECK_THROWS_AS(opt_hier_l2(Empirical::from_samples(gu.domain(), std::vector<Point>{{0.1}}), gu, 1),
                    UnsupportedDomainError);
    OracleGuard tiny;
    tiny.max_partitions = 3;
    CHECK_THROWS_AS(opt_hier_l2(r, g, 16, tiny), OracleTooLarge);
}

TEST_CASE("opt_hier_l2 agrees with a tree DP and bounds heuristics") {
    Rng rng(19);
    for (int trial = 0; trial < 80; ++trial) {
        const int d = 1 + trial % 2;
        const Grid g = Grid::uniform(Domain::discrete(d, d == 1 ? 16 : 8), d == 1 ? 8 : 4);
        const Empirical e = testing::random_empirical(rng, g, 1 + trial % 12);
        for (int k = 1; k <= (d == 1 ? 5 : 7); ++k) {
            const OracleFit fit = opt_hier_l2(e, g, k);
            CHECK(fit.value == doctest::Approx(tree_dp_l2(e, g, k)).epsilon(1e-12));
            CHECK(fit.hypothesis.size() <= static_cast<std::size_t>(k));
            CHECK(l2_sq_dist(e, fit.hypothesis) == doctest::Approx(fit.value).epsilon(1e-12));
            const Histogram other = testing::random_hierarchical(rng, g, k);
            CHECK(fit.value <= l2_sq_dist(e, other) + 1e-15);
        }
    }
}

TEST_CASE("opt_arbitrary_l2_1d") {
    Rng rng(29);
    for (int trial = 0; trial < 60; ++trial) {
        const Domain dom = Domain::discrete(1, 8);
        const Grid g = Grid::uniform(dom, 8);
        const Empirical e = testing::random_empirical(rng, g, 1 + trial % 8);
        for (int k = 1; k <= 4; ++k) {
            const OracleFit fit = opt_arbitrary_l2_1d(e, k);
            CHECK(fit.value == doctest::Approx(brute_intervals_l2(e, k)).epsilon(1e-12));
            CHECK(fit.value <= opt_hier_l2(e, g, k).value + 1e-15);
            CHECK(l2_sq_dist(e, fit.hypothesis) == doctest::Approx(fit.value).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(opt_arbitrary_l2_1d(Empirical::from_samples(Domain::discrete(2, 4), std::vector<Point>{{1, 1}}), 1),
                    ArgumentError);
}

TEST_CASE("opt_partial_hier_dk examples") {
    const Grid g4 = Grid::uniform(Domain::discrete(1, 4), 4);
    const Empirical ex(g4.domain(), {{1}, {2}, {4}}, {2, 1, 1});
    const OracleFit fwd = opt_partial_hier_dk(ex, g4, 1, {}, EnumerationOrder::Forward);
    const OracleFit rev = opt_partial_hier_dk(ex, g4, 1, {}, EnumerationOrder::Reverse);
    CHECK(fwd.value == doctest::Approx(rev.value).epsilon(1e-12));
    MESSAGE("OPT~ for counts (2,1,0,1)/4, k=1: " << fwd.value);
    CHECK(fwd.value <= fit_d1(ex, g4, g4.root(), 1e-9).err + 1e-9);

    const Empirical point = Empirical::from_samples(g4.domain(), std::vector<Point>{{3}});
    const OracleFit p = opt_partial_hier_dk(point, g4, 1);
    CHECK(p.value == doctest::Approx(0.0).epsilon(1e-12));
    REQUIRE(p.hypothesis.size() == 1);
    CHECK(p.hypothesis.leaves()[0] == DyadicRect{0, {2}});
    CHECK(p.hypothesis.pieces()[0].value == doctest::Approx(1.0).epsilon(1e-12));

    // fhat exactly a 2-piece hierarchical histogram
    const Empirical two(g4.domain(), {{1}, {2}, {3}, {4}}, {3, 3, 1, 1});
    CHECK(opt_partial_hier_dk(two, g4, 2).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("opt_partial_hier_dk is exact and consistent") {
    Rng rng(37);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 + trial % 2;
        const Grid g = Grid::uniform(Domain::unit(d), d == 1 ? 8 : 4);
        const Empirical e = testing::random_empirical(rng, g, 1 + trial % 10);
        const int k = 1 + trial % 3;
        const OracleFit fwd = opt_partial_hier_dk(e, g, k);
        const OracleFit rev = opt_partial_hier_dk(e, g, k, {}, EnumerationOrder::Reverse);
        CHECK(fwd.value == doctest::Approx(rev.value).epsilon(1e-12));
        CHECK(dk_distance(e, fwd.hypothesis, g, k) == doctest::Approx(fwd.value).epsilon(1e-12));
        CHECK(fwd.hypothesis.size() <= static_cast<std::size_t>(k));
        // no random partial hierarchical candidate does better
        for (int c = 0; c < 10; ++c) {
            const Histogram cand = testing::random_hierarchical(rng, g, k, true);
            if (cand.size() <= static_cast<std::size_t>(k)) CHECK(fwd.value <= dk_distance(e, cand, g, k) + 1e-12);
        }
    }
}

TEST_CASE("opt_partial_hier_dk against a dense scan for one rectangle") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Grid g = Grid::uniform(Domain::unit(1), 4);
        const Empirical e = testing::random_empirical(rng, g, 1 + trial % 6);
        const OracleFit fit = opt_partial_hier_dk(e, g, 1);
        // scan every support rectangle at mass resolution 1e-4
        double best = dk_distance(e, Histogram::partial_hierarchical(g, {}, {}), g, 1);
        const DyadicTable t(g);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double vol = t.volume(i);
            for (double m = 0.0; m <= 2.0 + 1e-12; m += 1e-4) {  // the best mass can exceed 1
                const Histogram h = Histogram::partial_hierarchical(g, {t.rect(i)}, {m / vol});
                best = std::min(best, dk_distance(e, h, g, 1));
            }
        }
        CHECK(fit.value <= best + 1e-12);
        CHECK(best <= fit.value + 1e-4);
    }
}
