#pragma once

// Shared instance generators and brute-force references for the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "khist/core.hpp"
#include "khist/oracle.hpp"
#include "khist/synth.hpp"

namespace khist::testing {

// Random point inside a grid cell; lattice point on a discrete domain.
inline Point random_point_in_cell(Rng& rng, const Grid& grid, const std::vector<std::int64_t>& cell) {
    const Box b = grid.cell_box(cell);
    Point x(grid.dim());
    for (int i = 0; i < grid.dim(); ++i) {
        if (grid.domain().is_discrete()) {
            x[i] = b.lo[i] + static_cast<double>(uniform_below(rng, static_cast<std::uint64_t>(b.hi[i] - b.lo[i])));
        } else {
            x[i] = b.lo[i] + uniform01(rng) * (b.hi[i] - b.lo[i]);
        }
    }
    return x;
}

// s random support points (cells drawn uniformly) with counts 1..max_count.
inline Empirical random_empirical(Rng& rng, const Grid& grid, int s, int max_count = 3) {
    std::vector<Point> pts;
    std::vector<std::int64_t> counts;
    for (int j = 0; j < s; ++j) {
        std::vector<std::int64_t> cell(grid.dim());
        for (auto& c : cell) c = static_cast<std::int64_t>(uniform_below(rng, grid.side()));
        pts.push_back(random_point_in_cell(rng, grid, cell));
        counts.push_back(1 + static_cast<std::int64_t>(uniform_below(rng, max_count)));
    }
    return Empirical(grid.domain(), std::move(pts), std::move(counts));
}

// Random dyadic partition grown by splitting random leaves, at most max_leaves.
inline std::vector<DyadicRect> random_tree_leaves(Rng& rng, const Grid& grid, int max_leaves) {
    std::vector<DyadicRect> leaves{grid.root()};
    const int fan = 1 << grid.dim();
    for (int tries = 0; tries < 4 * max_leaves; ++tries) {
        if (static_cast<int>(leaves.size()) + fan - 1 > max_leaves) break;
        std::vector<std::size_t> splittable;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].level > 0) splittable.push_back(i);
        }
        if (splittable.empty() || uniform01(rng) < 0.2) break;
        const std::size_t pick = splittable[uniform_below(rng, splittable.size())];
        const DyadicRect r = leaves[pick];
        leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
        for (const DyadicRect& c : r.children()) leaves.push_back(c);
    }
    std::sort(leaves.begin(), leaves.end());
    return leaves;
}

inline Histogram random_hierarchical(Rng& rng, const Grid& grid, int max_leaves, bool partial = false) {
    auto leaves = random_tree_leaves(rng, grid, max_leaves);
    std::vector<double> values;
    std::vector<DyadicRect> kept;
    for (const DyadicRect& r : leaves) {
        if (partial && uniform01(rng) < 0.4) continue;
        kept.push_back(r);
        values.push_back(uniform01(rng) < 0.15 ? 0.0 : uniform01(rng));
    }
    return partial ? Histogram::partial_hierarchical(grid, std::move(kept), std::move(values))
                   : Histogram::hierarchical(grid, std::move(kept), std::move(values));
}

// max over <= k pairwise disjoint dyadic rectangles of |sum of node values|,
// by plain subset enumeration.
inline double brute_dk(const DyadicTable& t, const std::vector<double>& node_u, int k) {
    double best = 0.0;
    std::vector<std::size_t> chosen;
    std::function<void(std::size_t, double)> rec = [&](std::size_t from, double sum) {
        best = std::max(best, std::abs(sum));
        if (static_cast<int>(chosen.size()) == k) return;
        for (std::size_t i = from; i < t.size(); ++i) {
            bool ok = true;
            for (std::size_t c : chosen) ok = ok && t.rect(i).disjoint(t.rect(c));
            if (!ok) continue;
            chosen.push_back(i);
            rec(i + 1, sum + node_u[i]);
            chosen.pop_back();
        }
    };
    rec(0, 0.0);
    return best;
}

}  // namespace khist::testing
