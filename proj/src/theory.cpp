#include "khist/theory.hpp"

#include <algorithm>
#include <cmath>

namespace khist {

namespace {

std::int64_t ceil_guarded(double x) {
    // 513 / 0.1^2 must come out as 51300, not 51301.
    return static_cast<std::int64_t>(std::ceil(x - 1e-9 * std::abs(x)));
}

// Rank of a piece vertex on a grid axis; vertices must be grid boundaries.
std::int64_t vertex_rank(const Grid& grid, int axis, double x) {
    const auto ax = grid.axis(axis);
    if (x == grid.domain().lower()) return 0;
    if (x == grid.domain().upper()) return grid.side();
    auto it = std::lower_bound(ax.begin(), ax.end(), x);
    if (it == ax.end() || *it != x) {
        throw StructureError("piece vertex " + std::to_string(x) + " is not on the grid");
    }
    return it - ax.begin();
}

void collect_cubes(const DyadicRect& cube, const std::vector<std::int64_t>& lo,
                   const std::vector<std::int64_t>& hi, std::vector<DyadicRect>& out) {
    bool inside = true;
    for (int i = 0; i < cube.dim(); ++i) {
        const std::int64_t a = cube.rank_lo(i);
        const std::int64_t b = cube.rank_hi(i);
        if (b <= lo[i] || a >= hi[i]) return;
        if (a < lo[i] || b > hi[i]) inside = false;
    }
    if (inside) {
        out.push_back(cube);
        return;
    }
    for (const DyadicRect& child : cube.children()) collect_cubes(child, lo, hi, out);
}

}  // namespace

SampleBudget sample_budget(BudgetFormula formula, const BudgetInputs& in) {
    if (!(in.eps > 0.0 && in.eps < 1.0)) throw ArgumentError("eps must lie in (0, 1)");
    if (!(in.delta > 0.0 && in.delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
    if (in.k < 1 || in.d < 1) throw ArgumentError("k and d must be >= 1");
    if (!(in.xi > 0.0)) throw ArgumentError("xi must be positive");
    if (!(in.C > 0.0)) throw ArgumentError("C must be positive");

    const double log_delta = std::log(1.0 / in.delta);
    const double spread = (1.0 + in.xi) * std::ldexp(1.0, in.d) * in.k;
    double raw = 0.0;
    switch (formula) {
        case BudgetFormula::FixedGridL1: {
            if (in.m < 1) throw ArgumentError("FixedGridL1 needs m >= 1");
            const double lm = std::log2(static_cast<double>(in.m));
            raw = in.C * (spread * std::pow(lm, in.d + 1) + log_delta) / (in.eps * in.eps);
            break;
        }
        case BudgetFormula::AdaptiveL1: {
            const double lk = std::log2(in.k / in.eps);
            raw = in.C * (in.d * spread * std::pow(lk, in.d + 2) + log_delta) / (in.eps * in.eps);
            break;
        }
        case BudgetFormula::L2:
            raw = in.C * log_delta / in.eps;
            break;
    }
    return SampleBudget{std::max<std::int64_t>(1, ceil_guarded(raw)), in, formula};
}

std::vector<std::pair<int, std::int64_t>> dyadic_cover(std::int64_t lo, std::int64_t hi) {
    std::vector<std::pair<int, std::int64_t>> out;
    while (lo < hi) {
        int level = 0;
        while (true) {
            const std::int64_t size = std::int64_t{2} << level;
            if (lo % size != 0 || lo + size > hi) break;
            ++level;
        }
        out.emplace_back(level, lo >> level);
        lo += std::int64_t{1} << level;
    }
    return out;
}

Histogram to_hierarchical(const Histogram& h, const Grid& grid) {
    if (!(h.domain() == grid.domain())) throw ConfigError("to_hierarchical: domains differ");
    const int d = grid.dim();
    std::vector<DyadicRect> leaves;
    std::vector<double> values;
    std::vector<std::int64_t> lo(d), hi(d);
    for (const Piece& p : h.pieces()) {
        bool empty = false;
        for (int i = 0; i < d; ++i) {
            lo[i] = vertex_rank(grid, i, p.box.lo[i]);
            hi[i] = vertex_rank(grid, i, p.box.hi[i]);
            empty = empty || lo[i] >= hi[i];
        }
        if (empty) continue;
        std::vector<DyadicRect> cubes;
        collect_cubes(grid.root(), lo, hi, cubes);
        for (DyadicRect& c : cubes) {
            leaves.push_back(std::move(c));
            values.push_back(p.value);
        }
    }
    if (h.is_partial()) return Histogram::partial_hierarchical(grid, std::move(leaves), std::move(values));
    return Histogram::hierarchical(grid, std::move(leaves), std::move(values));
}

std::vector<DyadicRect> strictly_greater_region(const Histogram& h, const Histogram& g) {
    if (!h.grid() || !g.grid()) throw ArgumentError("strictly_greater_region needs grid histograms");
    if (!(*h.grid() == *g.grid())) throw ConfigError("strictly_greater_region: grids differ");
    if (g.is_partial()) throw ArgumentError("strictly_greater_region: g must cover the domain");
    std::vector<DyadicRect> out;
    const auto hl = h.leaves();
    const auto gl = g.leaves();
    for (std::size_t i = 0; i < hl.size(); ++i) {
        const double hv = h.pieces()[i].value;
        for (std::size_t j = 0; j < gl.size(); ++j) {
            const double gv = g.pieces()[j].value;
            if (gl[j].contains(hl[i])) {
                if (hv > gv) out.push_back(hl[i]);
                break;  // g's leaves are disjoint: nothing else meets hl[i]
            }
            if (hl[i].contains(gl[j]) && hv > gv) out.push_back(gl[j]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace khist
