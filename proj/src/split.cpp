#include "khist/split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "khist/ddist.hpp"

namespace khist {

namespace {

void validate(const SplitParams& p) {
    if (p.k < 1) throw ArgumentError("k must be >= 1");
    if (!(p.xi > 0.0) || !std::isfinite(p.xi)) throw ArgumentError("xi must be positive");
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) throw ArgumentError("gamma must be positive");
    if (p.max_levels && *p.max_levels < 0) throw ArgumentError("max_levels must be >= 0");
    if (!(p.zero_tol >= 0.0)) throw ArgumentError("zero_tol must be >= 0");
}

struct Score {
    double a;
    double e;
};

// Selection order: e desc, level desc, index asc.
bool selection_before(const LeafScore& x, const LeafScore& y) {
    if (x.e != y.e) return x.e > y.e;
    if (x.rect.level != y.rect.level) return x.rect.level > y.rect.level;
    return x.rect.index < y.rect.index;
}

template <class Scorer>
SplitResult run_split(const Grid& grid, const SplitParams& params, Scorer&& score) {
    validate(params);
    const int rounds = std::min(grid.depth(), params.max_levels.value_or(grid.depth()));
    const auto width = static_cast<std::size_t>(split_width(params.k, params.xi));

    auto leaf_of = [&](const DyadicRect& r) {
        const Score s = score(r);
        return LeafScore{r, std::max(0.0, s.a), s.e};
    };

    std::vector<LeafScore> leaves{leaf_of(grid.root())};
    SplitTrace trace;
    for (int round = 1; round <= rounds; ++round) {
        std::sort(leaves.begin(), leaves.end(), selection_before);
        SplitIteration it;
        it.iteration = round;
        it.scores = leaves;
        std::vector<LeafScore> next;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            LeafScore& leaf = leaves[i];
            if (i < width) {
                it.chosen.push_back(leaf.rect);
                if (leaf.e > params.zero_tol && leaf.rect.level > 0) {
                    it.split.push_back(leaf.rect);
                    for (const DyadicRect& child : leaf.rect.children()) next.push_back(leaf_of(child));
                    continue;
                }
            }
            next.push_back(std::move(leaf));
        }
        trace.iterations.push_back(std::move(it));
        leaves = std::move(next);
    }

    std::sort(leaves.begin(), leaves.end(),
              [](const LeafScore& x, const LeafScore& y) { return x.rect < y.rect; });
    std::vector<DyadicRect> rects;
    std::vector<double> values;
    for (const LeafScore& leaf : leaves) {
        rects.push_back(leaf.rect);
        values.push_back(leaf.a);
    }

    const std::int64_t bound = piece_bound(params.k, params.xi, grid.dim(), grid.depth());
    if (static_cast<std::int64_t>(rects.size()) > bound) {
        throw std::logic_error("piece bound violated: " + std::to_string(rects.size()) + " > " +
                               std::to_string(bound));
    }

    SplitResult out{Histogram::hierarchical(grid, std::move(rects), std::move(values)), std::move(trace),
                    bound, 0.0, 1.0, 0};
    out.mass_before_normalization = total_mass(out.hypothesis);
    if (params.normalize_output) {
        Renormalized r = renormalize(out.hypothesis);
        out.hypothesis = std::move(r.hypothesis);
        out.scale = r.factor;
    }
    return out;
}

void append_num(std::ostringstream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace

std::int64_t split_width(int k, double xi) {
    // Guard against (1 + xi) k landing a hair above an integer.
    const double w = (1.0 + xi) * k;
    return static_cast<std::int64_t>(std::ceil(w - 1e-9 * w));
}

std::int64_t piece_bound(int k, double xi, int dim, int depth) {
    return std::max<std::int64_t>(1, split_width(k, xi) * (std::int64_t{1} << dim) * depth);
}

std::string SplitTrace::to_text() const {
    std::ostringstream os;
    for (const SplitIteration& it : iterations) {
        os << "iteration " << it.iteration << " leaves=" << it.scores.size() << "\n";
        for (const LeafScore& s : it.scores) {
            os << "  leaf " << s.rect.to_string() << " a=";
            append_num(os, s.a);
            os << " e=";
            append_num(os, s.e);
            os << "\n";
        }
        os << "  chosen";
        for (const DyadicRect& r : it.chosen) os << " " << r.to_string();
        os << "\n  split";
        for (const DyadicRect& r : it.split) os << " " << r.to_string();
        os << "\n";
    }
    return os.str();
}

SplitResult greedy_split(const Empirical& fhat, const Grid& grid, const SplitParams& params) {
    validate(params);
    auto index = std::make_shared<const SupportIndex>(fhat, grid);
    std::size_t visits = 0;
    SplitResult out = run_split(grid, params, [&](const DyadicRect& r) {
        const SparseDyadicTree tree = build_tree(index, r);
        visits += tree.visits();
        const DFitResult fit = fit_d1(tree, params.gamma);
        return Score{fit.a, fit.err};
    });
    out.node_visits = visits;
    return out;
}

Grid build_adaptive_grid(const Empirical& samples) {
    const Domain& dom = samples.domain();
    const int d = dom.dim();
    std::vector<std::vector<double>> coords(d);
    for (const Point& p : samples.points()) {
        for (int i = 0; i < d; ++i) {
            if (p[i] < dom.upper()) coords[i].push_back(p[i]);
        }
    }
    std::size_t distinct = 0;
    for (auto& c : coords) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        distinct = std::max(distinct, c.size());
    }
    std::uint64_t side = 1;
    while (side < distinct + 1) side <<= 1;

    std::vector<std::vector<double>> axes(d);
    for (int i = 0; i < d; ++i) {
        auto& ax = axes[i];
        ax.push_back(dom.lower());
        ax.insert(ax.end(), coords[i].begin(), coords[i].end());
        const double pad = coords[i].empty() ? dom.lower() : coords[i].back();
        while (ax.size() < side) ax.push_back(pad);
        ax.push_back(dom.upper());
    }
    return Grid(dom, std::move(axes));
}

SplitResult adaptive_greedy_split(const Empirical& samples, const SplitParams& params) {
    validate(params);
    return greedy_split(samples, build_adaptive_grid(samples), params);
}

SplitResult greedy_split_l2(const Empirical& g, const Grid& grid, const SplitParams& params) {
    if (!grid.domain().is_discrete()) throw UnsupportedDomainError("l2 splitting requires a discrete domain");
    validate(params);
    auto index = std::make_shared<const SupportIndex>(g, grid);
    std::size_t visits = 0;
    const double n = static_cast<double>(g.n());
    SplitResult out = run_split(grid, params, [&](const DyadicRect& r) {
        const auto entries = index->entries_in(r);
        visits += entries.size();
        const double vol = grid.volume(r);
        if (entries.empty() || !(vol > 0.0)) return Score{0.0, 0.0};
        std::int64_t count = 0;
        for (const auto& e : entries) count += e.count;
        const double a = static_cast<double>(count) / n / vol;
        double e = (vol - static_cast<double>(entries.size())) * a * a;
        for (const auto& en : entries) {
            const double diff = static_cast<double>(en.count) / n - a;
            e += diff * diff;
        }
        return Score{a, e};
    });
    out.node_visits = visits;
    return out;
}

Renormalized renormalize(const Histogram& h) {
    const double total = total_mass(h);
    if (!(total > 0.0)) throw DegenerateError("cannot renormalize a histogram with zero mass");
    const double factor = 1.0 / total;
    return Renormalized{h.scaled(factor), factor};
}

}  // namespace khist
