#include "khist/ddist.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace khist {

namespace {

using IndexArray = std::array<std::int64_t, SupportIndex::kMaxDim>;

IndexArray decode(std::uint64_t prefix, int dim, int bits) {
    IndexArray idx{};
    for (int b = 0; b < bits; ++b) {
        for (int i = 0; i < dim; ++i) {
            idx[i] |= static_cast<std::int64_t>((prefix >> (b * dim + i)) & 1u) << b;
        }
    }
    return idx;
}

// Same product order as Grid::volume so both routes give identical doubles.
double volume_at(const Grid& grid, const IndexArray& idx, int level) {
    double vol = 1.0;
    for (int i = 0; i < grid.dim(); ++i) {
        const auto ax = grid.axis(i);
        vol *= grid.domain().length(ax[idx[i] << level], ax[(idx[i] + 1) << level]);
    }
    return vol;
}

bool index_less(const IndexArray& a, const IndexArray& b, int dim) {
    for (int i = 0; i < dim; ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

double mass_of(std::int64_t count, std::int64_t n) {
    return static_cast<double>(count) / static_cast<double>(n);
}

void require_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("gamma must be positive");
}

}  // namespace

// ---------------------------------------------------------------- SupportIndex

SupportIndex::SupportIndex(const Empirical& fhat, const Grid& grid) : grid_(grid), n_(fhat.n()) {
    if (!(fhat.domain() == grid.domain())) throw ConfigError("empirical and grid domains differ");
    if (grid.dim() > kMaxDim) throw ArgumentError("dyadic trees support at most 6 dimensions");
    if (grid.dim() * grid.depth() > 63) throw ArgumentError("grid too deep for 64-bit dyadic codes");
    entries_.reserve(fhat.support_size());
    const int d = grid.dim();
    for (std::size_t p = 0; p < fhat.support_size(); ++p) {
        const auto cell = grid.cell_of(fhat.points()[p]);
        std::uint64_t code = 0;
        for (int b = 0; b < grid.depth(); ++b) {
            for (int i = 0; i < d; ++i) {
                code |= static_cast<std::uint64_t>((cell[i] >> b) & 1) << (b * d + i);
            }
        }
        entries_.push_back(Entry{code, fhat.counts()[p]});
    }
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const Entry& a, const Entry& b) { return a.code < b.code; });
}

std::uint64_t SupportIndex::prefix_of(const DyadicRect& rect) const {
    const int d = grid_.dim();
    std::uint64_t code = 0;
    for (int b = 0; b < grid_.depth() - rect.level; ++b) {
        for (int i = 0; i < d; ++i) {
            code |= static_cast<std::uint64_t>((rect.index[i] >> b) & 1) << (b * d + i);
        }
    }
    return code;
}

DyadicRect SupportIndex::rect_of(std::uint64_t prefix, int level) const {
    const int d = grid_.dim();
    const IndexArray idx = decode(prefix, d, grid_.depth() - level);
    return DyadicRect{level, std::vector<std::int64_t>(idx.begin(), idx.begin() + d)};
}

std::span<const SupportIndex::Entry> SupportIndex::entries_in(const DyadicRect& rect) const {
    const int shift = grid_.dim() * rect.level;
    const std::uint64_t prefix = prefix_of(rect);
    const std::uint64_t lo = prefix << shift;
    const std::uint64_t hi = (prefix + 1) << shift;
    auto cmp = [](const Entry& e, std::uint64_t c) { return e.code < c; };
    auto first = std::lower_bound(entries_.begin(), entries_.end(), lo, cmp);
    auto last = std::lower_bound(first, entries_.end(), hi, cmp);
    return {first, last};
}

// ---------------------------------------------------------------- tree

DyadicRect SparseDyadicTree::rect(const TreeNode& node) const {
    return index_->rect_of(node.prefix, node.level);
}

const TreeNode* SparseDyadicTree::find(const DyadicRect& r) const {
    if (!root_.contains(r)) return nullptr;
    const std::uint64_t prefix = index_->prefix_of(r);
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), std::pair{r.level, prefix},
                               [](const TreeNode& n, const std::pair<int, std::uint64_t>& key) {
                                   return std::pair{n.level, n.prefix} < key;
                               });
    if (it != nodes_.end() && it->level == r.level && it->prefix == prefix) return &*it;
    return nullptr;
}

SparseDyadicTree build_tree(std::shared_ptr<const SupportIndex> index, const DyadicRect& region) {
    const Grid& grid = index->grid();
    grid.require_valid(region);
    const int d = grid.dim();
    const unsigned fanout = 1u << d;
    const std::uint64_t full_mask = fanout == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << fanout) - 1;

    SparseDyadicTree tree;
    tree.root_ = region;
    tree.n_ = index->n();
    tree.root_volume_ = grid.volume(region);
    const auto entries = index->entries_in(region);
    tree.index_ = std::move(index);

    if (entries.empty()) {
        tree.has_absent_ = true;
        tree.absent_volume_ = tree.root_volume_;
        tree.absent_rect_ = region;
        return tree;
    }

    IndexArray best_idx{};
    int best_level = -1;
    double best_vol = -1.0;

    for (int level = 0; level <= region.level; ++level) {
        const int shift = d * level;
        std::size_t i = 0;
        while (i < entries.size()) {
            const std::uint64_t prefix = entries[i].code >> shift;
            TreeNode node{level, prefix, 0, 0, 0.0};
            for (; i < entries.size() && (entries[i].code >> shift) == prefix; ++i) {
                node.count += entries[i].count;
                if (level > 0) node.child_mask |= std::uint64_t{1} << ((entries[i].code >> (shift - d)) & (fanout - 1));
            }
            const IndexArray idx = decode(prefix, d, grid.depth() - level);
            node.volume = volume_at(grid, idx, level);
            ++tree.visits_;

            if (level > 0 && node.child_mask != full_mask) {
                for (unsigned c = 0; c < fanout; ++c) {
                    ++tree.visits_;
                    if (node.child_mask >> c & 1u) continue;
                    IndexArray child{};
                    for (int a = 0; a < d; ++a) child[a] = 2 * idx[a] + ((c >> a) & 1u);
                    const double vol = volume_at(grid, child, level - 1);
                    const bool better = vol > best_vol ||
                                        (vol == best_vol && (level - 1 < best_level ||
                                                             (level - 1 == best_level && index_less(child, best_idx, d))));
                    if (better) {
                        best_vol = vol;
                        best_level = level - 1;
                        best_idx = child;
                    }
                }
            }
            tree.nodes_.push_back(node);
        }
    }
    if (best_level >= 0) {
        tree.has_absent_ = true;
        tree.absent_volume_ = best_vol;
        tree.absent_rect_ = DyadicRect{best_level, std::vector<std::int64_t>(best_idx.begin(), best_idx.begin() + d)};
    }
    return tree;
}

SparseDyadicTree build_tree(const Empirical& fhat, const Grid& grid, const DyadicRect& region) {
    return build_tree(std::make_shared<const SupportIndex>(fhat, grid), region);
}

// ---------------------------------------------------------------- ComputeD1 / FitD1

Discrepancy compute_d1(const SparseDyadicTree& tree, double a) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ArgumentError("a must be finite and >= 0");
    const auto nodes = tree.nodes();
    Discrepancy out;
    const TreeNode* best = nullptr;
    double best_err = -1.0;
    double best_dev = 0.0;
    for (const TreeNode& node : nodes) {
        const double dev = mass_of(node.count, tree.n()) - a * node.volume;
        const double err = std::abs(dev);
        if (err > best_err) {
            best_err = err;
            best_dev = dev;
            best = &node;
        } else if (err == best_err && node.level == best->level) {
            // Same level: order by index, which differs from Morton order.
            const int d = tree.grid().dim();
            const int bits = tree.grid().depth() - node.level;
            if (index_less(decode(node.prefix, d, bits), decode(best->prefix, d, bits), d)) {
                best_dev = dev;
                best = &node;
            }
        }
    }
    if (best != nullptr) {
        out.err = best_err;
        out.signed_dev = best_dev;
        out.witness = tree.rect(*best);
    }
    if (tree.has_absent()) {
        const double err = a * tree.max_absent_volume();
        const DyadicRect& r = tree.max_absent_rect();
        if (best == nullptr || err > out.err || (err == out.err && r < out.witness)) {
            out.err = err;
            out.signed_dev = -err;
            out.witness = r;
        }
    }
    return out;
}

Discrepancy compute_d1(const Empirical& fhat, const Grid& grid, const DyadicRect& region, double a) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ArgumentError("a must be finite and >= 0");
    return compute_d1(build_tree(fhat, grid, region), a);
}

DFitResult fit_d1(const SparseDyadicTree& tree, double gamma) {
    require_gamma(gamma);
    DFitResult out;
    out.witness = tree.root();
    if (tree.nodes().empty()) return out;

    double total = 0.0;
    double a_max = 0.0;
    for (const TreeNode& node : tree.nodes()) {
        if (node.level == 0 && node.volume > 0.0) {
            a_max = std::max(a_max, mass_of(node.count, tree.n()) / node.volume);
        }
        if (node.level == tree.root().level) total = mass_of(node.count, tree.n());
    }
    const double vmax = tree.root_volume();

    // Largest positive and negative deviation at a; the optimum lies on the
    // side of the larger one.
    auto sides = [&](double a) {
        double pos = 0.0;
        double neg = tree.has_absent() ? a * tree.max_absent_volume() : 0.0;
        for (const TreeNode& node : tree.nodes()) {
            const double dev = mass_of(node.count, tree.n()) - a * node.volume;
            pos = std::max(pos, dev);
            neg = std::max(neg, -dev);
        }
        return std::pair{pos, neg};
    };

    double lo = 0.0;
    double hi = a_max;
    while ((hi - lo) * vmax > gamma && out.steps < 200) {
        const double mid = 0.5 * (lo + hi);
        const auto [pos, neg] = sides(mid);
        ++out.steps;
        if (pos > neg) {
            lo = mid;
        } else if (pos < neg) {
            hi = mid;
        } else {
            lo = hi = mid;
        }
    }

    std::vector<double> candidates;
    if (vmax > 0.0) candidates.push_back(std::min(total / vmax, a_max));
    candidates.push_back(lo);
    candidates.push_back(hi);
    bool first = true;
    for (double a : candidates) {
        const Discrepancy disc = compute_d1(tree, a);
        if (first || disc.err < out.err) {
            out.a = a;
            out.err = disc.err;
            out.witness = disc.witness;
            first = false;
        }
    }
    return out;
}

DFitResult fit_d1(const Empirical& fhat, const Grid& grid, const DyadicRect& region, double gamma) {
    require_gamma(gamma);
    return fit_d1(build_tree(fhat, grid, region), gamma);
}

// ---------------------------------------------------------------- brute force

Discrepancy brute_d1(const Empirical& fhat, const Grid& grid, const DyadicRect& region, double a,
                     std::int64_t max_rects) {
    if (!(fhat.domain() == grid.domain())) throw ConfigError("empirical and grid domains differ");
    grid.require_valid(region);
    if (grid.rects_under(region) > max_rects) {
        throw OracleTooLarge("brute_d1: " + std::to_string(grid.rects_under(region)) +
                             " dyadic rectangles exceed the guard");
    }
    const int d = grid.dim();
    std::vector<std::vector<std::int64_t>> cells;
    cells.reserve(fhat.support_size());
    for (const Point& p : fhat.points()) cells.push_back(grid.cell_of(p));

    Discrepancy out;
    bool first = true;
    for (int level = 0; level <= region.level; ++level) {
        const int shift = region.level - level;
        std::vector<std::int64_t> from(d), to(d);
        for (int i = 0; i < d; ++i) {
            from[i] = region.index[i] << shift;
            to[i] = (region.index[i] + 1) << shift;
        }
        DyadicRect rect{level, from};
        while (true) {
            std::int64_t owned = 0;
            for (std::size_t p = 0; p < cells.size(); ++p) {
                bool inside = true;
                for (int i = 0; i < d && inside; ++i) inside = (cells[p][i] >> level) == rect.index[i];
                if (inside) owned += fhat.counts()[p];
            }
            const double dev = mass_of(owned, fhat.n()) - a * grid.volume(rect);
            if (first || std::abs(dev) > out.err) {
                out.err = std::abs(dev);
                out.signed_dev = dev;
                out.witness = rect;
                first = false;
            }
            int i = d - 1;
            while (i >= 0 && ++rect.index[i] == to[i]) {
                rect.index[i] = from[i];
                --i;
            }
            if (i < 0) break;
        }
    }
    return out;
}

double default_gamma(double eps, int k, double xi, int dim, int depth) {
    if (!(eps > 0.0) || k < 1 || !(xi > 0.0) || dim < 1) throw ArgumentError("invalid gamma inputs");
    return eps / (16.0 * k * (1.0 + xi) * std::ldexp(1.0, dim) * std::max(1, depth));
}

}  // namespace khist
