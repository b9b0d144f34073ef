#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "khist/core.hpp"

namespace khist {

// Distinct support points of an empirical, keyed by the Morton code of their
// grid cell and sorted by it. Every dyadic rectangle owns a contiguous range.
// Bit (b * d + i) of a code is bit b of the cell index on axis i.
class SupportIndex {
public:
    struct Entry {
        std::uint64_t code;
        std::int64_t count;
    };

    static constexpr int kMaxDim = 6;

    SupportIndex(const Empirical& fhat, const Grid& grid);

    const Grid& grid() const { return grid_; }
    std::int64_t n() const { return n_; }
    std::span<const Entry> entries() const { return entries_; }
    std::span<const Entry> entries_in(const DyadicRect& rect) const;

    std::uint64_t prefix_of(const DyadicRect& rect) const;
    DyadicRect rect_of(std::uint64_t prefix, int level) const;

private:
    Grid grid_;
    std::int64_t n_;
    std::vector<Entry> entries_;
};

struct TreeNode {
    int level;
    std::uint64_t prefix;     // Morton code >> (d * level)
    std::int64_t count;       // owned sample count
    std::uint64_t child_mask; // bit c set iff child c holds a support point
    double volume;
};

// The dyadic descendants of a rectangle R that hold at least one support
// point, with their counts. Nodes are sorted by (level, prefix).
class SparseDyadicTree {
public:
    const Grid& grid() const { return index_->grid(); }
    const DyadicRect& root() const { return root_; }
    std::span<const TreeNode> nodes() const { return nodes_; }
    std::int64_t n() const { return n_; }
    double root_volume() const { return root_volume_; }
    std::size_t visits() const { return visits_; }

    DyadicRect rect(const TreeNode& node) const;
    const TreeNode* find(const DyadicRect& rect) const;

    // Largest dyadic sub-rectangle of R holding no support point; R itself
    // when the tree is empty.
    double max_absent_volume() const { return absent_volume_; }
    const DyadicRect& max_absent_rect() const { return absent_rect_; }
    bool has_absent() const { return has_absent_; }

private:
    friend SparseDyadicTree build_tree(std::shared_ptr<const SupportIndex>, const DyadicRect&);

    std::shared_ptr<const SupportIndex> index_;
    DyadicRect root_;
    std::int64_t n_ = 1;
    double root_volume_ = 0.0;
    std::vector<TreeNode> nodes_;
    std::size_t visits_ = 0;
    double absent_volume_ = 0.0;
    DyadicRect absent_rect_;
    bool has_absent_ = false;
};

struct Discrepancy {
    double err = 0.0;      // max |mass(R') - a vol(R')| over dyadic R' inside R
    DyadicRect witness;    // attains err; least (level, index) among ties
    double signed_dev = 0.0;  // mass(witness) - a vol(witness)
};

struct DFitResult {
    double a = 0.0;
    double err = 0.0;
    DyadicRect witness;
    int steps = 0;
};

SparseDyadicTree build_tree(std::shared_ptr<const SupportIndex> index, const DyadicRect& region);
SparseDyadicTree build_tree(const Empirical& fhat, const Grid& grid, const DyadicRect& region);

Discrepancy compute_d1(const SparseDyadicTree& tree, double a);
Discrepancy compute_d1(const Empirical& fhat, const Grid& grid, const DyadicRect& region, double a);

DFitResult fit_d1(const SparseDyadicTree& tree, double gamma);
DFitResult fit_d1(const Empirical& fhat, const Grid& grid, const DyadicRect& region, double gamma);

// Exhaustive reference for compute_d1 over every dyadic sub-rectangle.
Discrepancy brute_d1(const Empirical& fhat, const Grid& grid, const DyadicRect& region, double a,
                     std::int64_t max_rects = 1'000'000);

// gamma = eps / (16 k (1 + xi) 2^d log M), with log M floored at 1.
double default_gamma(double eps, int k, double xi, int dim, int depth);

}  // namespace khist
