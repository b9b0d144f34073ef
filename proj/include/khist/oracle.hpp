#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "khist/core.hpp"

namespace khist {

struct OracleGuard {
    std::int64_t max_dyadic_rects = 10'000;
    std::int64_t max_partitions = 1'000'000;
};

// Every dyadic rectangle of a grid, parents before children, with volumes and
// child links. Shared by the oracles; throws OracleTooLarge past the guard.
class DyadicTable {
public:
    DyadicTable(const Grid& grid, const OracleGuard& guard = {});

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return rects_.size(); }
    const DyadicRect& rect(std::size_t i) const { return rects_[i]; }
    double volume(std::size_t i) const { return volume_[i]; }
    std::span<const int> children(std::size_t i) const { return children_[i]; }
    std::int64_t cell(std::size_t i) const { return cell_[i]; }  // -1 above level 0

    // Per-node sums of a per-cell quantity (cells as in cell_masses).
    std::vector<double> node_sums(std::span<const double> cells) const;

private:
    Grid grid_;
    std::vector<DyadicRect> rects_;
    std::vector<double> volume_;
    std::vector<std::vector<int>> children_;
    std::vector<std::int64_t> cell_;
};

struct DkWitness {
    double value = 0.0;            // |u(U)| for the best union U
    int sign = 1;                  // +1 if u(U) >= 0
    std::vector<DyadicRect> rects; // U, sorted
};

// max over unions U of <= k pairwise disjoint dyadic rectangles of |u(U)|,
// where u is given per dyadic node (index as in the table). Nodes with
// allowed[i] == 0 cannot be picked whole (their descendants still can).
DkWitness dk_best_union(const DyadicTable& table, std::span<const double> node_u, int k,
                        std::span<const char> allowed = {});

double dk_distance(const Grid& grid, std::span<const double> cell_u, int k, const OracleGuard& guard = {});
double dk_distance(const Empirical& fhat, const Histogram& h, const Grid& grid, int k,
                   const OracleGuard& guard = {});
double dk_distance(const Histogram& f, const Histogram& g, const Grid& grid, int k,
                   const OracleGuard& guard = {});
double dk_distance(const Empirical& f, const Empirical& g, const Grid& grid, int k,
                   const OracleGuard& guard = {});

struct OracleFit {
    double value = 0.0;
    Histogram hypothesis;
    std::int64_t enumerated = 0;  // partitions or supports visited
};

// Exact min of ||h - g||_2^2 over hierarchical histograms with <= k leaves,
// by enumerating every leaf set. Discrete domains only.
OracleFit opt_hier_l2(const Empirical& g, const Grid& grid, int k, const OracleGuard& guard = {});

enum class EnumerationOrder { Forward, Reverse };

// Exact min of the D_k distance to fhat over partial hierarchical histograms
// with <= k leaves. Constants per support are solved by a cutting-plane LP.
OracleFit opt_partial_hier_dk(const Empirical& fhat, const Grid& grid, int k, const OracleGuard& guard = {},
                              EnumerationOrder order = EnumerationOrder::Forward);

// Exact min of ||h - g||_2^2 over arbitrary <= k-interval histograms on [m].
OracleFit opt_arbitrary_l2_1d(const Empirical& g, int k, const OracleGuard& guard = {});

}  // namespace khist
