#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "khist/core.hpp"

namespace khist {

struct SplitParams {
    int k = 1;
    double xi = 1.0;
    double gamma = 1e-4;
    std::optional<int> max_levels;  // defaults to the grid depth
    bool normalize_output = false;
    double zero_tol = 1e-12;         // e_R at or below this counts as zero
};

struct LeafScore {
    DyadicRect rect;
    double a = 0.0;
    double e = 0.0;
};

struct SplitIteration {
    int iteration = 0;
    std::vector<LeafScore> scores;   // every leaf, in selection order
    std::vector<DyadicRect> chosen;  // the J set
    std::vector<DyadicRect> split;   // members of J actually subdivided
};

struct SplitTrace {
    std::vector<SplitIteration> iterations;

    std::string to_text() const;
};

struct SplitResult {
    Histogram hypothesis;
    SplitTrace trace;
    std::int64_t piece_bound = 0;
    double mass_before_normalization = 0.0;
    double scale = 1.0;  // applied by renormalization; 1 when disabled
    std::size_t node_visits = 0;
};

// ceil((1 + xi) k) leaves are chosen per round.
std::int64_t split_width(int k, double xi);
// ceil((1 + xi) k) 2^d log M, and at least 1.
std::int64_t piece_bound(int k, double xi, int dim, int depth);

// Greedy dyadic splitting against the D-distance (l1 learner on a fixed grid).
SplitResult greedy_split(const Empirical& fhat, const Grid& grid, const SplitParams& params);

// Grid whose interior boundaries are the distinct sample coordinates, padded
// by repeating the largest one up to a power-of-two cell count.
Grid build_adaptive_grid(const Empirical& samples);

SplitResult adaptive_greedy_split(const Empirical& samples, const SplitParams& params);

// Greedy splitting with flattening fits and squared-l2 leaf errors.
SplitResult greedy_split_l2(const Empirical& g, const Grid& grid, const SplitParams& params);

struct Renormalized {
    Histogram hypothesis;
    double factor;
};

Renormalized renormalize(const Histogram& h);

}  // namespace khist
