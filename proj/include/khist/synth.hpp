#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "khist/core.hpp"

namespace khist {

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits.
double uniform01(Rng& rng);
// Uniform in [0, n) without modulo bias.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

// Random k-piece guillotine partition with random positive values, scaled to
// mass 1. Unit-domain cuts sit on multiples of 1/1024, discrete cuts on
// integers.
Histogram gen_truth(int k, const Domain& domain, std::uint64_t seed);

// Inverse-CDF sampling: a piece by mass, then a uniform point (or lattice
// point) inside it.
std::vector<Point> sample_points(const Histogram& h, std::int64_t n, std::uint64_t seed);
Empirical sample_from(const Histogram& h, std::int64_t n, std::uint64_t seed);

}  // namespace khist
