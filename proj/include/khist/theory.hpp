#pragma once

#include <cstdint>
#include <vector>

#include "khist/core.hpp"

namespace khist {

enum class BudgetFormula { FixedGridL1, AdaptiveL1, L2 };

struct BudgetInputs {
    int k = 1;
    int d = 1;
    std::int64_t m = 0;  // grid side; used by FixedGridL1 only
    double eps = 0.1;
    double delta = 0.1;
    double xi = 1.0;
    double C = 1.0;
};

struct SampleBudget {
    std::int64_t n = 0;
    BudgetInputs inputs;
    BudgetFormula formula = BudgetFormula::L2;
};

// Sample sizes from the VC bounds. Grid and k/eps logs are base 2, ln(1/delta)
// is natural.
//   FixedGridL1: C ((1+xi) 2^d k log^{d+1} m + ln(1/delta)) / eps^2
//   AdaptiveL1:  C ((1+xi) d 2^d k log^{d+2}(k/eps) + ln(1/delta)) / eps^2
//   L2:          C ln(1/delta) / eps
SampleBudget sample_budget(BudgetFormula formula, const BudgetInputs& in);

// Canonical decomposition of the rank range [lo, hi) of a side-M axis into
// maximal aligned dyadic blocks, as (level, index) pairs.
std::vector<std::pair<int, std::int64_t>> dyadic_cover(std::int64_t lo, std::int64_t hi);

// Refines an arbitrary histogram whose vertices lie on the grid into a
// hierarchical one with the same values everywhere.
Histogram to_hierarchical(const Histogram& h, const Grid& grid);

// {x : h(x) > g(x)} for a partial hierarchical h and a hierarchical g on the
// same grid, as disjoint dyadic rectangles.
std::vector<DyadicRect> strictly_greater_region(const Histogram& h, const Histogram& g);

}  // namespace khist
