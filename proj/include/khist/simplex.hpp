#pragma once

#include <vector>

namespace khist {

struct LpSolution {
    bool bounded = true;
    double value = 0.0;
    std::vector<double> x;     // primal optimum
    std::vector<double> dual;  // one multiplier per constraint row
};

// maximize c.x subject to A x <= b, x >= 0, where b >= 0 so the origin is a
// feasible start. Dense tableau with Bland's rule; meant for tiny programs.
LpSolution maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                    const std::vector<double>& c);

}  // namespace khist
