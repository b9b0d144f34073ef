#include "khist/simplex.hpp"

#include <cmath>
#include <stdexcept>

#include "khist/error.hpp"

namespace khist {

LpSolution maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                    const std::vector<double>& c) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    if (b.size() != m) throw ArgumentError("simplex: row count mismatch");
    constexpr double eps = 1e-12;

    // Columns 0..n-1 structural, n..n+m-1 slack, last is the right-hand side.
    const std::size_t width = n + m + 1;
    std::vector<std::vector<double>> t(m + 1, std::vector<double>(width, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (A[i].size() != n) throw ArgumentError("simplex: column count mismatch");
        if (b[i] < 0.0) throw ArgumentError("simplex: negative right-hand side");
        for (std::size_t j = 0; j < n; ++j) t[i][j] = A[i][j];
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
        basis[i] = n + i;
    }
    for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

    LpSolution out;
    for (std::size_t iter = 0;; ++iter) {
        if (iter > 100000) throw std::logic_error("simplex: iteration limit");
        std::size_t enter = width;
        for (std::size_t j = 0; j + 1 < width; ++j) {
            if (t[m][j] < -eps) {
                enter = j;
                break;
            }
        }
        if (enter == width) break;

        std::size_t leave = m;
        double best = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] <= eps) continue;
            const double r = t[i][width - 1] / t[i][enter];
            if (leave == m || r < best - eps || (std::abs(r - best) <= eps && basis[i] < basis[leave])) {
                leave = i;
                best = r;
            }
        }
        if (leave == m) {
            out.bounded = false;
            return out;
        }

        const double piv = t[leave][enter];
        for (double& v : t[leave]) v /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = t[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }

    out.value = t[m][width - 1];
    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) out.x[basis[i]] = t[i][width - 1];
    }
    out.dual.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.dual[i] = t[m][n + i];
    return out;
}

}  // namespace khist
