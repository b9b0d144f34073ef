#include "khist/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "khist/ddist.hpp"
#include "khist/simplex.hpp"

namespace khist {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_k(int k) {
    if (k < 1) throw ArgumentError("k must be >= 1");
}

// best[i][j]: largest u-sum of <= j disjoint picks inside node i.
struct UnionDp {
    const DyadicTable& table;
    std::span<const double> u;
    std::span<const char> allowed;
    int k;
    double sign;
    std::vector<std::vector<double>> best;

    bool can_take(std::size_t i) const { return allowed.empty() || allowed[i]; }

    std::vector<std::vector<double>> prefix(std::size_t i) const {
        const auto ch = table.children(i);
        std::vector<std::vector<double>> p(ch.size() + 1, std::vector<double>(k + 1, 0.0));
        for (std::size_t c = 0; c < ch.size(); ++c) {
            const auto& b = best[ch[c]];
            for (int j = 0; j <= k; ++j) {
                double v = kNegInf;
                for (int t = 0; t <= j; ++t) v = std::max(v, p[c][j - t] + b[t]);
                p[c + 1][j] = v;
            }
        }
        return p;
    }

    void run() {
        best.assign(table.size(), {});
        for (std::size_t i = table.size(); i-- > 0;) {
            auto p = prefix(i);
            std::vector<double> b = std::move(p.back());
            if (can_take(i)) {
                const double v = sign * u[i];
                for (int j = 1; j <= k; ++j) b[j] = std::max(b[j], v);
            }
            best[i] = std::move(b);
        }
    }

    void collect(std::size_t i, int j, std::vector<DyadicRect>& out) const {
        if (j == 0) return;
        const auto p = prefix(i);
        if (can_take(i) && sign * u[i] > p.back()[j]) {
            out.push_back(table.rect(i));
            return;
        }
        const auto ch = table.children(i);
        for (std::size_t c = ch.size(); c-- > 0;) {
            const auto& b = best[ch[c]];
            for (int t = 0; t <= j; ++t) {
                if (p[c][j - t] + b[t] == p[c + 1][j]) {
                    collect(ch[c], t, out);
                    j -= t;
                    break;
                }
            }
        }
    }
};

double leaf_l2_cost(const SupportIndex& index, const Grid& grid, const DyadicRect& r, double& a) {
    const auto entries = index.entries_in(r);
    const double vol = grid.volume(r);
    a = 0.0;
    if (entries.empty() || !(vol > 0.0)) return 0.0;
    const double n = static_cast<double>(index.n());
    std::int64_t count = 0;
    for (const auto& e : entries) count += e.count;
    a = static_cast<double>(count) / n / vol;
    double cost = (vol - static_cast<double>(entries.size())) * a * a;
    for (const auto& e : entries) {
        const double diff = static_cast<double>(e.count) / n - a;
        cost += diff * diff;
    }
    return cost;
}

// Number of leaf sets with exactly j leaves under each node, saturating.
double count_partitions(const DyadicTable& t, int k) {
    std::vector<std::vector<double>> e(t.size());
    for (std::size_t i = t.size(); i-- > 0;) {
        std::vector<double> acc(k + 1, 0.0);
        const auto ch = t.children(i);
        if (!ch.empty()) {
            acc[0] = 1.0;
            for (int c : ch) {
                std::vector<double> next(k + 1, 0.0);
                for (int a = 0; a <= k; ++a) {
                    if (acc[a] == 0.0) continue;
                    for (int b = 1; a + b <= k; ++b) next[a + b] += acc[a] * e[c][b];
                }
                acc = std::move(next);
            }
            acc[0] = 0.0;
        }
        if (k >= 1) acc[1] += 1.0;
        e[i] = std::move(acc);
    }
    return std::accumulate(e[0].begin(), e[0].end(), 0.0);
}

}  // namespace

DyadicTable::DyadicTable(const Grid& grid, const OracleGuard& guard) : grid_(grid) {
    const DyadicRect root = grid.root();
    const std::int64_t total = grid.rects_under(root);
    if (total > guard.max_dyadic_rects) {
        throw OracleTooLarge("grid has " + std::to_string(total) + " dyadic rectangles, guard is " +
                             std::to_string(guard.max_dyadic_rects));
    }
    const int d = grid.dim();
    const std::int64_t side = grid.side();
    rects_.push_back(root);
    for (std::size_t i = 0; i < rects_.size(); ++i) {
        const DyadicRect r = rects_[i];
        volume_.push_back(grid.volume(r));
        std::vector<int> ch;
        if (r.level > 0) {
            for (DyadicRect& c : r.children()) {
                ch.push_back(static_cast<int>(rects_.size()));
                rects_.push_back(std::move(c));
            }
            cell_.push_back(-1);
        } else {
            std::int64_t flat = 0;
            for (int a = 0; a < d; ++a) flat = flat * side + r.index[a];
            cell_.push_back(flat);
        }
        children_.push_back(std::move(ch));
    }
}

std::vector<double> DyadicTable::node_sums(std::span<const double> cells) const {
    std::vector<double> out(rects_.size(), 0.0);
    for (std::size_t i = rects_.size(); i-- > 0;) {
        if (cell_[i] >= 0) {
            out[i] = cells[cell_[i]];
        } else {
            double s = 0.0;
            for (int c : children_[i]) s += out[c];
            out[i] = s;
        }
    }
    return out;
}

DkWitness dk_best_union(const DyadicTable& table, std::span<const double> node_u, int k,
                        std::span<const char> allowed) {
    require_k(k);
    if (node_u.size() != table.size()) throw ArgumentError("dk_best_union: one value per node expected");
    UnionDp pos{table, node_u, allowed, k, 1.0, {}};
    UnionDp neg{table, node_u, allowed, k, -1.0, {}};
    pos.run();
    neg.run();
    const bool use_pos = pos.best[0][k] >= neg.best[0][k];
    const UnionDp& dp = use_pos ? pos : neg;
    DkWitness w;
    w.value = dp.best[0][k];
    w.sign = use_pos ? 1 : -1;
    dp.collect(0, k, w.rects);
    std::sort(w.rects.begin(), w.rects.end());
    return w;
}

double dk_distance(const Grid& grid, std::span<const double> cell_u, int k, const OracleGuard& guard) {
    require_k(k);
    if (static_cast<std::int64_t>(cell_u.size()) != grid.cell_count()) {
        throw ArgumentError("dk_distance: one value per grid cell expected");
    }
    const DyadicTable table(grid, guard);
    const auto u = table.node_sums(cell_u);
    return dk_best_union(table, u, k).value;
}

namespace {

template <class A, class B>
double dk_of_difference(const A& a, const B& b, const Grid& grid, int k, const OracleGuard& guard) {
    if (!(a.domain() == grid.domain()) || !(b.domain() == grid.domain())) {
        throw ConfigError("dk_distance: domain mismatch");
    }
    // Guard first: cell_masses allocates M^d doubles.
    const DyadicTable table(grid, guard);
    std::vector<double> u = cell_masses(grid, a);
    const std::vector<double> v = cell_masses(grid, b);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= v[i];
    require_k(k);
    return dk_best_union(table, table.node_sums(u), k).value;
}

}  // namespace

double dk_distance(const Empirical& fhat, const Histogram& h, const Grid& grid, int k, const OracleGuard& guard) {
    return dk_of_difference(fhat, h, grid, k, guard);
}

double dk_distance(const Histogram& f, const Histogram& g, const Grid& grid, int k, const OracleGuard& guard) {
    return dk_of_difference(f, g, grid, k, guard);
}

double dk_distance(const Empirical& f, const Empirical& g, const Grid& grid, int k, const OracleGuard& guard) {
    return dk_of_difference(f, g, grid, k, guard);
}

OracleFit opt_hier_l2(const Empirical& g, const Grid& grid, int k, const OracleGuard& guard) {
    require_k(k);
    if (!(g.domain() == grid.domain())) throw ConfigError("opt_hier_l2: domain mismatch");
    if (!grid.domain().is_discrete()) throw UnsupportedDomainError("opt_hier_l2 requires a discrete domain");
    const DyadicTable table(grid, guard);
    const double partitions = count_partitions(table, k);
    if (partitions > static_cast<double>(guard.max_partitions)) {
        throw OracleTooLarge("opt_hier_l2: " + std::to_string(partitions) + " partitions exceed the guard");
    }

    const SupportIndex index(g, grid);
    std::vector<double> cost(table.size()), value(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) cost[i] = leaf_l2_cost(index, grid, table.rect(i), value[i]);

    const std::size_t fan = std::size_t{1} << grid.dim();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_leaves, chosen, pending{0};
    std::int64_t visited = 0;

    // Each pending node becomes a leaf or is replaced by its children.
    auto rec = [&](auto&& self, double acc) -> void {
        if (pending.empty()) {
            ++visited;
            if (acc < best) {
                best = acc;
                best_leaves = chosen;
            }
            return;
        }
        const int node = pending.back();
        pending.pop_back();
        if (chosen.size() + pending.size() + 1 <= static_cast<std::size_t>(k)) {
            chosen.push_back(node);
            self(self, acc + cost[node]);
            chosen.pop_back();
        }
        const auto ch = table.children(node);
        if (!ch.empty() && chosen.size() + pending.size() + fan <= static_cast<std::size_t>(k)) {
            pending.insert(pending.end(), ch.rbegin(), ch.rend());
            self(self, acc);
            pending.resize(pending.size() - ch.size());
        }
        pending.push_back(node);
    };
    rec(rec, 0.0);

    std::sort(best_leaves.begin(), best_leaves.end(),
              [&](int x, int y) { return table.rect(x) < table.rect(y); });
    std::vector<DyadicRect> leaves;
    std::vector<double> values;
    for (int i : best_leaves) {
        leaves.push_back(table.rect(i));
        values.push_back(value[i]);
    }
    return OracleFit{best, Histogram::hierarchical(grid, std::move(leaves), std::move(values)), visited};
}

namespace {

struct Cut {
    std::vector<double> coef;
    double mass;
    int sign;
};

struct SupportFit {
    double value;
    std::vector<double> a;
};

class PartialDkSolver {
public:
    PartialDkSolver(const DyadicTable& table, std::vector<double> mass, int k)
        : table_(table), mass_(std::move(mass)), k_(k) {}

    double empty_value() const { return dk_best_union(table_, mass_, k_).value; }

    // D_k mass outside the support: a lower bound for any constants on it.
    double outside_bound(const std::vector<int>& support) const {
        std::vector<char> allowed(table_.size(), 1);
        for (std::size_t i = 0; i < table_.size(); ++i) {
            for (int s : support) {
                if (!table_.rect(i).disjoint(table_.rect(s))) {
                    allowed[i] = 0;
                    break;
                }
            }
        }
        return dk_best_union(table_, mass_, k_, allowed).value;
    }

    SupportFit solve(const std::vector<int>& support) const {
        const std::size_t S = support.size();
        std::vector<std::vector<double>> coef(table_.size(), std::vector<double>(S, 0.0));
        for (std::size_t i = 0; i < table_.size(); ++i) {
            const DyadicRect& r = table_.rect(i);
            for (std::size_t s = 0; s < S; ++s) {
                const DyadicRect& q = table_.rect(support[s]);
                if (q.contains(r)) coef[i][s] = table_.volume(i);
                else if (r.contains(q)) coef[i][s] = table_.volume(support[s]);
            }
        }

        std::vector<Cut> cuts;
        for (int node : support) {
            for (int sign : {1, -1}) cuts.push_back(Cut{coef[node], mass_[node], sign});
        }

        std::vector<double> u(table_.size());
        for (int round = 0;; ++round) {
            if (round > 10000) throw std::logic_error("opt_partial_hier_dk: cutting planes did not converge");
            // Dual of: min t s.t. sign (mass - coef.a) <= t, a >= 0, t >= 0.
            const std::size_t R = cuts.size();
            std::vector<std::vector<double>> A(S + 1, std::vector<double>(R, 0.0));
            std::vector<double> b(S + 1, 0.0), obj(R);
            b[S] = 1.0;
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t s = 0; s < S; ++s) A[s][r] = cuts[r].sign * cuts[r].coef[s];
                A[S][r] = 1.0;
                obj[r] = cuts[r].sign * cuts[r].mass;
            }
            const LpSolution lp = maximize(A, b, obj);
            if (!lp.bounded) throw std::logic_error("opt_partial_hier_dk: unbounded dual");
            std::vector<double> a(S);
            for (std::size_t s = 0; s < S; ++s) a[s] = std::max(0.0, lp.dual[s]);
            const double t = lp.dual[S];

            for (std::size_t i = 0; i < table_.size(); ++i) {
                double h = 0.0;
                for (std::size_t s = 0; s < S; ++s) h += a[s] * coef[i][s];
                u[i] = mass_[i] - h;
            }
            const DkWitness w = dk_best_union(table_, u, k_);
            if (w.value <= t + 1e-12) return SupportFit{w.value, std::move(a)};

            Cut cut{std::vector<double>(S, 0.0), 0.0, w.sign};
            for (const DyadicRect& r : w.rects) {
                const std::size_t i = index_of(r);
                for (std::size_t s = 0; s < S; ++s) cut.coef[s] += coef[i][s];
                cut.mass += mass_[i];
            }
            cuts.push_back(std::move(cut));
        }
    }

private:
    std::size_t index_of(const DyadicRect& r) const {
        if (lookup_.empty()) {
            for (std::size_t i = 0; i < table_.size(); ++i) lookup_.emplace(table_.rect(i), i);
        }
        return lookup_.at(r);
    }

    const DyadicTable& table_;
    std::vector<double> mass_;
    int k_;
    mutable std::map<DyadicRect, std::size_t> lookup_;
};

}  // namespace

OracleFit opt_partial_hier_dk(const Empirical& fhat, const Grid& grid, int k, const OracleGuard& guard,
                              EnumerationOrder order) {
    require_k(k);
    if (!(fhat.domain() == grid.domain())) throw ConfigError("opt_partial_hier_dk: domain mismatch");
    const DyadicTable table(grid, guard);
    PartialDkSolver solver(table, table.node_sums(cell_masses(grid, fhat)), k);

    std::vector<int> candidates;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table.volume(i) > 0.0) candidates.push_back(static_cast<int>(i));
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](int x, int y) { return table.rect(x) < table.rect(y); });
    if (order == EnumerationOrder::Reverse) std::reverse(candidates.begin(), candidates.end());

    double best = solver.empty_value();
    std::vector<int> best_support;
    std::vector<double> best_a;
    std::int64_t visited = 1;
    std::vector<int> support;

    auto rec = [&](auto&& self, std::size_t from) -> void {
        for (std::size_t c = from; c < candidates.size(); ++c) {
            const int node = candidates[c];
            bool ok = true;
            for (int s : support) ok = ok && table.rect(node).disjoint(table.rect(s));
            if (!ok) continue;
            support.push_back(node);
            if (++visited > guard.max_partitions) {
                throw OracleTooLarge("opt_partial_hier_dk: supports exceed the guard");
            }
            if (solver.outside_bound(support) < best) {
                SupportFit fit = solver.solve(support);
                if (fit.value < best) {
                    best = fit.value;
                    best_support = support;
                    best_a = std::move(fit.a);
                }
            }
            if (support.size() < static_cast<std::size_t>(k)) self(self, c + 1);
            support.pop_back();
        }
    };
    rec(rec, 0);

    std::vector<std::size_t> perm(best_support.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t x, std::size_t y) { return table.rect(best_support[x]) < table.rect(best_support[y]); });
    std::vector<DyadicRect> leaves;
    std::vector<double> values;
    for (std::size_t p : perm) {
        leaves.push_back(table.rect(best_support[p]));
        values.push_back(best_a[p]);
    }
    return OracleFit{best, Histogram::partial_hierarchical(grid, std::move(leaves), std::move(values)), visited};
}

OracleFit opt_arbitrary_l2_1d(const Empirical& g, int k, const OracleGuard& guard) {
    require_k(k);
    const Domain& dom = g.domain();
    if (!dom.is_discrete()) throw UnsupportedDomainError("opt_arbitrary_l2_1d requires a discrete domain");
    if (dom.dim() != 1) throw ArgumentError("opt_arbitrary_l2_1d is one-dimensional");
    const std::int64_t m = dom.m();
    if (m > guard.max_dyadic_rects) throw OracleTooLarge("opt_arbitrary_l2_1d: m exceeds the guard");

    std::vector<double> p(m, 0.0);
    for (std::size_t i = 0; i < g.support_size(); ++i) {
        p[static_cast<std::int64_t>(g.points()[i][0]) - 1] += g.mass_of(i);
    }
    std::vector<double> s1(m + 1, 0.0), s2(m + 1, 0.0);
    for (std::int64_t x = 0; x < m; ++x) {
        s1[x + 1] = s1[x] + p[x];
        s2[x + 1] = s2[x] + p[x] * p[x];
    }
    auto cost = [&](std::int64_t i, std::int64_t j) {
        const double a = s1[j] - s1[i];
        return std::max(0.0, s2[j] - s2[i] - a * a / static_cast<double>(j - i));
    };

    const int kk = static_cast<int>(std::min<std::int64_t>(k, m));
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(kk + 1, std::vector<double>(m + 1, inf));
    std::vector<std::vector<std::int64_t>> arg(kk + 1, std::vector<std::int64_t>(m + 1, 0));
    dp[0][0] = 0.0;
    for (int c = 1; c <= kk; ++c) {
        for (std::int64_t j = 1; j <= m; ++j) {
            for (std::int64_t i = c - 1; i < j; ++i) {
                if (dp[c - 1][i] == inf) continue;
                const double v = dp[c - 1][i] + cost(i, j);
                if (v < dp[c][j]) {
                    dp[c][j] = v;
                    arg[c][j] = i;
                }
            }
        }
    }
    int pieces = 1;
    for (int c = 2; c <= kk; ++c) {
        if (dp[c][m] < dp[pieces][m]) pieces = c;
    }

    std::vector<Piece> out;
    for (std::int64_t j = m, c = pieces; c > 0; --c) {
        const std::int64_t i = arg[c][j];
        const double len = static_cast<double>(j - i);
        out.push_back(Piece{Box{{static_cast<double>(i + 1)}, {static_cast<double>(j + 1)}},
                            (s1[j] - s1[i]) / len});
        j = i;
    }
    std::reverse(out.begin(), out.end());
    return OracleFit{dp[pieces][m], Histogram::arbitrary(dom, std::move(out)), m * kk};
}

}  // namespace khist
