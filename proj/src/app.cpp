#include "khist/app.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include "khist/ddist.hpp"
#include "khist/io.hpp"
#include "khist/oracle.hpp"
#include "khist/split.hpp"
#include "khist/synth.hpp"
#include "khist/theory.hpp"

namespace khist {

using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
public:
    double lap_ms() {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void validate_common(const RunConfig& cfg) {
    if (cfg.k < 1) throw ArgumentError("--k must be >= 1");
    if (!(cfg.xi > 0.0)) throw ArgumentError("--xi must be positive");
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ArgumentError("--eps must lie in (0, 1)");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ArgumentError("--delta must lie in (0, 1)");
    if (cfg.gamma && !(*cfg.gamma > 0.0)) throw ArgumentError("--gamma must be positive");
    if (!(cfg.C > 0.0)) throw ArgumentError("--C must be positive");
    if (cfg.metric != "l1" && cfg.metric != "l2") throw ArgumentError("--metric must be l1 or l2");
    if (!cfg.grid.empty() && cfg.grid != "adaptive" && cfg.grid != "fixed") {
        throw ArgumentError("--grid must be adaptive or fixed");
    }
}

Grid fixed_grid(const Domain& dom, std::optional<std::int64_t> side) {
    std::int64_t s = 64;
    if (side) {
        s = *side;
    } else if (dom.is_discrete()) {
        s = dom.m() & -dom.m();  // largest power of two dividing m
    }
    return Grid::uniform(dom, s);
}

json grid_summary(const Grid& g) {
    json zero = json::array();
    for (int i = 0; i < g.dim(); ++i) {
        const auto ax = g.axis(i);
        std::int64_t z = 0;
        for (std::size_t j = 0; j + 1 < ax.size(); ++j) z += ax[j] == ax[j + 1];
        zero.push_back(z);
    }
    return json{{"side", g.side()}, {"depth", g.depth()}, {"zero_width_cells", zero}};
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Small grids only: the exact oracle enumerates every dyadic rectangle.
std::optional<double> small_dk(const Empirical& fhat, const Histogram& h, const Grid& grid, int k) {
    try {
        return dk_distance(fhat, h, grid, k);
    } catch (const OracleTooLarge&) {
        return std::nullopt;
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + path);
    out << text;
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    return json{{"command", cfg.command},
                {"in", cfg.in},
                {"out", cfg.out},
                {"truth", cfg.truth},
                {"samples", cfg.samples},
                {"dump", cfg.dump},
                {"domain", cfg.domain},
                {"dim", cfg.dim},
                {"m", cfg.m},
                {"k", cfg.k},
                {"xi", cfg.xi},
                {"eps", cfg.eps},
                {"delta", cfg.delta},
                {"gamma", number_or_null(cfg.gamma)},
                {"seed", cfg.seed},
                {"metric", cfg.metric},
                {"grid", cfg.grid},
                {"side", cfg.side ? json(*cfg.side) : json(nullptr)},
                {"normalize", cfg.normalize},
                {"C", cfg.C},
                {"n", cfg.n}};
}

std::optional<Domain> config_domain(const RunConfig& cfg) {
    if (cfg.domain.empty()) return std::nullopt;
    if (cfg.domain == "unit") return Domain::unit(cfg.dim);
    if (cfg.domain == "discrete") return Domain::discrete(cfg.dim, cfg.m);
    throw ArgumentError("--domain must be unit or discrete");
}

LearnOutcome run_learn(const RunConfig& cfg) {
    validate_common(cfg);
    if (cfg.in.empty()) throw ArgumentError("learn needs --in <samples>");
    const std::string grid_kind = !cfg.grid.empty() ? cfg.grid : (cfg.metric == "l2" ? "fixed" : "adaptive");
    if (cfg.metric == "l2" && grid_kind != "fixed") throw ArgumentError("the l2 learner runs on a fixed grid");

    Stopwatch clock;
    json timings;
    const Empirical fhat = ingest_samples(cfg.in, config_domain(cfg));
    const Domain& dom = fhat.domain();
    timings["ingest"] = clock.lap_ms();

    const Grid grid = grid_kind == "adaptive" ? build_adaptive_grid(fhat) : fixed_grid(dom, cfg.side);
    timings["grid"] = clock.lap_ms();

    SplitParams params;
    params.k = cfg.k;
    params.xi = cfg.xi;
    params.gamma = cfg.gamma.value_or(default_gamma(cfg.eps, cfg.k, cfg.xi, dom.dim(), grid.depth()));
    params.normalize_output = cfg.normalize;
    const SplitResult res =
        cfg.metric == "l2" ? greedy_split_l2(fhat, grid, params) : greedy_split(fhat, grid, params);
    timings["split"] = clock.lap_ms();

    BudgetInputs bin{cfg.k, dom.dim(), dom.is_discrete() ? dom.m() : grid.side(), cfg.eps, cfg.delta, cfg.xi, cfg.C};
    const BudgetFormula formula = cfg.metric == "l2"          ? BudgetFormula::L2
                                  : grid_kind == "adaptive" ? BudgetFormula::AdaptiveL1
                                                            : BudgetFormula::FixedGridL1;
    const SampleBudget budget = sample_budget(formula, bin);
    const char* formula_name = formula == BudgetFormula::L2           ? "L2"
                               : formula == BudgetFormula::AdaptiveL1 ? "AdaptiveL1"
                                                                      : "FixedGridL1";

    std::optional<double> l1_truth;
    if (!cfg.truth.empty()) l1_truth = l1_dist(load_hypothesis(cfg.truth), res.hypothesis);
    json errors;
    errors["l1_vs_truth"] = number_or_null(l1_truth);
    errors["dk_vs_empirical"] = number_or_null(small_dk(fhat, res.hypothesis, grid, cfg.k));
    if (cfg.metric == "l2") errors["l2_sq_vs_empirical"] = l2_sq_dist(fhat, res.hypothesis);
    timings["evaluate"] = clock.lap_ms();

    json report;
    report["command"] = "learn";
    report["config"] = to_json(cfg);
    report["seed"] = cfg.seed;
    report["n"] = fhat.n();
    report["support"] = fhat.support_size();
    report["learner"] = cfg.metric + "-" + grid_kind;
    report["grid"] = grid_summary(grid);
    report["gamma"] = params.gamma;
    report["pieces"] = res.hypothesis.size();
    report["piece_bound"] = res.piece_bound;
    report["mass_before_normalization"] = res.mass_before_normalization;
    report["scale"] = res.scale;
    report["budget"] = json{{"formula", formula_name}, {"n", budget.n}};
    report["errors"] = errors;

    if (!cfg.out.empty()) save_hypothesis(cfg.out, res.hypothesis);
    if (!cfg.dump.empty()) {
        std::ofstream out(cfg.dump, std::ios::binary);
        if (!out) throw ArgumentError("cannot write " + cfg.dump);
        write_dense_dump(out, res.hypothesis, cfg.dump_side);
    }
    timings["write"] = clock.lap_ms();
    if (cfg.timing) report["timings_ms"] = timings;
    if (!cfg.report.empty()) write_text(cfg.report, report.dump(2) + "\n");
    return LearnOutcome{res.hypothesis, std::move(report)};
}

Histogram run_gen(const RunConfig& cfg) {
    const auto dom = config_domain(cfg);
    if (!dom) throw ArgumentError("gen needs --domain");
    Histogram h = gen_truth(cfg.k, *dom, cfg.seed);
    if (!cfg.out.empty()) save_hypothesis(cfg.out, h);
    return h;
}

void run_sample(const RunConfig& cfg) {
    if (cfg.in.empty()) throw ArgumentError("sample needs --in <hypothesis>");
    const Histogram h = load_hypothesis(cfg.in);
    const auto pts = sample_points(h, cfg.n, cfg.seed);
    if (cfg.out.empty()) {
        write_samples(std::cout, h.domain(), pts);
        return;
    }
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + cfg.out);
    write_samples(out, h.domain(), pts);
}

nlohmann::ordered_json run_eval(const RunConfig& cfg) {
    if (cfg.in.empty()) throw ArgumentError("eval needs --in <hypothesis>");
    if (cfg.k < 1) throw ArgumentError("--k must be >= 1");
    const Histogram h = load_hypothesis(cfg.in);
    json report;
    report["command"] = "eval";
    report["config"] = to_json(cfg);
    report["pieces"] = h.size();
    report["mass"] = total_mass(h);
    if (!cfg.truth.empty()) report["l1_vs_truth"] = l1_dist(load_hypothesis(cfg.truth), h);
    if (!cfg.samples.empty()) {
        const Empirical fhat = ingest_samples(cfg.samples, h.domain());
        const Grid grid = h.grid() ? *h.grid() : fixed_grid(h.domain(), cfg.side);
        report["n"] = fhat.n();
        report["dk_vs_empirical"] = number_or_null(small_dk(fhat, h, grid, cfg.k));
        if (h.domain().is_discrete()) report["l2_sq_vs_empirical"] = l2_sq_dist(fhat, h);
    }
    if (!cfg.report.empty()) write_text(cfg.report, report.dump(2) + "\n");
    return report;
}

nlohmann::ordered_json run_oracle(const RunConfig& cfg) {
    if (cfg.in.empty()) throw ArgumentError("oracle needs --in <samples>");
    if (cfg.k < 1) throw ArgumentError("--k must be >= 1");
    if (cfg.metric != "l1" && cfg.metric != "l2") throw ArgumentError("--metric must be l1 or l2");
    const Empirical fhat = ingest_samples(cfg.in, config_domain(cfg));
    const Grid grid = fixed_grid(fhat.domain(), cfg.side);
    const OracleFit fit =
        cfg.metric == "l2" ? opt_hier_l2(fhat, grid, cfg.k) : opt_partial_hier_dk(fhat, grid, cfg.k);
    json report;
    report["command"] = "oracle";
    report["config"] = to_json(cfg);
    report["objective"] = cfg.metric == "l2" ? "opt_hier_l2" : "opt_partial_hier_dk";
    report["grid"] = grid_summary(grid);
    report["value"] = fit.value;
    report["pieces"] = fit.hypothesis.size();
    report["enumerated"] = fit.enumerated;
    if (!cfg.out.empty()) save_hypothesis(cfg.out, fit.hypothesis);
    if (!cfg.report.empty()) write_text(cfg.report, report.dump(2) + "\n");
    return report;
}

}  // namespace khist
