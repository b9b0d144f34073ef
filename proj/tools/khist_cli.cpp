#include <iostream>

#include <CLI11.hpp>

#include "khist/app.hpp"
#include "khist/error.hpp"

namespace {

void add_learning_flags(CLI::App* app, khist::RunConfig& cfg) {
    app->add_option("--k", cfg.k, "number of pieces");
    app->add_option("--xi", cfg.xi, "split width slack");
    app->add_option("--eps", cfg.eps, "target accuracy");
    app->add_option("--delta", cfg.delta, "failure probability");
    app->add_option("--gamma", cfg.gamma, "fit tolerance (default derived from eps)");
    app->add_option("--metric", cfg.metric, "l1 or l2");
    app->add_option("--grid", cfg.grid, "adaptive or fixed");
    app->add_option("--side", cfg.side, "cells per axis of a fixed grid");
    app->add_flag("--normalize", cfg.normalize, "rescale the output to mass 1");
    app->add_option("--C", cfg.C, "sample budget constant");
}

void add_domain_flags(CLI::App* app, khist::RunConfig& cfg) {
    app->add_option("--domain", cfg.domain, "unit or discrete");
    app->add_option("--dim", cfg.dim, "dimension");
    app->add_option("--m", cfg.m, "side of the discrete domain");
}

}  // namespace

int main(int argc, char** argv) {
    using khist::RunConfig;
    CLI::App app{"k-histogram learning"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* gen = app.add_subcommand("gen", "random k-piece ground truth");
    add_domain_flags(gen, cfg);
    gen->add_option("--k", cfg.k, "number of pieces");
    gen->add_option("--seed", cfg.seed);
    gen->add_option("--out", cfg.out, "hypothesis file")->required();

    auto* sample = app.add_subcommand("sample", "draw samples from a hypothesis file");
    sample->add_option("--in", cfg.in, "hypothesis file")->required();
    sample->add_option("--n", cfg.n, "sample count");
    sample->add_option("--seed", cfg.seed);
    sample->add_option("--out", cfg.out, "sample file (stdout if omitted)");

    auto* learn = app.add_subcommand("learn", "fit a histogram to samples");
    learn->add_option("--in", cfg.in, "sample file")->required();
    add_domain_flags(learn, cfg);
    add_learning_flags(learn, cfg);
    learn->add_option("--seed", cfg.seed, "echoed into the report");
    learn->add_option("--out", cfg.out, "hypothesis file");
    learn->add_option("--report", cfg.report, "report file (stdout if omitted)");
    learn->add_option("--truth", cfg.truth, "true hypothesis, for the l1 error");
    learn->add_option("--dump", cfg.dump, "dense evaluation for plotting");
    learn->add_option("--dump-side", cfg.dump_side, "lattice side of the dump on the unit cube");
    learn->add_flag("--timing", cfg.timing, "include wall-times in the report");

    auto* eval = app.add_subcommand("eval", "score a hypothesis");
    eval->add_option("--in", cfg.in, "hypothesis file")->required();
    eval->add_option("--truth", cfg.truth, "true hypothesis");
    eval->add_option("--samples", cfg.samples, "sample file");
    eval->add_option("--k", cfg.k, "D_k order");
    eval->add_option("--side", cfg.side, "grid side when the hypothesis has none");
    eval->add_option("--report", cfg.report, "report file (stdout if omitted)");

    auto* oracle = app.add_subcommand("oracle", "exact optimum on a small fixed grid");
    oracle->add_option("--in", cfg.in, "sample file")->required();
    add_domain_flags(oracle, cfg);
    oracle->add_option("--k", cfg.k, "number of pieces");
    oracle->add_option("--metric", cfg.metric, "l1 (partial hierarchical D_k) or l2");
    oracle->add_option("--side", cfg.side, "cells per axis");
    oracle->add_option("--out", cfg.out, "optimal hypothesis file");
    oracle->add_option("--report", cfg.report, "report file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            cfg.command = "gen";
            khist::run_gen(cfg);
        } else if (sample->parsed()) {
            cfg.command = "sample";
            khist::run_sample(cfg);
        } else {
            nlohmann::ordered_json report;
            if (learn->parsed()) {
                cfg.command = "learn";
                report = khist::run_learn(cfg).report;
            } else if (eval->parsed()) {
                cfg.command = "eval";
                report = khist::run_eval(cfg);
            } else {
                cfg.command = "oracle";
                report = khist::run_oracle(cfg);
            }
            if (cfg.report.empty()) std::cout << report.dump(2) << "\n";
        }
    } catch (const khist::OracleTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const khist::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
