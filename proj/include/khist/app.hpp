#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "khist/core.hpp"

namespace khist {

struct RunConfig {
    std::string command;
    std::string in;
    std::string out;
    std::string report;
    std::string truth;
    std::string samples;
    std::string dump;
    int dump_side = 64;
    std::string domain;  // "unit" or "discrete"; empty = from the input file
    int dim = 1;
    std::int64_t m = 0;
    int k = 1;
    double xi = 1.0;
    double eps = 0.1;
    double delta = 0.1;
    std::optional<double> gamma;
    std::uint64_t seed = 1;
    std::string metric = "l1";
    std::string grid;  // "adaptive" or "fixed"; empty picks by metric
    std::optional<std::int64_t> side;
    bool normalize = false;
    double C = 1.0;
    std::int64_t n = 1000;
    bool timing = false;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);

// Domain named by --domain/--dim/--m, if any.
std::optional<Domain> config_domain(const RunConfig& cfg);

struct LearnOutcome {
    Histogram hypothesis;
    nlohmann::ordered_json report;
};

// Learner pipeline: ingest, grid, split, evaluate, write files named in cfg.
LearnOutcome run_learn(const RunConfig& cfg);

Histogram run_gen(const RunConfig& cfg);
void run_sample(const RunConfig& cfg);
nlohmann::ordered_json run_eval(const RunConfig& cfg);
nlohmann::ordered_json run_oracle(const RunConfig& cfg);

}  // namespace khist
