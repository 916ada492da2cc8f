#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "offsim/scenario.hpp"

namespace offsim::sweep {

// Swept parameters: T (all class deadlines, s), K (task count, single-class
// templates only), C (all node capacities, cycles/s), D (payload bits),
// L (load cycles), TRAN (disjoint pipeline radio budget, s).
ScenarioConfig apply_param(const ScenarioConfig& base, const std::string& param, double value);

struct Spec {
    ScenarioConfig base;
    std::string param;
    std::vector<double> values;
    std::vector<std::string> algos;  // subset of {"jto", "dto", "lto"}
    int trials = 1;
    std::uint64_t seed = 1;
    int workers = 1;
    bool omit_timing = false;  // write wall_s as 0 for byte-reproducible output
    std::int64_t lto_budget = 10'000'000;
};

struct ResultRow {
    std::uint64_t seed = 0;
    std::string algo;
    std::string param;
    double value = 0.0;
    double acceptance_ratio = 0.0;
    double energy_w = 0.0;
    double mean_ttx_s = 0.0;
    double mean_texe_s = 0.0;
    double mean_tprop_s = 0.0;
    std::int64_t iters = 0;
    double wall_s = 0.0;
    std::string placement_hist;  // "node:count;..." over accepted tasks, or error marker
};

// Runs trials x values x algos, trial i seeded with seed + i. Rows come back
// sorted by (value, seed, algo); identical specs produce identical rows (up
// to wall_s unless omit_timing). An LTO budget refusal becomes a row with nan
// metrics and placement_hist "budget_exceeded"; the run continues.
std::vector<ResultRow> run_sweep(const Spec& spec);

extern const char* kCsvHeader;
std::string to_csv(const std::vector<ResultRow>& rows);

struct ClassSpec {
    ScenarioConfig base;  // must define task classes
    std::vector<double> c_values;
    int trials = 1;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct ClassRow {
    double capacity_cps = 0.0;
    int cls = 0;
    double acceptance_ratio = 0.0;       // mean over trials
    std::vector<double> node_share;      // accepted-task share per node, mean over trials
};

// Capacity sweep of the joint pipeline reported per task class.
std::vector<ClassRow> run_class_experiment(const ClassSpec& spec);
std::string class_rows_to_csv(const std::vector<ClassRow>& rows);

}  // namespace offsim::sweep
