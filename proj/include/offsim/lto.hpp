#pragma once

#include <cstdint>
#include <vector>

#include "offsim/scenario.hpp"

namespace offsim::lto {

// Interference-free rate at full power; upper-bounds every achievable rate.
double lto_rate(const radio::Environment& env, int k);

struct KktResult {
    std::vector<double> ups;
    std::vector<double> alpha;
    double lambda = 0.0;  // capacity multiplier, 0 in the no-slack regime
    double residual = 0.0;  // capacity equation residual at the returned lambda
    int iters = 0;
};

// Single-node slack minimization: min sum_k [load_k/ups_k - t_tilde_k]^+
// subject to sum ups <= capacity. Closed form when every reduced deadline is
// positive and the demand fits; otherwise lambda solves
// sum_k load_k / max(t_tilde_k, sqrt(load_k lambda)) = capacity by bisection
// on [1e-20, 1e20].
KktResult kkt_allocate(const std::vector<double>& load_cycles,
                       const std::vector<double>& t_tilde_s, double capacity_cps,
                       double tol_lambda = 1e-12, double rel_tol_residual = 1e-6);

struct SearchResult {
    std::vector<int> node;
    std::vector<int> path;
    std::vector<double> ups;
    std::vector<double> alpha;
    double sum_alpha = 0.0;
    std::int64_t candidates = 0;
    int accepted = 0;  // tasks with alpha == 0
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exhaustive search over every (node, path) assignment vector with the
// relaxed radio model (lto_rate) and per-node kkt_allocate. Throws
// BudgetError when |options|^K exceeds `budget`. Ties on sum_alpha resolve to
// the lexicographically smallest assignment vector. Deterministic for any
// worker count.
SearchResult lto_search(const ScenarioInstance& inst, std::int64_t budget = 10'000'000,
                        int workers = 1);

}  // namespace offsim::lto
