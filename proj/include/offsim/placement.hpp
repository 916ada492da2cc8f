#pragma once

#include <vector>

#include "offsim/scenario.hpp"
#include "offsim/transport.hpp"

namespace offsim::placement {

// Shared inputs of the greedy placement passes. budget_s is the part of the
// deadline the transport + compute side has to fit in (the full deadline for
// the joint pipeline, deadline minus the fixed radio budget for the disjoint
// one); radio_s is the transmission latency charged against that budget (zero
// for the disjoint pipeline). Entries of inactive tasks are ignored.
struct Context {
    const transport::Topology* topo = nullptr;
    const transport::PathSet* paths = nullptr;
    const std::vector<Task>* tasks = nullptr;
    std::vector<double> rate_bps;
    std::vector<double> budget_s;
    std::vector<double> radio_s;
    std::vector<char> active;
};

// Greedy feasibility pass: active tasks in ascending-budget order (ties by
// id) each take the feasible (node, path) minimizing load/residual + prop
// latency, then get either the exact compute that makes the deadline tight
// (alpha = 0) or the full residual (alpha > 0). A residual below load/budget
// is floored at load/budget, the least grant any deadline-meeting assignment
// needs; such grants always carry alpha > 0 whenever radio or propagation
// latency is positive, so they never enter an accepted set. Unplaced active
// tasks from a previous pass keep their commitments until rewritten.
void place_feasibility(const Context& ctx, transport::Assignment& as);

// Improvement pass: active tasks in descending lambda * ups^3 order may move
// to a candidate with no worse propagation latency when the move keeps the
// deadline tight and does not increase that task's compute energy. First
// acceptable candidate wins (node ascending, then path index). Returns true
// if anything moved or shrank. Never increases sum lambda * ups^3.
bool place_optimize(const Context& ctx, transport::Assignment& as);

// sum over active placed tasks of lambda_node * ups^3
double compute_energy_w(const transport::Topology& topo, const transport::Assignment& as,
                        const std::vector<char>& active);

}  // namespace offsim::placement
