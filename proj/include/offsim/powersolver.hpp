#pragma once

#include <vector>

#include "offsim/radio.hpp"

namespace offsim::power {

// One convexified power-allocation subproblem over the currently active
// tasks. Row members hold global task ids; inactive tasks keep rho = 0 and do
// not interfere. A floor of +inf marks a latency budget that no rate can
// meet; such a problem is infeasible by construction.
struct Problem {
    const radio::Environment* env = nullptr;
    std::vector<int> active;
    std::vector<double> floor_bps;  // per active task, aligned with `active`

    struct AggRow {
        std::vector<int> members;  // task ids whose stream crosses the resource
        double cap_bps = 0.0;
    };
    std::vector<AggRow> link_rows;       // from the current placement
    std::vector<AggRow> fronthaul_rows;  // one per RRH with active users
};

enum class Status { feasible, infeasible, iteration_capped };

struct SolveResult {
    Status status = Status::infeasible;
    std::vector<double> rho;  // full length, zeros for inactive tasks
    double max_violation = 0.0;  // phase-1 s at the returned point (normalized)
    double objective = 0.0;      // sum rho over active (minimize mode)
    int newton_steps = 0;
};

// Phase 1: minimize the maximum normalized constraint violation s over the
// convexified rows anchored at rho_lin; the box 0 <= rho <= p_max stays hard.
// status == feasible iff the optimal s <= 1e-9.
SolveResult solve_feasibility(const Problem& pb, const std::vector<double>& rho_lin);

// Phase 1 then a log-barrier minimization of sum(rho) over the same rows.
SolveResult solve_min_power(const Problem& pb, const std::vector<double>& rho_lin);

// Smallest normalized slack of the original (non-linearized) constraints
// C1/C3/C4/C5 at rho. Nonnegative means satisfied; accepted iterates must
// stay >= -1e-9.
double min_slack_original(const Problem& pb, const std::vector<double>& rho);

struct CcpResult {
    Status status = Status::infeasible;
    std::vector<double> rho;
    std::vector<double> trace_sum_rho;  // per accepted iterate, non-increasing
    int iters = 0;
    double min_orig_slack = 0.0;  // worst original-constraint slack seen
};

// Iterates solve_min_power at successive linearization points until the
// sum-power decrease drops to eps or i_rho_max is hit. rho_init must satisfy
// the original constraints (it anchors the first subproblem and stays the
// fallback when a subproblem fails).
CcpResult ccp_minimize(const Problem& pb, const std::vector<double>& rho_init, double eps,
                       int i_rho_max);

struct FeasStepResult {
    Status status = Status::infeasible;
    std::vector<double> rho;       // next anchor (== rho_anchor when rejected)
    bool accepted = false;         // rho is a usable next anchor
    double max_violation = 0.0;    // at the returned rho
    double min_orig_slack = 0.0;   // at the returned rho
};

// One feasibility step anchored at rho_anchor. The new point replaces the
// anchor whenever it is finite and its worst violation does not exceed the
// anchor's; floors may still be unmet (status infeasible) while the point
// advances the outer alternation.
FeasStepResult ccp_feasibility(const Problem& pb, const std::vector<double>& rho_anchor);

}  // namespace offsim::power
