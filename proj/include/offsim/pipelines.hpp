#pragma once

#include <string>
#include <vector>

#include "offsim/scenario.hpp"
#include "offsim/transport.hpp"

namespace offsim::pipelines {

// Final admission + allocation state of one pipeline run. Radio-rejected
// tasks keep rho = 0 and node = -1; tasks the disjoint pipeline drops after
// its power phase keep transmitting (rho fixed, node = -1) so the
// interference and fronthaul accounting they were solved under stays valid.
// Traces carry the per-iteration objective values the convergence guarantees
// speak about.
struct Solution {
    std::vector<char> accepted;
    std::vector<double> rho;
    std::vector<double> ups;
    std::vector<double> alpha;
    std::vector<int> node;
    std::vector<int> path;
    std::vector<int> rejection_order;  // task ids, first rejected first

    // one inner-loop sum-alpha trace per admission round (between rejections)
    std::vector<std::vector<double>> alpha_traces;
    std::vector<double> energy_trace;  // refinement phase, total energy E
    int iters_feasibility = 0;
    int iters_refine = 0;
    int guard_reverts = 0;         // monotonicity guard activations
    double min_ccp_slack = 0.0;    // worst original-constraint slack accepted
    double wall_s = 0.0;

    double acceptance_ratio() const;
};

// E = sum(rho) + eta * sum(lambda_node * ups^3) over accepted tasks.
double energy(const transport::Topology& topo, const std::vector<char>& accepted,
              const std::vector<double>& rho, const std::vector<double>& ups,
              const std::vector<int>& node, double eta);

// Admission control: alternate greedy placement and a convexified power
// feasibility step until the total slack stops shrinking, then drop the
// worst-slack task and retry from the surviving state. Ends with zero slack.
Solution jto_feasibility(const ScenarioInstance& inst);

// Energy refinement on the admitted set: alternate the placement improvement
// pass with power minimization; the energy trace is non-increasing.
void jto_refine(const ScenarioInstance& inst, Solution& sol);

// jto_feasibility followed by jto_refine, with wall time recorded.
Solution run_jto(const ScenarioInstance& inst);

// Disjoint baseline: solve the radio side against the fixed budget t_ran_s
// (admission + power minimization), then place the survivors against the
// remaining deadline and refine. 0 < t_ran_s < min deadline required.
Solution run_dto(const ScenarioInstance& inst, double t_ran_s);

// Recomputes every constraint of the accepted set from scratch with exact
// rates. Returns false and fills `why` on any violation.
bool validate_solution(const ScenarioInstance& inst, const Solution& sol, std::string* why);

}  // namespace offsim::pipelines
