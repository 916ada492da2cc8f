#pragma once

#include <string>
#include <utility>
#include <vector>

namespace offsim::transport {

// NFV transport network: undirected simple graph of compute nodes, one of
// which hosts the BBU pool. Every task stream enters at the BBU node and is
// routed to the node that executes it.
struct Topology {
    struct Link {
        int a = -1;
        int b = -1;
        double capacity_bps = 0.0;
        double latency_s = 0.0;  // one-way per traversal
    };

    int bbu = 0;
    std::vector<double> capacity_cps;  // per node, cycles/s
    std::vector<double> lambda_eff;    // per node, effective switched capacitance
    std::vector<Link> links;

    int num_nodes() const { return static_cast<int>(capacity_cps.size()); }
    // (neighbor, link id) pairs, neighbor ascending
    std::vector<std::vector<std::pair<int, int>>> adjacency() const;
};

// Loopless route from the BBU node to a target node, stored as link ids in
// traversal order. The BBU node itself gets the empty path.
struct Path {
    std::vector<int> links;
    double one_way_s = 0.0;
};

// paths[n] holds up to b_max loopless paths from the BBU to node n, sorted by
// one-way latency, ties broken by lexicographically smallest node sequence.
struct PathSet {
    std::vector<std::vector<Path>> paths;

    int num_options(int node) const { return static_cast<int>(paths[node].size()); }
};

PathSet enumerate_paths(const Topology& topo, int b_max);

// Round-trip propagation latency of path b to `node` (uplink + downlink, so
// twice the one-way sum). Throws std::out_of_range for a missing path.
double prop_latency(const PathSet& ps, int node, int b);

// Per-task placement state shared by the greedy placement passes and the
// residual-capacity queries. node[k] == -1 means task k is unplaced.
struct Assignment {
    std::vector<int> node;
    std::vector<int> path;
    std::vector<double> ups;    // allocated compute, cycles/s
    std::vector<double> alpha;  // latency slack, s

    explicit Assignment(int num_tasks = 0)
        : node(num_tasks, -1), path(num_tasks, -1), ups(num_tasks, 0.0), alpha(num_tasks, 0.0) {}
    int size() const { return static_cast<int>(node.size()); }
    void clear(int k) {
        node[k] = -1;
        path[k] = -1;
        ups[k] = 0.0;
        alpha[k] = 0.0;
    }
};

// Residuals recompute from per-task commitments on demand; commit/release is
// therefore exact (no drifting accumulators). exclude_k skips that task's own
// commitment, pass -1 to include everyone.
double residual_node(const Topology& topo, const Assignment& as, int node, int exclude_k);
double residual_link(const Topology& topo, const PathSet& ps, const Assignment& as,
                     const std::vector<double>& rate_bps, int link_id, int exclude_k);

struct Candidate {
    int node = -1;
    int b = -1;
};

// All (node, path) options whose every link can still carry rate_k on top of
// the committed flows of the other tasks. The BBU's empty path always
// qualifies. Order: node ascending, then path index ascending.
std::vector<Candidate> feasible_nodes(const Topology& topo, const PathSet& ps,
                                      const Assignment& as, const std::vector<double>& rate_bps,
                                      int k, double rate_k);

// feasible_nodes restricted to options whose round-trip propagation latency
// does not exceed task k's current one. Task k must be placed.
std::vector<Candidate> better_nodes(const Topology& topo, const PathSet& ps,
                                    const Assignment& as, const std::vector<double>& rate_bps,
                                    int k, double rate_k);

std::string to_dot(const Topology& topo);

}  // namespace offsim::transport
