#include "offsim/transport.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace offsim::transport {

std::vector<std::vector<std::pair<int, int>>> Topology::adjacency() const {
    std::vector<std::vector<std::pair<int, int>>> adj(num_nodes());
    for (int e = 0; e < static_cast<int>(links.size()); ++e) {
        adj[links[e].a].push_back({links[e].b, e});
        adj[links[e].b].push_back({links[e].a, e});
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
    return adj;
}

namespace {

struct RawPath {
    std::vector<int> nodes;  // starts at bbu
    std::vector<int> links;
    double one_way = 0.0;
};

// Exhaustive loopless enumeration. Transport graphs here are a handful of
// nodes, so the full path set stays tiny; the cap is a safety net against
// pathological configs rather than a tuning knob. Latency is re-summed per
// emitted path (front to back) so equal routes compare bitwise equal and the
// lexicographic tie-break stays meaningful.
void dfs(const Topology& topo, const std::vector<std::vector<std::pair<int, int>>>& adj,
         RawPath& cur, std::vector<char>& seen, std::vector<std::vector<RawPath>>& out,
         std::size_t cap) {
    int here = cur.nodes.back();
    cur.one_way = 0.0;
    for (int e : cur.links) cur.one_way += topo.links[e].latency_s;
    out[here].push_back(cur);
    if (out[here].size() > cap)
        throw std::runtime_error("path enumeration exceeded safety cap; simplify the topology");
    for (auto [next, link_id] : adj[here]) {
        if (seen[next]) continue;
        seen[next] = 1;
        cur.nodes.push_back(next);
        cur.links.push_back(link_id);
        dfs(topo, adj, cur, seen, out, cap);
        cur.links.pop_back();
        cur.nodes.pop_back();
        seen[next] = 0;
    }
}

}  // namespace

PathSet enumerate_paths(const Topology& topo, int b_max) {
    if (b_max < 1) throw std::invalid_argument("b_max must be >= 1");
    if (topo.bbu < 0 || topo.bbu >= topo.num_nodes())
        throw std::invalid_argument("bbu node id out of range");
    auto adj = topo.adjacency();
    std::vector<std::vector<RawPath>> raw(topo.num_nodes());
    RawPath start;
    start.nodes.push_back(topo.bbu);
    std::vector<char> seen(topo.num_nodes(), 0);
    seen[topo.bbu] = 1;
    dfs(topo, adj, start, seen, raw, 100000);

    PathSet ps;
    ps.paths.resize(topo.num_nodes());
    for (int n = 0; n < topo.num_nodes(); ++n) {
        auto& cand = raw[n];
        std::sort(cand.begin(), cand.end(), [](const RawPath& x, const RawPath& y) {
            if (x.one_way != y.one_way) return x.one_way < y.one_way;
            return x.nodes < y.nodes;
        });
        int keep = std::min<int>(b_max, static_cast<int>(cand.size()));
        for (int b = 0; b < keep; ++b)
            ps.paths[n].push_back(Path{cand[b].links, cand[b].one_way});
    }
    return ps;
}

double prop_latency(const PathSet& ps, int node, int b) {
    if (node < 0 || node >= static_cast<int>(ps.paths.size()))
        throw std::out_of_range("prop_latency: node out of range");
    if (b < 0 || b >= ps.num_options(node))
        throw std::out_of_range("prop_latency: no such path option");
    return 2.0 * ps.paths[node][b].one_way_s;
}

double residual_node(const Topology& topo, const Assignment& as, int node, int exclude_k) {
    double used = 0.0;
    for (int j = 0; j < as.size(); ++j) {
        if (j == exclude_k || as.node[j] != node) continue;
        used += as.ups[j];
    }
    return topo.capacity_cps[node] - used;
}

double residual_link(const Topology& topo, const PathSet& ps, const Assignment& as,
                     const std::vector<double>& rate_bps, int link_id, int exclude_k) {
    double used = 0.0;
    for (int j = 0; j < as.size(); ++j) {
        if (j == exclude_k || as.node[j] < 0) continue;
        const auto& links = ps.paths[as.node[j]][as.path[j]].links;
        for (int e : links) {
            if (e == link_id) {
                used += rate_bps[j];
                break;  // uplink charged once per link even on odd routes
            }
        }
    }
    return topo.links[link_id].capacity_bps - used;
}

std::vector<Candidate> feasible_nodes(const Topology& topo, const PathSet& ps,
                                      const Assignment& as, const std::vector<double>& rate_bps,
                                      int k, double rate_k) {
    std::vector<Candidate> out;
    for (int n = 0; n < topo.num_nodes(); ++n) {
        for (int b = 0; b < ps.num_options(n); ++b) {
            bool ok = true;
            for (int e : ps.paths[n][b].links) {
                if (residual_link(topo, ps, as, rate_bps, e, k) < rate_k) {
                    ok = false;
                    break;
                }
            }
            if (ok) out.push_back({n, b});
        }
    }
    return out;
}

std::vector<Candidate> better_nodes(const Topology& topo, const PathSet& ps,
                                    const Assignment& as, const std::vector<double>& rate_bps,
                                    int k, double rate_k) {
    if (as.node[k] < 0) throw std::logic_error("better_nodes: task is unplaced");
    double cur = prop_latency(ps, as.node[k], as.path[k]);
    std::vector<Candidate> out;
    for (const auto& c : feasible_nodes(topo, ps, as, rate_bps, k, rate_k))
        if (prop_latency(ps, c.node, c.b) <= cur) out.push_back(c);
    return out;
}

std::string to_dot(const Topology& topo) {
    std::ostringstream os;
    os << "graph transport {\n";
    for (int n = 0; n < topo.num_nodes(); ++n) {
        os << "  n" << n << " [label=\"n" << n << "\\ncap=" << topo.capacity_cps[n] << "\"";
        if (n == topo.bbu) os << " shape=doublecircle";
        os << "];\n";
    }
    for (const auto& l : topo.links)
        os << "  n" << l.a << " -- n" << l.b << " [label=\"" << l.capacity_bps << "bps/"
           << l.latency_s << "s\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace offsim::transport
