#include "offsim/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace offsim::placement {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> active_ids(const Context& ctx) {
    std::vector<int> ids;
    ids.reserve(ctx.tasks->size());
    for (int k = 0; k < static_cast<int>(ctx.tasks->size()); ++k)
        if (ctx.active[k]) ids.push_back(k);
    return ids;
}

}  // namespace

void place_feasibility(const Context& ctx, transport::Assignment& as) {
    const auto& topo = *ctx.topo;
    const auto& ps = *ctx.paths;
    const auto& tasks = *ctx.tasks;

    std::vector<int> order = active_ids(ctx);
    // stable sort keeps equal budgets in id order
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ctx.budget_s[a] < ctx.budget_s[b]; });

    for (int k : order) {
        double load = tasks[k].load_cycles;
        auto cands = transport::feasible_nodes(topo, ps, as, ctx.rate_bps, k, ctx.rate_bps[k]);

        // The BBU's empty path always qualifies, so cands is never empty.
        double best = kInf;
        transport::Candidate pick = cands.front();
        for (const auto& c : cands) {
            double res = transport::residual_node(topo, as, c.node, k);
            double score =
                (res > 0.0 ? load / res : kInf) + transport::prop_latency(ps, c.node, c.b);
            if (score < best) {
                best = score;
                pick = c;
            }
        }

        double t_prop = transport::prop_latency(ps, pick.node, pick.b);
        double t_rem = ctx.budget_s[k] - ctx.radio_s[k] - t_prop;
        double res = transport::residual_node(topo, as, pick.node, k);
        as.node[k] = pick.node;
        as.path[k] = pick.b;
        if (t_rem > 0.0 && load / t_rem <= res) {
            as.ups[k] = load / t_rem;
            as.alpha[k] = 0.0;
        } else {
            // A grant below load/budget cannot meet the deadline on any node,
            // so it floors the fallback. On a drained node the slack then
            // telescopes to the radio plus propagation excess, which keeps
            // starved tasks comparable instead of dominating every ranking
            // with the artifact of a near-zero grant.
            as.ups[k] = std::max(res, load / ctx.budget_s[k]);
            as.alpha[k] =
                std::max(0.0, ctx.radio_s[k] + t_prop + load / as.ups[k] - ctx.budget_s[k]);
        }
    }
}

bool place_optimize(const Context& ctx, transport::Assignment& as) {
    const auto& topo = *ctx.topo;
    const auto& ps = *ctx.paths;
    const auto& tasks = *ctx.tasks;

    std::vector<int> order;
    for (int k : active_ids(ctx))
        if (as.node[k] >= 0) order.push_back(k);
    // order is frozen at entry so later moves cannot reshuffle the pass
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double ea = topo.lambda_eff[as.node[a]] * as.ups[a] * as.ups[a] * as.ups[a];
        double eb = topo.lambda_eff[as.node[b]] * as.ups[b] * as.ups[b] * as.ups[b];
        return ea > eb;
    });

    bool changed = false;
    for (int k : order) {
        double load = tasks[k].load_cycles;
        double e_cur = topo.lambda_eff[as.node[k]] * as.ups[k] * as.ups[k] * as.ups[k];
        auto cands = transport::better_nodes(topo, ps, as, ctx.rate_bps, k, ctx.rate_bps[k]);
        for (const auto& c : cands) {
            double t_rem =
                ctx.budget_s[k] - ctx.radio_s[k] - transport::prop_latency(ps, c.node, c.b);
            if (!(t_rem > 0.0)) continue;
            double ups = load / t_rem;
            if (ups > transport::residual_node(topo, as, c.node, k)) continue;
            if (topo.lambda_eff[c.node] * ups * ups * ups > e_cur) continue;
            // first acceptable candidate is the destination, even when it is
            // the current spot; only real differences count as progress
            if (c.node != as.node[k] || c.b != as.path[k] || ups != as.ups[k] ||
                as.alpha[k] != 0.0)
                changed = true;
            as.node[k] = c.node;
            as.path[k] = c.b;
            as.ups[k] = ups;
            as.alpha[k] = 0.0;
            break;
        }
    }
    return changed;
}

double compute_energy_w(const transport::Topology& topo, const transport::Assignment& as,
                        const std::vector<char>& active) {
    double e = 0.0;
    for (int k = 0; k < static_cast<int>(as.size()); ++k) {
        if (!active[k] || as.node[k] < 0) continue;
        e += topo.lambda_eff[as.node[k]] * as.ups[k] * as.ups[k] * as.ups[k];
    }
    return e;
}

}  // namespace offsim::placement
