#include "offsim/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "offsim/placement.hpp"
#include "offsim/powersolver.hpp"
#include "offsim/radio.hpp"

namespace offsim::pipelines {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlphaInit = 1e6;  // cold-start radio slack, seconds

// Headroom multiplier on the viability floors used by the warm start. The
// floors of the alternation track the rates of the current iterate, so the
// initial rate also has to cover compute and transport time, not just the
// transmit slice the floor accounts for.
constexpr double kWarmHeadroom = 4.0;

// Initial transmit powers: fixed-point power control toward per-task target
// rates. The target is the given viability floor with headroom, capped at
// half the task's interference-free ceiling so no task demands a rate it
// could not approach even alone. Each sweep sets the power that would hit
// the target at the current interference, clamped to P_max; the map is a
// standard interference function, so the iteration converges to its unique
// fixed point. Tasks with reachable targets end exactly on them at minimal
// power, which silences the near-RRH interferers that a full-power start
// would leave shouting over every cell-edge task; unreachable targets ride
// P_max and are left for the admission loop to reject. The alternation never
// raises a task's floor above its current rate, so radio viability is
// decided here or never. A final uniform scale-down guards the fronthaul
// caps, which target rates alone do not bound.
std::vector<double> warm_rho(const ScenarioInstance& inst, const std::vector<double>& floor_bps) {
    int n = inst.num_tasks();
    const auto& env = inst.env;
    std::vector<double> target_sinr(n);
    for (int k = 0; k < n; ++k) {
        double solo = env.bandwidth_hz *
                      std::log2(1.0 + env.gain[k][k] * env.p_max_w[k] / env.noise_w);
        double bps = std::min(kWarmHeadroom * floor_bps[k], std::max(floor_bps[k], 0.5 * solo));
        target_sinr[k] = std::exp2(bps / env.bandwidth_hz) - 1.0;
    }
    std::vector<double> rho(env.p_max_w.begin(), env.p_max_w.begin() + n);
    std::vector<double> next(n);
    for (int it = 0; it < 200; ++it) {
        double moved = 0.0;
        for (int k = 0; k < n; ++k) {
            double den = env.noise_w;
            for (int j = 0; j < n; ++j)
                if (j != k) den += env.gain[k][j] * rho[j];
            next[k] = std::min(target_sinr[k] * den / env.gain[k][k], env.p_max_w[k]);
            moved = std::max(moved, std::abs(next[k] - rho[k]) / env.p_max_w[k]);
        }
        rho.swap(next);
        if (moved < 1e-12) break;
    }

    auto fronthaul_ok = [&](const std::vector<double>& r) {
        for (int u = 0; u < env.num_rrhs; ++u) {
            double used = 0.0;
            for (int k = 0; k < n; ++k)
                if (env.serving[k] == u) used += radio::rate(env, r, k);
            if (used > env.fronthaul_bps) return false;
        }
        return true;
    };
    if (!fronthaul_ok(rho)) {
        std::vector<double> base = rho;
        double lo = 0.0, hi = 1.0;  // rates grow with a uniform scale-up
        for (int it = 0; it < 60; ++it) {
            double c = 0.5 * (lo + hi);
            for (int k = 0; k < n; ++k) rho[k] = c * base[k];
            (fronthaul_ok(rho) ? lo : hi) = c;
        }
        for (int k = 0; k < n; ++k) rho[k] = lo * base[k];
    }
    return rho;
}

double sum_alpha(const std::vector<double>& alpha, const std::vector<char>& active) {
    double s = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        if (active[k]) s += alpha[k];
    return s;
}

// strict > keeps the lowest id among equal slacks
int worst_task(const std::vector<double>& alpha, const std::vector<char>& active) {
    int worst = -1;
    for (int k = 0; k < static_cast<int>(alpha.size()); ++k) {
        if (!active[k]) continue;
        if (worst < 0 || alpha[k] > alpha[worst]) worst = k;
    }
    return worst;
}

power::Problem make_problem(const ScenarioInstance& inst, const std::vector<char>& active,
                            const std::vector<double>& floor_by_id,
                            const transport::Assignment* as) {
    power::Problem pb;
    pb.env = &inst.env;
    int n = inst.num_tasks();
    for (int k = 0; k < n; ++k) {
        if (!active[k]) continue;
        pb.active.push_back(k);
        pb.floor_bps.push_back(floor_by_id[k]);
    }
    for (int u = 0; u < inst.env.num_rrhs; ++u) {
        power::Problem::AggRow row;
        row.cap_bps = inst.env.fronthaul_bps;
        for (int k : pb.active)
            if (inst.env.serving[k] == u) row.members.push_back(k);
        if (!row.members.empty()) pb.fronthaul_rows.push_back(std::move(row));
    }
    if (as != nullptr) {
        for (int e = 0; e < static_cast<int>(inst.topo.links.size()); ++e) {
            power::Problem::AggRow row;
            row.cap_bps = inst.topo.links[e].capacity_bps;
            for (int k : pb.active) {
                if (as->node[k] < 0) continue;
                const auto& lks = inst.paths.paths[as->node[k]][as->path[k]].links;
                if (std::find(lks.begin(), lks.end(), e) != lks.end())
                    row.members.push_back(k);
            }
            if (!row.members.empty()) pb.link_rows.push_back(std::move(row));
        }
    }
    return pb;
}

// Rate floor making the end-to-end budget tight at the current placement:
// D / (T + alpha - T_prop - T_exe). Positive whenever the task is placed.
std::vector<double> placement_floors(const ScenarioInstance& inst,
                                     const std::vector<char>& active,
                                     const transport::Assignment& as) {
    int n = inst.num_tasks();
    std::vector<double> fl(n, 0.0);
    for (int k = 0; k < n; ++k) {
        if (!active[k] || as.node[k] < 0) continue;
        double den = inst.tasks[k].max_latency_s + as.alpha[k] -
                     transport::prop_latency(inst.paths, as.node[k], as.path[k]) -
                     inst.tasks[k].load_cycles / as.ups[k];
        fl[k] = den > 0.0 ? inst.tasks[k].data_bits / den : kInf;
    }
    return fl;
}

void refresh_radio(const ScenarioInstance& inst, const std::vector<char>& active,
                   const std::vector<double>& rho, std::vector<double>& rate_bps,
                   std::vector<double>& radio_s) {
    for (int k = 0; k < inst.num_tasks(); ++k) {
        if (!active[k]) continue;
        rate_bps[k] = radio::rate(inst.env, rho, k);
        radio_s[k] = radio::tx_latency(inst.tasks[k].data_bits, rate_bps[k]);
    }
}

void store(Solution& sol, const transport::Assignment& as, const std::vector<double>& rho) {
    sol.rho = rho;
    sol.ups = as.ups;
    sol.alpha = as.alpha;
    sol.node = as.node;
    sol.path = as.path;
    if (!std::isfinite(sol.min_ccp_slack)) sol.min_ccp_slack = 0.0;
}

}  // namespace

double Solution::acceptance_ratio() const {
    if (accepted.empty()) return 1.0;
    double c = 0.0;
    for (char a : accepted) c += a ? 1.0 : 0.0;
    return c / static_cast<double>(accepted.size());
}

double energy(const transport::Topology& topo, const std::vector<char>& accepted,
              const std::vector<double>& rho, const std::vector<double>& ups,
              const std::vector<int>& node, double eta) {
    double transmit = 0.0, compute = 0.0;
    for (std::size_t k = 0; k < accepted.size(); ++k) {
        if (!accepted[k]) continue;
        transmit += rho[k];
        if (node[k] >= 0) compute += topo.lambda_eff[node[k]] * ups[k] * ups[k] * ups[k];
    }
    return transmit + eta * compute;
}

Solution jto_feasibility(const ScenarioInstance& inst) {
    const auto& cfg = inst.cfg;
    int n = inst.num_tasks();

    Solution sol;
    sol.accepted.assign(n, 1);
    sol.min_ccp_slack = kInf;

    std::vector<double> viable(n);  // least rate that could ever meet C1
    for (int k = 0; k < n; ++k) viable[k] = inst.tasks[k].data_bits / inst.tasks[k].max_latency_s;
    std::vector<double> rho = warm_rho(inst, viable);
    transport::Assignment as(n);

    placement::Context ctx;
    ctx.topo = &inst.topo;
    ctx.paths = &inst.paths;
    ctx.tasks = &inst.tasks;
    ctx.rate_bps.assign(n, 0.0);
    ctx.budget_s.assign(n, 0.0);
    ctx.radio_s.assign(n, 0.0);
    ctx.active.assign(n, 1);
    for (int k = 0; k < n; ++k) ctx.budget_s[k] = inst.tasks[k].max_latency_s;

    for (int round = 0; round <= n; ++round) {
        std::vector<double> trace;
        double prev = kInf;
        for (int it = 0; it < cfg.i_max; ++it) {
            refresh_radio(inst, ctx.active, rho, ctx.rate_bps, ctx.radio_s);
            transport::Assignment as_prev = as;
            std::vector<double> rho_prev = rho;

            placement::place_feasibility(ctx, as);
            double sum = sum_alpha(as.alpha, ctx.active);
            if (sum > prev) {  // monotone-trace guard
                as = as_prev;
                rho = rho_prev;
                ++sol.guard_reverts;
                break;
            }
            trace.push_back(sum);
            ++sol.iters_feasibility;

            power::Problem pb =
                make_problem(inst, ctx.active, placement_floors(inst, ctx.active, as), &as);
            auto fs = power::ccp_feasibility(pb, rho);
            if (fs.accepted) {
                rho = fs.rho;
                sol.min_ccp_slack = std::min(sol.min_ccp_slack, fs.min_orig_slack);
            }
            if (prev - sum <= cfg.eps) break;
            prev = sum;
        }
        sol.alpha_traces.push_back(std::move(trace));

        int worst = worst_task(as.alpha, ctx.active);
        if (worst < 0 || as.alpha[worst] <= 0.0) break;
        ctx.active[worst] = 0;
        sol.accepted[worst] = 0;
        sol.rejection_order.push_back(worst);
        as.clear(worst);
        rho[worst] = 0.0;
    }

    store(sol, as, rho);
    return sol;
}

void jto_refine(const ScenarioInstance& inst, Solution& sol) {
    const auto& cfg = inst.cfg;
    int n = inst.num_tasks();

    std::vector<double> rho = sol.rho;
    transport::Assignment as(n);
    as.node = sol.node;
    as.path = sol.path;
    as.ups = sol.ups;
    as.alpha = sol.alpha;

    placement::Context ctx;
    ctx.topo = &inst.topo;
    ctx.paths = &inst.paths;
    ctx.tasks = &inst.tasks;
    ctx.rate_bps.assign(n, 0.0);
    ctx.budget_s.assign(n, 0.0);
    ctx.radio_s.assign(n, 0.0);
    ctx.active.assign(sol.accepted.begin(), sol.accepted.end());
    for (int k = 0; k < n; ++k) ctx.budget_s[k] = inst.tasks[k].max_latency_s;
    if (!std::isfinite(sol.min_ccp_slack)) sol.min_ccp_slack = kInf;

    double e_prev = energy(inst.topo, sol.accepted, rho, as.ups, as.node, cfg.eta);
    sol.energy_trace.push_back(e_prev);
    for (int it = 0; it < cfg.i_max; ++it) {
        transport::Assignment as_prev = as;
        std::vector<double> rho_prev = rho;

        refresh_radio(inst, ctx.active, rho, ctx.rate_bps, ctx.radio_s);
        placement::place_optimize(ctx, as);

        power::Problem pb =
            make_problem(inst, ctx.active, placement_floors(inst, ctx.active, as), &as);
        if (!pb.active.empty()) {
            auto cc = power::ccp_minimize(pb, rho, cfg.eps, cfg.i_rho_max);
            if (cc.status == power::Status::feasible) {
                rho = cc.rho;
                sol.min_ccp_slack = std::min(sol.min_ccp_slack, cc.min_orig_slack);
            }
        }

        double e = energy(inst.topo, sol.accepted, rho, as.ups, as.node, cfg.eta);
        if (e > e_prev) {  // monotone-trace guard
            as = as_prev;
            rho = rho_prev;
            ++sol.guard_reverts;
            break;
        }
        sol.energy_trace.push_back(e);
        ++sol.iters_refine;
        if (e_prev - e <= cfg.eps) break;
        e_prev = e;
    }

    store(sol, as, rho);
}

Solution run_jto(const ScenarioInstance& inst) {
    auto t0 = std::chrono::steady_clock::now();
    Solution sol = jto_feasibility(inst);
    jto_refine(inst, sol);
    sol.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
}

Solution run_dto(const ScenarioInstance& inst, double t_ran_s) {
    const auto& cfg = inst.cfg;
    int n = inst.num_tasks();
    for (const auto& t : inst.tasks)
        if (!(t_ran_s > 0.0) || !(t_ran_s < t.max_latency_s))
            throw std::invalid_argument(
                "radio budget must sit strictly inside (0, min task deadline)");

    auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    sol.accepted.assign(n, 1);
    sol.min_ccp_slack = kInf;

    // radio admission: floors loosened by the running slack
    std::vector<char> active(n, 1);
    std::vector<double> viable(n);  // least rate that fits the radio budget
    for (int k = 0; k < n; ++k) viable[k] = inst.tasks[k].data_bits / t_ran_s;
    std::vector<double> rho = warm_rho(inst, viable);
    std::vector<double> alphav(n, kAlphaInit), floors(n, 0.0);

    for (int round = 0; round <= n; ++round) {
        std::vector<double> trace;
        double prev = kInf;
        for (int it = 0; it < cfg.i_max; ++it) {
            for (int k = 0; k < n; ++k)
                if (active[k]) floors[k] = inst.tasks[k].data_bits / (t_ran_s + alphav[k]);
            std::vector<double> rho_prev = rho, alpha_prev = alphav;

            power::Problem pb = make_problem(inst, active, floors, nullptr);
            auto fs = power::ccp_feasibility(pb, rho);
            if (fs.accepted) {
                rho = fs.rho;
                sol.min_ccp_slack = std::min(sol.min_ccp_slack, fs.min_orig_slack);
            }
            double sum = 0.0;
            for (int k = 0; k < n; ++k) {
                if (!active[k]) continue;
                double ttx = radio::tx_latency(inst.tasks[k].data_bits,
                                               radio::rate(inst.env, rho, k));
                alphav[k] = std::max(0.0, ttx - t_ran_s);
                sum += alphav[k];
            }
            if (sum > prev) {  // monotone-trace guard
                rho = rho_prev;
                alphav = alpha_prev;
                ++sol.guard_reverts;
                break;
            }
            trace.push_back(sum);
            ++sol.iters_feasibility;
            if (prev - sum <= cfg.eps) break;
            prev = sum;
        }
        sol.alpha_traces.push_back(std::move(trace));

        int worst = worst_task(alphav, active);
        if (worst < 0 || alphav[worst] <= 0.0) break;
        active[worst] = 0;
        sol.accepted[worst] = 0;
        sol.rejection_order.push_back(worst);
        rho[worst] = 0.0;
        alphav[worst] = 0.0;
    }

    // minimize transmit power for the survivors against the fixed radio share
    bool any = std::any_of(active.begin(), active.end(), [](char a) { return a != 0; });
    if (any) {
        for (int k = 0; k < n; ++k)
            if (active[k]) floors[k] = inst.tasks[k].data_bits / t_ran_s;
        power::Problem pb = make_problem(inst, active, floors, nullptr);
        auto cc = power::ccp_minimize(pb, rho, cfg.eps, cfg.i_rho_max);
        if (cc.status == power::Status::feasible) {
            rho = cc.rho;
            sol.min_ccp_slack = std::min(sol.min_ccp_slack, cc.min_orig_slack);
        }
    }

    // placement against what the radio share leaves of the deadline; power
    // and rates are frozen from here on, rejected tasks stay on air
    transport::Assignment as(n);
    placement::Context ctx;
    ctx.topo = &inst.topo;
    ctx.paths = &inst.paths;
    ctx.tasks = &inst.tasks;
    ctx.rate_bps.assign(n, 0.0);
    ctx.budget_s.assign(n, 0.0);
    ctx.radio_s.assign(n, 0.0);
    ctx.active = active;
    for (int k = 0; k < n; ++k) {
        ctx.budget_s[k] = inst.tasks[k].max_latency_s - t_ran_s;
        if (active[k]) ctx.rate_bps[k] = radio::rate(inst.env, rho, k);
    }

    for (int round = 0; round <= n; ++round) {
        std::vector<double> trace;
        double prev = kInf;
        for (int it = 0; it < cfg.i_max; ++it) {
            transport::Assignment as_prev = as;
            placement::place_feasibility(ctx, as);
            double sum = sum_alpha(as.alpha, ctx.active);
            if (sum > prev) {  // monotone-trace guard
                as = as_prev;
                ++sol.guard_reverts;
                break;
            }
            trace.push_back(sum);
            ++sol.iters_feasibility;
            if (prev - sum <= cfg.eps) break;
            prev = sum;
        }
        sol.alpha_traces.push_back(std::move(trace));

        int worst = worst_task(as.alpha, ctx.active);
        if (worst < 0 || as.alpha[worst] <= 0.0) break;
        ctx.active[worst] = 0;
        sol.accepted[worst] = 0;
        sol.rejection_order.push_back(worst);
        as.clear(worst);
    }

    double e_prev = energy(inst.topo, sol.accepted, rho, as.ups, as.node, cfg.eta);
    sol.energy_trace.push_back(e_prev);
    for (int it = 0; it < cfg.i_max; ++it) {
        transport::Assignment as_prev = as;
        placement::place_optimize(ctx, as);
        double e = energy(inst.topo, sol.accepted, rho, as.ups, as.node, cfg.eta);
        if (e > e_prev) {  // monotone-trace guard
            as = as_prev;
            ++sol.guard_reverts;
            break;
        }
        sol.energy_trace.push_back(e);
        ++sol.iters_refine;
        if (e_prev - e <= cfg.eps) break;
        e_prev = e;
    }

    store(sol, as, rho);
    sol.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
}

bool validate_solution(const ScenarioInstance& inst, const Solution& sol, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why != nullptr) *why = msg;
        return false;
    };
    int n = inst.num_tasks();
    if (static_cast<int>(sol.accepted.size()) != n || static_cast<int>(sol.rho.size()) != n ||
        static_cast<int>(sol.ups.size()) != n || static_cast<int>(sol.node.size()) != n ||
        static_cast<int>(sol.path.size()) != n)
        return fail("solution vectors do not match the task count");

    std::vector<double> rate(n, 0.0);
    for (int k = 0; k < n; ++k) rate[k] = radio::rate(inst.env, sol.rho, k);

    for (int k = 0; k < n; ++k) {
        if (sol.rho[k] < 0.0 || sol.rho[k] > inst.env.p_max_w[k] + 1e-12) {
            std::ostringstream os;
            os << "transmit power of task " << k << " outside [0, P_max]";
            return fail(os.str());
        }
    }
    for (int k = 0; k < n; ++k) {
        if (!sol.accepted[k]) continue;
        if (sol.node[k] < 0 || sol.node[k] >= inst.topo.num_nodes())
            return fail("accepted task " + std::to_string(k) + " has no executing node");
        if (sol.path[k] < 0 || sol.path[k] >= inst.paths.num_options(sol.node[k]))
            return fail("accepted task " + std::to_string(k) + " has no valid path");
        if (!(sol.ups[k] > 0.0))
            return fail("accepted task " + std::to_string(k) + " has no compute share");
        double total = radio::tx_latency(inst.tasks[k].data_bits, rate[k]) +
                       transport::prop_latency(inst.paths, sol.node[k], sol.path[k]) +
                       inst.tasks[k].load_cycles / sol.ups[k];
        if (!(total <= inst.tasks[k].max_latency_s + 1e-9)) {
            std::ostringstream os;
            os << "task " << k << " misses its deadline: " << total << " s > "
               << inst.tasks[k].max_latency_s << " s";
            return fail(os.str());
        }
    }
    for (int node = 0; node < inst.topo.num_nodes(); ++node) {
        double used = 0.0;
        for (int k = 0; k < n; ++k)
            if (sol.accepted[k] && sol.node[k] == node) used += sol.ups[k];
        double cap = inst.topo.capacity_cps[node];
        if (used > cap + 1e-9 * std::max(1.0, cap)) {
            std::ostringstream os;
            os << "node " << node << " compute overcommitted: " << used << " > " << cap;
            return fail(os.str());
        }
    }
    for (int e = 0; e < static_cast<int>(inst.topo.links.size()); ++e) {
        double used = 0.0;
        for (int k = 0; k < n; ++k) {
            if (!sol.accepted[k] || sol.node[k] < 0) continue;
            const auto& lks = inst.paths.paths[sol.node[k]][sol.path[k]].links;
            if (std::find(lks.begin(), lks.end(), e) != lks.end()) used += rate[k];
        }
        double cap = inst.topo.links[e].capacity_bps;
        if (used > cap + 1e-9 * std::max(1.0, cap)) {
            std::ostringstream os;
            os << "link " << e << " overloaded: " << used << " bps > " << cap << " bps";
            return fail(os.str());
        }
    }
    for (int u = 0; u < inst.env.num_rrhs; ++u) {
        double used = 0.0;
        for (int k = 0; k < n; ++k)
            if (inst.env.serving[k] == u) used += rate[k];  // ghosts included
        double cap = inst.env.fronthaul_bps;
        if (used > cap + 1e-9 * std::max(1.0, cap)) {
            std::ostringstream os;
            os << "fronthaul of RRH " << u << " overloaded: " << used << " bps > " << cap;
            return fail(os.str());
        }
    }
    if (why != nullptr) why->clear();
    return true;
}

}  // namespace offsim::pipelines
