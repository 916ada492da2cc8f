#include "offsim/lto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "offsim/radio.hpp"
#include "offsim/transport.hpp"

namespace offsim::lto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBisectCap = 200;

double demand_at(const std::vector<double>& load, const std::vector<double>& tt,
                 double lambda) {
    double d = 0.0;
    for (std::size_t k = 0; k < load.size(); ++k)
        d += load[k] / std::max(tt[k], std::sqrt(load[k] * lambda));
    return d;
}

}  // namespace

double lto_rate(const radio::Environment& env, int k) {
    double snr = env.gain[k][k] * env.p_max_w[k] / env.noise_w;
    return env.bandwidth_hz * std::log2(1.0 + snr);
}

KktResult kkt_allocate(const std::vector<double>& load_cycles,
                       const std::vector<double>& t_tilde_s, double capacity_cps,
                       double tol_lambda, double rel_tol_residual) {
    int n = static_cast<int>(load_cycles.size());
    KktResult r;
    r.ups.assign(n, 0.0);
    r.alpha.assign(n, 0.0);
    if (n == 0) {
        r.residual = -capacity_cps;
        return r;
    }

    bool all_pos = true;
    double dem0 = 0.0;
    for (int k = 0; k < n; ++k) {
        if (t_tilde_s[k] <= 0.0) {
            all_pos = false;
            break;
        }
        dem0 += load_cycles[k] / t_tilde_s[k];
    }
    if (all_pos && dem0 <= capacity_cps) {
        for (int k = 0; k < n; ++k) r.ups[k] = load_cycles[k] / t_tilde_s[k];
        r.residual = dem0 - capacity_cps;
        return r;
    }

    // demand is non-increasing in lambda; bisect the bracket geometrically so
    // the relative width, not the absolute one, hits tol_lambda
    double lo = 1e-20, hi = 1e20;
    while (hi > lo * (1.0 + tol_lambda) && r.iters < kBisectCap) {
        double mid = std::sqrt(lo * hi);
        if (demand_at(load_cycles, t_tilde_s, mid) > capacity_cps)
            lo = mid;
        else
            hi = mid;
        ++r.iters;
    }
    r.lambda = std::sqrt(lo * hi);
    for (int k = 0; k < n; ++k) {
        double d = std::max(t_tilde_s[k], std::sqrt(load_cycles[k] * r.lambda));
        r.ups[k] = load_cycles[k] / d;
        r.alpha[k] = d > t_tilde_s[k] ? d - t_tilde_s[k] : 0.0;
    }
    r.residual = demand_at(load_cycles, t_tilde_s, r.lambda) - capacity_cps;
    (void)rel_tol_residual;  // reported through r.residual; callers assert on it
    return r;
}

namespace {

// Per-thread scratch for scoring one assignment vector. Accumulation orders
// are pinned (tasks ascending, nodes ascending) so every worker split and the
// single-threaded scan produce bitwise identical sums.
struct Scorer {
    const ScenarioInstance* inst;
    const std::vector<transport::Candidate>* options;
    const std::vector<double>* rate;
    std::vector<std::vector<double>> t_tilde;  // [task][option]
    double tol_lambda = 1e-12;

    std::vector<int> digits;
    std::vector<double> flow;
    std::vector<double> loads, tts;
    std::vector<int> members;
    std::vector<double> ups, alpha;

    explicit Scorer(const ScenarioInstance& in, const std::vector<transport::Candidate>& opts,
                    const std::vector<double>& rates)
        : inst(&in), options(&opts), rate(&rates) {
        int n = in.num_tasks();
        t_tilde.assign(n, std::vector<double>(opts.size(), 0.0));
        for (int k = 0; k < n; ++k) {
            double ttx = in.tasks[k].data_bits / rates[k];
            for (std::size_t o = 0; o < opts.size(); ++o)
                t_tilde[k][o] = in.tasks[k].max_latency_s - ttx -
                                transport::prop_latency(in.paths, opts[o].node, opts[o].b);
        }
        tol_lambda = in.cfg.bisect_tol;
        digits.assign(n, 0);
        flow.assign(in.topo.links.size(), 0.0);
        ups.assign(n, 0.0);
        alpha.assign(n, 0.0);
    }

    void decode(std::int64_t v) {
        int n = static_cast<int>(digits.size());
        auto opts = static_cast<std::int64_t>(options->size());
        for (int k = n - 1; k >= 0; --k) {  // task 0 is the most significant digit
            digits[k] = static_cast<int>(v % opts);
            v /= opts;
        }
    }

    // sum of alpha for the decoded vector, +inf when a link overflows
    double score(std::int64_t v, bool keep_allocation) {
        decode(v);
        const auto& topo = inst->topo;
        const auto& ps = inst->paths;
        int n = static_cast<int>(digits.size());

        std::fill(flow.begin(), flow.end(), 0.0);
        for (int k = 0; k < n; ++k) {
            const auto& c = (*options)[digits[k]];
            for (int e : ps.paths[c.node][c.b].links) flow[e] += (*rate)[k];
        }
        for (std::size_t e = 0; e < flow.size(); ++e)
            if (flow[e] > topo.links[e].capacity_bps) return kInf;

        double sum = 0.0;
        for (int node = 0; node < topo.num_nodes(); ++node) {
            loads.clear();
            tts.clear();
            members.clear();
            for (int k = 0; k < n; ++k) {
                if ((*options)[digits[k]].node != node) continue;
                loads.push_back(inst->tasks[k].load_cycles);
                tts.push_back(t_tilde[k][digits[k]]);
                members.push_back(k);
            }
            if (members.empty()) continue;
            auto r = kkt_allocate(loads, tts, topo.capacity_cps[node], tol_lambda);
            for (std::size_t i = 0; i < members.size(); ++i) {
                sum += r.alpha[i];
                if (keep_allocation) {
                    ups[members[i]] = r.ups[i];
                    alpha[members[i]] = r.alpha[i];
                }
            }
        }
        return sum;
    }
};

}  // namespace

SearchResult lto_search(const ScenarioInstance& inst, std::int64_t budget, int workers) {
    const auto& topo = inst.topo;
    const auto& ps = inst.paths;
    int n = inst.num_tasks();

    std::vector<transport::Candidate> options;
    for (int node = 0; node < topo.num_nodes(); ++node)
        for (int b = 0; b < ps.num_options(node); ++b) options.push_back({node, b});
    auto opts = static_cast<std::int64_t>(options.size());

    std::int64_t total = 1;
    for (int k = 0; k < n; ++k) {
        if (total > budget / opts)
            throw BudgetError("assignment space " + std::to_string(opts) + "^" +
                              std::to_string(n) + " exceeds the search budget " +
                              std::to_string(budget));
        total *= opts;
    }

    std::vector<double> rate(n);
    for (int k = 0; k < n; ++k) rate[k] = lto_rate(inst.env, k);

    struct Best {
        double sum = kInf;
        std::int64_t index = -1;
    };
    auto scan = [&](std::int64_t from, std::int64_t to) {
        Scorer sc(inst, options, rate);
        Best b;
        for (std::int64_t v = from; v < to; ++v) {
            double s = sc.score(v, false);
            if (s < b.sum) {
                b.sum = s;
                b.index = v;
            }
        }
        return b;
    };

    Best best;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(std::min<std::int64_t>(
                                                     total, 1024))));
    if (workers <= 1) {
        best = scan(0, total);
    } else {
        std::vector<Best> part(workers);
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            std::int64_t from = total * w / workers;
            std::int64_t to = total * (w + 1) / workers;
            pool.emplace_back([&, w, from, to] { part[w] = scan(from, to); });
        }
        for (auto& t : pool) t.join();
        // smallest (sum, index) equals the single-pass first-found winner
        for (const auto& p : part)
            if (p.sum < best.sum || (p.sum == best.sum && p.index < best.index)) best = p;
    }

    SearchResult out;
    out.candidates = total;
    out.node.assign(n, -1);
    out.path.assign(n, -1);
    out.ups.assign(n, 0.0);
    out.alpha.assign(n, 0.0);
    if (best.index < 0) return out;  // n == 0

    Scorer sc(inst, options, rate);
    out.sum_alpha = sc.score(best.index, true);
    for (int k = 0; k < n; ++k) {
        out.node[k] = options[sc.digits[k]].node;
        out.path[k] = options[sc.digits[k]].b;
        out.ups[k] = sc.ups[k];
        out.alpha[k] = sc.alpha[k];
        if (sc.alpha[k] == 0.0) ++out.accepted;
    }
    return out;
}

}  // namespace offsim::lto
