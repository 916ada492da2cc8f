#include "offsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "offsim/lto.hpp"
#include "offsim/pipelines.hpp"
#include "offsim/radio.hpp"

namespace offsim::sweep {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string hist_string(const std::map<int, int>& counts) {
    std::string out;
    for (const auto& [node, count] : counts) {
        if (!out.empty()) out += ';';
        out += std::to_string(node) + ':' + std::to_string(count);
    }
    return out;
}

ResultRow pipeline_row(const ScenarioInstance& inst, const pipelines::Solution& sol) {
    ResultRow r;
    r.acceptance_ratio = sol.acceptance_ratio();
    r.energy_w = pipelines::energy(inst.topo, sol.accepted, sol.rho, sol.ups, sol.node,
                                   inst.cfg.eta);
    r.iters = sol.iters_feasibility + sol.iters_refine;
    r.wall_s = sol.wall_s;

    std::map<int, int> counts;
    double ttx = 0.0, texe = 0.0, tprop = 0.0;
    int acc = 0;
    for (int k = 0; k < inst.num_tasks(); ++k) {
        if (!sol.accepted[k]) continue;
        ++acc;
        ttx += radio::tx_latency(inst.tasks[k].data_bits, radio::rate(inst.env, sol.rho, k));
        texe += inst.tasks[k].load_cycles / sol.ups[k];
        tprop += transport::prop_latency(inst.paths, sol.node[k], sol.path[k]);
        ++counts[sol.node[k]];
    }
    if (acc > 0) {
        r.mean_ttx_s = ttx / acc;
        r.mean_texe_s = texe / acc;
        r.mean_tprop_s = tprop / acc;
    }
    r.placement_hist = hist_string(counts);
    return r;
}

ResultRow lto_row(const ScenarioInstance& inst, std::int64_t budget) {
    ResultRow r;
    auto t0 = std::chrono::steady_clock::now();
    lto::SearchResult res;
    try {
        res = lto::lto_search(inst, budget);
    } catch (const lto::BudgetError&) {
        r.acceptance_ratio = r.energy_w = r.mean_ttx_s = r.mean_texe_s = r.mean_tprop_s = kNan;
        r.placement_hist = "budget_exceeded";
        return r;
    }
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    r.acceptance_ratio = static_cast<double>(res.accepted) / inst.num_tasks();
    r.energy_w = kNan;  // the full-power relaxation has no energy objective
    r.iters = res.candidates;

    std::map<int, int> counts;
    double ttx = 0.0, texe = 0.0, tprop = 0.0;
    int acc = 0;
    for (int k = 0; k < inst.num_tasks(); ++k) {
        if (res.alpha[k] != 0.0) continue;
        ++acc;
        ttx += radio::tx_latency(inst.tasks[k].data_bits, lto::lto_rate(inst.env, k));
        texe += inst.tasks[k].load_cycles / res.ups[k];
        tprop += transport::prop_latency(inst.paths, res.node[k], res.path[k]);
        ++counts[res.node[k]];
    }
    if (acc > 0) {
        r.mean_ttx_s = ttx / acc;
        r.mean_texe_s = texe / acc;
        r.mean_tprop_s = tprop / acc;
    }
    r.placement_hist = hist_string(counts);
    return r;
}

ResultRow marker_row(const std::string& marker) {
    ResultRow r;
    r.acceptance_ratio = r.energy_w = r.mean_ttx_s = r.mean_texe_s = r.mean_tprop_s = kNan;
    r.placement_hist = marker;
    return r;
}

// Runs `count` jobs over `workers` threads; the first exception wins.
void parallel_for(int count, int workers, const std::function<void(int)>& job) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto body = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

ScenarioConfig apply_param(const ScenarioConfig& base, const std::string& param, double value) {
    ScenarioConfig cfg = base;
    if (param == "T") {
        for (auto& c : cfg.classes) c.max_latency_s = value;
    } else if (param == "K") {
        if (cfg.classes.size() != 1)
            throw ConfigError("K sweeps need a single-class task template");
        double r = std::round(value);
        if (!(value > 0.0) || std::abs(value - r) > 1e-9)
            throw ConfigError("K must be a positive integer, got " + fmt(value));
        cfg.classes[0].count = static_cast<int>(r);
    } else if (param == "C") {
        for (auto& n : cfg.nodes) n.capacity_cps = value;
    } else if (param == "D") {
        for (auto& c : cfg.classes) c.data_bits = value;
    } else if (param == "L") {
        for (auto& c : cfg.classes) c.load_cycles = value;
    } else if (param == "TRAN") {
        cfg.t_ran_s = value;
    } else {
        throw ConfigError("unknown sweep parameter '" + param + "' (want T, K, C, D, L, TRAN)");
    }
    validate(cfg);
    return cfg;
}

const char* kCsvHeader =
    "seed,algo,param,value,acceptance_ratio,energy_w,mean_ttx_s,mean_texe_s,mean_tprop_s,"
    "iters,wall_s,placement_hist";

std::vector<ResultRow> run_sweep(const Spec& spec) {
    if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
    if (spec.trials < 1) throw ConfigError("sweep needs trials >= 1");
    if (spec.algos.empty()) throw ConfigError("sweep needs at least one algorithm");
    for (const auto& a : spec.algos)
        if (a != "jto" && a != "dto" && a != "lto")
            throw ConfigError("unknown algorithm '" + a + "' (want jto, dto, lto)");

    // configs fail fast before any thread spins up
    std::vector<ScenarioConfig> cfgs;
    cfgs.reserve(spec.values.size());
    for (double v : spec.values) cfgs.push_back(apply_param(spec.base, spec.param, v));

    struct Job {
        int value_idx;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int vi = 0; vi < static_cast<int>(spec.values.size()); ++vi)
        for (int t = 0; t < spec.trials; ++t)
            jobs.push_back({vi, spec.seed + static_cast<std::uint64_t>(t)});

    std::vector<std::vector<ResultRow>> slots(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), spec.workers, [&](int j) {
        const Job& job = jobs[j];
        ScenarioInstance inst = generate_instance(cfgs[job.value_idx], job.seed);
        for (const auto& algo : spec.algos) {
            ResultRow r;
            if (algo == "jto") {
                r = pipeline_row(inst, pipelines::run_jto(inst));
            } else if (algo == "dto") {
                try {
                    r = pipeline_row(inst, pipelines::run_dto(inst, inst.cfg.t_ran_s));
                } catch (const std::invalid_argument&) {
                    r = marker_row("invalid_radio_split");
                }
            } else {
                r = lto_row(inst, spec.lto_budget);
            }
            r.seed = job.seed;
            r.algo = algo;
            r.param = spec.param;
            r.value = spec.values[job.value_idx];
            if (spec.omit_timing) r.wall_s = 0.0;
            slots[j].push_back(std::move(r));
        }
    });

    std::vector<ResultRow> rows;
    for (auto& s : slots)
        for (auto& r : s) rows.push_back(std::move(r));
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::make_tuple(a.value, a.seed, a.algo) <
               std::make_tuple(b.value, b.seed, b.algo);
    });
    return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.seed);
        out += ',' + r.algo;
        out += ',' + r.param;
        out += ',' + fmt(r.value);
        out += ',' + fmt(r.acceptance_ratio);
        out += ',' + fmt(r.energy_w);
        out += ',' + fmt(r.mean_ttx_s);
        out += ',' + fmt(r.mean_texe_s);
        out += ',' + fmt(r.mean_tprop_s);
        out += ',' + std::to_string(r.iters);
        out += ',' + fmt(r.wall_s);
        out += ',' + r.placement_hist;
        out += '\n';
    }
    return out;
}

std::vector<ClassRow> run_class_experiment(const ClassSpec& spec) {
    validate(spec.base);
    if (spec.c_values.empty()) throw ConfigError("class experiment needs capacity values");
    if (spec.trials < 1) throw ConfigError("class experiment needs trials >= 1");

    std::vector<ScenarioConfig> cfgs;
    cfgs.reserve(spec.c_values.size());
    for (double c : spec.c_values) cfgs.push_back(apply_param(spec.base, "C", c));

    const int num_classes = static_cast<int>(spec.base.classes.size());
    const int num_nodes = static_cast<int>(spec.base.nodes.size());

    struct Tally {
        std::vector<std::int64_t> accepted, total;          // per class
        std::vector<std::vector<std::int64_t>> node_count;  // per class x node
    };
    struct Job {
        int value_idx;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int vi = 0; vi < static_cast<int>(spec.c_values.size()); ++vi)
        for (int t = 0; t < spec.trials; ++t)
            jobs.push_back({vi, spec.seed + static_cast<std::uint64_t>(t)});

    std::vector<Tally> slots(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), spec.workers, [&](int j) {
        const Job& job = jobs[j];
        ScenarioInstance inst = generate_instance(cfgs[job.value_idx], job.seed);
        pipelines::Solution sol = pipelines::run_jto(inst);

        Tally t;
        t.accepted.assign(num_classes, 0);
        t.total.assign(num_classes, 0);
        t.node_count.assign(num_classes, std::vector<std::int64_t>(num_nodes, 0));
        int k = 0;
        for (int c = 0; c < num_classes; ++c) {
            for (int i = 0; i < inst.cfg.classes[c].count; ++i, ++k) {
                ++t.total[c];
                if (!sol.accepted[k]) continue;
                ++t.accepted[c];
                ++t.node_count[c][sol.node[k]];
            }
        }
        slots[j] = std::move(t);
    });

    std::vector<ClassRow> rows;
    for (int vi = 0; vi < static_cast<int>(spec.c_values.size()); ++vi) {
        for (int c = 0; c < num_classes; ++c) {
            std::int64_t acc = 0, total = 0;
            std::vector<std::int64_t> nodes(num_nodes, 0);
            for (std::size_t j = 0; j < jobs.size(); ++j) {
                if (jobs[j].value_idx != vi) continue;
                acc += slots[j].accepted[c];
                total += slots[j].total[c];
                for (int n = 0; n < num_nodes; ++n) nodes[n] += slots[j].node_count[c][n];
            }
            ClassRow row;
            row.capacity_cps = spec.c_values[vi];
            row.cls = c;
            row.acceptance_ratio = total > 0 ? static_cast<double>(acc) / total : 0.0;
            row.node_share.assign(num_nodes, 0.0);
            if (acc > 0)
                for (int n = 0; n < num_nodes; ++n)
                    row.node_share[n] = static_cast<double>(nodes[n]) / acc;
            rows.push_back(std::move(row));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ClassRow& a, const ClassRow& b) {
        return std::make_tuple(a.capacity_cps, a.cls) < std::make_tuple(b.capacity_cps, b.cls);
    });
    return rows;
}

std::string class_rows_to_csv(const std::vector<ClassRow>& rows) {
    std::string out = "capacity_cps,cls,acceptance_ratio,node_share\n";
    for (const auto& r : rows) {
        out += fmt(r.capacity_cps);
        out += ',' + std::to_string(r.cls);
        out += ',' + fmt(r.acceptance_ratio);
        out += ',';
        for (std::size_t n = 0; n < r.node_share.size(); ++n) {
            if (n) out += ';';
            out += fmt(r.node_share[n]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace offsim::sweep
