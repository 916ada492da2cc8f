#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "offsim/lto.hpp"
#include "offsim/pipelines.hpp"
#include "offsim/scenario.hpp"
#include "offsim/sweep.hpp"

using namespace offsim;

namespace {

// six-node default topology, trimmed to three tasks so runs stay quick
ScenarioConfig tiny_config() {
    ScenarioConfig cfg = default_config();
    cfg.classes = {{3, 1e6, 1e5, 0.040}};
    return cfg;
}

// Local / regional / national chain, capacity left to the sweep. The short
// class pairs heavy compute with a small payload, so admission is decided by
// node capacity (load/deadline = 1e9 exactly) and never by the radio side;
// the longer classes are light enough to fit anywhere at any swept capacity.
ScenarioConfig chain_config() {
    ScenarioConfig cfg = default_config();
    cfg.nodes = {{0, 1e9, 1e-28, true}, {1, 1e9, 1e-28, false}, {2, 1e9, 1e-28, false}};
    cfg.links = {{0, 1, 1e9, 0.010}, {1, 2, 1e9, 0.010}};
    cfg.classes = {{10, 1e7, 2e3, 0.010}, {10, 2e6, 2e4, 0.050}, {10, 2e6, 4e4, 0.100}};
    return cfg;
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto nl = s.find('\n', pos);
        if (nl == std::string::npos) nl = s.size();
        out.push_back(s.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto c = line.find(',', pos);
        if (c == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, c - pos));
        pos = c + 1;
    }
    return out;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("apply_param rewrites the intended knob and nothing else") {
    ScenarioConfig base = tiny_config();

    SUBCASE("T retargets every class deadline") {
        ScenarioConfig cfg = sweep::apply_param(base, "T", 0.1);
        for (const auto& c : cfg.classes) CHECK(c.max_latency_s == 0.1);
        CHECK(cfg.classes[0].data_bits == base.classes[0].data_bits);
        CHECK(cfg.nodes[0].capacity_cps == base.nodes[0].capacity_cps);
    }
    SUBCASE("K resizes the single class") {
        ScenarioConfig cfg = sweep::apply_param(base, "K", 7.0);
        CHECK(cfg.classes[0].count == 7);
        CHECK(cfg.num_tasks() == 7);
    }
    SUBCASE("K refuses multi-class templates and fractions") {
        ScenarioConfig multi = chain_config();
        CHECK_THROWS_AS(sweep::apply_param(multi, "K", 7.0), ConfigError);
        CHECK_THROWS_AS(sweep::apply_param(base, "K", 7.5), ConfigError);
        CHECK_THROWS_AS(sweep::apply_param(base, "K", 0.0), ConfigError);
    }
    SUBCASE("C rescales every node capacity") {
        ScenarioConfig cfg = sweep::apply_param(base, "C", 5e9);
        for (const auto& n : cfg.nodes) CHECK(n.capacity_cps == 5e9);
        CHECK(cfg.nodes[0].lambda_eff == base.nodes[0].lambda_eff);
    }
    SUBCASE("D and L retarget the task classes") {
        CHECK(sweep::apply_param(base, "D", 2e5).classes[0].data_bits == 2e5);
        CHECK(sweep::apply_param(base, "L", 3e6).classes[0].load_cycles == 3e6);
    }
    SUBCASE("TRAN retargets the radio budget") {
        CHECK(sweep::apply_param(base, "TRAN", 0.005).t_ran_s == 0.005);
    }
    SUBCASE("nonsense is rejected") {
        CHECK_THROWS_AS(sweep::apply_param(base, "Q", 1.0), ConfigError);
        CHECK_THROWS_AS(sweep::apply_param(base, "T", -0.01), ConfigError);
        CHECK_THROWS_AS(sweep::apply_param(base, "C", 0.0), ConfigError);
    }
}

TEST_CASE("a tiny sweep emits one sorted row per value, seed and algorithm") {
    sweep::Spec spec;
    spec.base = tiny_config();
    spec.param = "T";
    spec.values = {0.040, 0.020};  // deliberately unsorted
    spec.algos = {"jto", "dto"};   // deliberately not in output order
    spec.trials = 2;
    spec.seed = 5;

    auto rows = sweep::run_sweep(spec);
    REQUIRE(rows.size() == 8);  // 2 values x 2 trials x 2 algos

    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto key = [](const sweep::ResultRow& r) {
            return std::make_tuple(r.value, r.seed, r.algo);
        };
        CHECK(key(rows[i - 1]) < key(rows[i]));
    }
    CHECK(rows[0].value == 0.020);
    CHECK(rows[0].seed == 5);
    CHECK(rows[0].algo == "dto");
    CHECK(rows[1].algo == "jto");

    for (const auto& r : rows) {
        CHECK(r.param == "T");
        CHECK(r.acceptance_ratio >= 0.0);
        CHECK(r.acceptance_ratio <= 1.0);
        CHECK(std::isfinite(r.energy_w));
        CHECK(r.iters >= 1);
        CHECK(r.wall_s >= 0.0);
    }

    // acceptance ratio re-derives from the rejection log of a fresh run
    ScenarioConfig cfg = sweep::apply_param(spec.base, "T", 0.040);
    ScenarioInstance inst = generate_instance(cfg, 6);
    pipelines::Solution sol = pipelines::run_jto(inst);
    auto it = std::find_if(rows.begin(), rows.end(), [](const sweep::ResultRow& r) {
        return r.value == 0.040 && r.seed == 6 && r.algo == "jto";
    });
    REQUIRE(it != rows.end());
    CHECK(it->acceptance_ratio == sol.acceptance_ratio());
    CHECK(sol.acceptance_ratio() ==
          1.0 - static_cast<double>(sol.rejection_order.size()) / inst.num_tasks());
    CHECK(it->energy_w ==
          pipelines::energy(inst.topo, sol.accepted, sol.rho, sol.ups, sol.node, cfg.eta));
    CHECK(it->iters == sol.iters_feasibility + sol.iters_refine);
}

TEST_CASE("csv output is byte-stable and carries the exact header") {
    CHECK(std::string(sweep::kCsvHeader) ==
          "seed,algo,param,value,acceptance_ratio,energy_w,mean_ttx_s,mean_texe_s,"
          "mean_tprop_s,iters,wall_s,placement_hist");

    sweep::Spec spec;
    spec.base = tiny_config();
    spec.param = "D";
    spec.values = {1e5, 2e5};
    spec.algos = {"jto"};
    spec.trials = 1;
    spec.seed = 9;
    spec.omit_timing = true;

    std::string a = sweep::to_csv(sweep::run_sweep(spec));
    std::string b = sweep::to_csv(sweep::run_sweep(spec));
    CHECK(a == b);

    auto lines = split_lines(a);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == sweep::kCsvHeader);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_fields(lines[i]);
        REQUIRE(fields.size() == 12);
        CHECK(fields[0] == "9");
        CHECK(fields[1] == "jto");
        CHECK(fields[2] == "D");
        CHECK(fields[10] == "0");  // omit_timing zeroes the wall clock
    }

    // without the flag only the wall clock may move between runs
    spec.omit_timing = false;
    auto r1 = sweep::run_sweep(spec);
    auto r2 = sweep::run_sweep(spec);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].acceptance_ratio == r2[i].acceptance_ratio);
        CHECK(r1[i].energy_w == r2[i].energy_w);
        CHECK(r1[i].mean_ttx_s == r2[i].mean_ttx_s);
        CHECK(r1[i].mean_texe_s == r2[i].mean_texe_s);
        CHECK(r1[i].mean_tprop_s == r2[i].mean_tprop_s);
        CHECK(r1[i].iters == r2[i].iters);
        CHECK(r1[i].placement_hist == r2[i].placement_hist);
    }
}

TEST_CASE("latency means and the placement histogram describe the accepted set") {
    sweep::Spec spec;
    spec.base = tiny_config();
    spec.param = "T";
    spec.values = {0.040};
    spec.algos = {"jto"};
    spec.trials = 1;
    spec.seed = 3;

    auto rows = sweep::run_sweep(spec);
    REQUIRE(rows.size() == 1);
    const auto& r = rows[0];

    ScenarioInstance inst = generate_instance(sweep::apply_param(spec.base, "T", 0.040), 3);
    pipelines::Solution sol = pipelines::run_jto(inst);
    double ttx = 0.0, texe = 0.0, tprop = 0.0;
    int acc = 0, hist_total = 0;
    for (int k = 0; k < inst.num_tasks(); ++k) {
        if (!sol.accepted[k]) continue;
        ++acc;
        ttx += radio::tx_latency(inst.tasks[k].data_bits, radio::rate(inst.env, sol.rho, k));
        texe += inst.tasks[k].load_cycles / sol.ups[k];
        tprop += transport::prop_latency(inst.paths, sol.node[k], sol.path[k]);
    }
    REQUIRE(acc > 0);
    CHECK(r.mean_ttx_s == ttx / acc);
    CHECK(r.mean_texe_s == texe / acc);
    CHECK(r.mean_tprop_s == tprop / acc);

    CHECK(!r.placement_hist.empty());
    REQUIRE(split_fields(r.placement_hist).size() == 1);  // no commas inside a csv field
    int last_node = -1;
    std::size_t pos = 0;
    while (pos < r.placement_hist.size()) {
        auto semi = r.placement_hist.find(';', pos);
        if (semi == std::string::npos) semi = r.placement_hist.size();
        std::string part = r.placement_hist.substr(pos, semi - pos);
        auto colon = part.find(':');
        REQUIRE(colon != std::string::npos);
        int node = std::stoi(part.substr(0, colon));
        int count = std::stoi(part.substr(colon + 1));
        CHECK(node > last_node);  // ascending node ids
        CHECK(count > 0);
        int have = 0;
        for (int k = 0; k < inst.num_tasks(); ++k)
            if (sol.accepted[k] && sol.node[k] == node) ++have;
        CHECK(count == have);
        hist_total += count;
        last_node = node;
        pos = semi + 1;
    }
    CHECK(hist_total == acc);
}

TEST_CASE("lto rows report the relaxed bound and surface budget refusals") {
    sweep::Spec spec;
    spec.base = tiny_config();
    spec.param = "T";
    spec.values = {0.040};
    spec.algos = {"lto"};
    spec.trials = 1;
    spec.seed = 2;

    SUBCASE("a solvable instance fills the relaxed-model columns") {
        auto rows = sweep::run_sweep(spec);
        REQUIRE(rows.size() == 1);
        const auto& r = rows[0];

        ScenarioInstance inst = generate_instance(sweep::apply_param(spec.base, "T", 0.040), 2);
        auto res = lto::lto_search(inst);
        CHECK(r.acceptance_ratio == static_cast<double>(res.accepted) / inst.num_tasks());
        CHECK(std::isnan(r.energy_w));  // full-power bound has no energy story
        CHECK(r.iters == res.candidates);
        if (res.accepted > 0) {
            double ttx = 0.0;
            int acc = 0;
            for (int k = 0; k < inst.num_tasks(); ++k) {
                if (res.alpha[k] != 0.0) continue;
                ++acc;
                ttx += radio::tx_latency(inst.tasks[k].data_bits, lto::lto_rate(inst.env, k));
            }
            CHECK(r.mean_ttx_s == ttx / acc);
        }
    }
    SUBCASE("a blown enumeration budget becomes a marker row") {
        spec.lto_budget = 10;  // 6 placement options ^ 3 tasks = 216 candidates
        auto rows = sweep::run_sweep(spec);
        REQUIRE(rows.size() == 1);
        CHECK(std::isnan(rows[0].acceptance_ratio));
        CHECK(std::isnan(rows[0].energy_w));
        CHECK(rows[0].iters == 0);
        CHECK(rows[0].placement_hist == "budget_exceeded");
    }
}

TEST_CASE("a radio budget wider than the deadline becomes a marker row") {
    sweep::Spec spec;
    spec.base = tiny_config();
    spec.base.t_ran_s = 0.015;
    spec.param = "T";
    spec.values = {0.010};  // deadline inside the radio budget
    spec.algos = {"dto"};
    spec.trials = 1;

    auto rows = sweep::run_sweep(spec);
    REQUIRE(rows.size() == 1);
    CHECK(std::isnan(rows[0].acceptance_ratio));
    CHECK(rows[0].placement_hist == "invalid_radio_split");
}

TEST_CASE("workers do not change the rows") {
    sweep::Spec spec;
    spec.base = tiny_config();
    spec.param = "K";
    spec.values = {2, 3};
    spec.algos = {"jto", "lto"};
    spec.trials = 2;
    spec.seed = 7;
    spec.omit_timing = true;

    spec.workers = 1;
    std::string serial = sweep::to_csv(sweep::run_sweep(spec));
    spec.workers = 3;
    std::string parallel = sweep::to_csv(sweep::run_sweep(spec));
    CHECK(serial == parallel);
}

TEST_CASE("the sweep rejects malformed specs") {
    sweep::Spec spec;
    spec.base = tiny_config();
    spec.param = "T";
    spec.values = {};
    spec.algos = {"jto"};
    CHECK_THROWS_AS(sweep::run_sweep(spec), ConfigError);
    spec.values = {0.040};
    spec.trials = 0;
    CHECK_THROWS_AS(sweep::run_sweep(spec), ConfigError);
    spec.trials = 1;
    spec.algos = {"jto", "abc"};
    CHECK_THROWS_AS(sweep::run_sweep(spec), ConfigError);
    spec.algos = {};
    CHECK_THROWS_AS(sweep::run_sweep(spec), ConfigError);
}

TEST_CASE("the class experiment reports per-class admission and placement") {
    sweep::ClassSpec spec;
    spec.base = chain_config();
    spec.c_values = {20e9, 1e9};  // deliberately unsorted
    spec.trials = 1;
    spec.seed = 1;

    auto rows = sweep::run_class_experiment(spec);
    REQUIRE(rows.size() == 6);  // 2 capacities x 3 classes

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        CHECK(r.cls == static_cast<int>(i % 3));
        CHECK(r.capacity_cps == (i < 3 ? 1e9 : 20e9));  // sorted ascending
        CHECK(r.acceptance_ratio >= 0.0);
        CHECK(r.acceptance_ratio <= 1.0);
        REQUIRE(r.node_share.size() == 3);
        double total = 0.0;
        for (double s : r.node_share) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
            total += s;
        }
        if (r.acceptance_ratio > 0.0) CHECK(total == doctest::Approx(1.0));
    }

    // an abundant capacity admits everything
    for (std::size_t i = 3; i < 6; ++i) CHECK(rows[i].acceptance_ratio == 1.0);

    std::string csv = sweep::class_rows_to_csv(rows);
    auto lines = split_lines(csv);
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "capacity_cps,cls,acceptance_ratio,node_share");
    CHECK(split_fields(lines[1]).size() == 4);
}

}  // TEST_SUITE
