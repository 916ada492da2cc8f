#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "offsim/radio.hpp"
#include "offsim/transport.hpp"

namespace offsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Task {
    double load_cycles = 0.0;   // CPU cycles to execute
    double data_bits = 0.0;     // uplink payload
    double max_latency_s = 0.0; // end-to-end deadline
};

struct TaskClassSpec {
    int count = 0;
    double load_cycles = 1e6;
    double data_bits = 1e5;
    double max_latency_s = 0.040;
};

struct NodeSpec {
    int id = 0;
    double capacity_cps = 1e9;
    double lambda_eff = 1e-28;
    bool is_bbu = false;
};

struct LinkSpec {
    int a = 0;
    int b = 0;
    double capacity_bps = 0.4e9;
    double latency_s = 0.010;
};

// Full experiment description. Anything not set in the config text falls back
// to the defaults below (one uniform task class, four RRHs, six-node
// transport graph with one local, three regional and two national nodes).
struct ScenarioConfig {
    // [radio]
    int num_rrhs = 4;
    int antennas = 32;
    double bandwidth_hz = 20e6;
    double noise_dbm_per_hz = -150.0;
    double p_max_w = 0.5;
    double fronthaul_bps = 0.6e9;
    double inter_site_m = 100.0;
    double area_radius_m = 100.0;

    // [topology]
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;

    // [tasks]
    std::vector<TaskClassSpec> classes;

    // [algo]
    double eps = 1e-3;
    int i_max = 50;
    int i_rho_max = 100;
    int b_max = 4;
    double eta = 1.0;
    double t_ran_s = 0.015;
    double bisect_tol = 1e-12;

    // [rng]
    std::uint64_t seed = 1;

    int num_tasks() const {
        int k = 0;
        for (const auto& c : classes) k += c.count;
        return k;
    }
};

ScenarioConfig default_config();

// Parses the sectioned key/value format used by the CLI (see README).
// Unknown sections or keys raise ConfigError naming the offender, as do
// values that violate the schema (non-positive capacities, duplicate links,
// a missing or duplicated BBU flag, ...).
ScenarioConfig load_config(const std::string& text);
void validate(const ScenarioConfig& cfg);

// One drawn realization: user drops, serving RRHs, effective gains, transport
// paths. Same (config, seed) reproduces this bit for bit.
struct ScenarioInstance {
    ScenarioConfig cfg;
    std::uint64_t seed = 0;
    std::vector<Task> tasks;
    std::vector<std::array<double, 2>> rrh_pos_m;
    std::vector<std::array<double, 2>> user_pos_m;
    std::vector<int> serving;  // user -> RRH, nearest by distance
    radio::Environment env;
    transport::Topology topo;
    transport::PathSet paths;

    int num_tasks() const { return static_cast<int>(tasks.size()); }
};

ScenarioInstance generate_instance(const ScenarioConfig& cfg, std::uint64_t seed);

}  // namespace offsim
