#include "offsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

namespace offsim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, const std::string& where) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
        throw ConfigError("bad numeric value '" + tok + "' for " + where);
    return v;
}

long long parse_int(const std::string& tok, const std::string& where) {
    double v = parse_double(tok, where);
    long long i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("expected integer value for " + where + ", got '" + tok + "'");
    return i;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

}  // namespace

ScenarioConfig default_config() {
    ScenarioConfig cfg;
    // one local node (BBU), three regional one hop out, two national two hops
    cfg.nodes = {
        {0, 1e9, 1e-28, true},  {1, 1e9, 1e-28, false}, {2, 1e9, 1e-28, false},
        {3, 1e9, 1e-28, false}, {4, 1e9, 1e-28, false}, {5, 1e9, 1e-28, false},
    };
    cfg.links = {
        {0, 1, 0.4e9, 0.010}, {0, 2, 0.4e9, 0.010}, {0, 3, 0.4e9, 0.010},
        {1, 4, 0.4e9, 0.010}, {2, 5, 0.4e9, 0.010},
    };
    cfg.classes = {{30, 1e6, 1e5, 0.040}};
    return cfg;
}

ScenarioConfig load_config(const std::string& text) {
    ScenarioConfig cfg = default_config();
    // explicit topology/tasks sections replace the defaults wholesale
    bool topo_touched = false, tasks_touched = false;

    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "radio" && section != "topology" && section != "tasks" &&
                section != "algo" && section != "rng")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("key '" + key + "' outside any section");
        std::string where = section + "." + key;

        if (section == "radio") {
            if (key == "rrhs") cfg.num_rrhs = static_cast<int>(parse_int(val, where));
            else if (key == "antennas") cfg.antennas = static_cast<int>(parse_int(val, where));
            else if (key == "bandwidth_hz") cfg.bandwidth_hz = parse_double(val, where);
            else if (key == "noise_dbm_hz") cfg.noise_dbm_per_hz = parse_double(val, where);
            else if (key == "p_max_w") cfg.p_max_w = parse_double(val, where);
            else if (key == "fronthaul_bps") cfg.fronthaul_bps = parse_double(val, where);
            else if (key == "inter_site_m") cfg.inter_site_m = parse_double(val, where);
            else if (key == "area_radius_m") cfg.area_radius_m = parse_double(val, where);
            else throw ConfigError("unknown key '" + where + "'");
        } else if (section == "topology") {
            if (!topo_touched) {
                cfg.nodes.clear();
                cfg.links.clear();
                topo_touched = true;
            }
            auto tok = split_ws(val);
            if (key == "node") {
                if (tok.size() != 3 && tok.size() != 4)
                    throw ConfigError("topology.node wants: id capacity lambda [bbu]");
                NodeSpec n;
                n.id = static_cast<int>(parse_int(tok[0], where + ".id"));
                n.capacity_cps = parse_double(tok[1], where + ".capacity");
                n.lambda_eff = parse_double(tok[2], where + ".lambda");
                n.is_bbu = false;
                if (tok.size() == 4) {
                    if (tok[3] != "bbu")
                        throw ConfigError("topology.node trailing token must be 'bbu'");
                    n.is_bbu = true;
                }
                cfg.nodes.push_back(n);
            } else if (key == "link") {
                if (tok.size() != 4)
                    throw ConfigError("topology.link wants: a b capacity_bps latency_s");
                LinkSpec l;
                l.a = static_cast<int>(parse_int(tok[0], where + ".a"));
                l.b = static_cast<int>(parse_int(tok[1], where + ".b"));
                l.capacity_bps = parse_double(tok[2], where + ".capacity");
                l.latency_s = parse_double(tok[3], where + ".latency");
                cfg.links.push_back(l);
            } else
                throw ConfigError("unknown key '" + where + "'");
        } else if (section == "tasks") {
            if (key == "class") {
                if (!tasks_touched) {
                    cfg.classes.clear();
                    tasks_touched = true;
                }
                auto tok = split_ws(val);
                if (tok.size() != 4)
                    throw ConfigError("tasks.class wants: count load_cycles data_bits max_latency_s");
                TaskClassSpec c;
                c.count = static_cast<int>(parse_int(tok[0], where + ".count"));
                c.load_cycles = parse_double(tok[1], where + ".load");
                c.data_bits = parse_double(tok[2], where + ".data");
                c.max_latency_s = parse_double(tok[3], where + ".latency");
                cfg.classes.push_back(c);
            } else
                throw ConfigError("unknown key '" + where + "'");
        } else if (section == "algo") {
            if (key == "eps") cfg.eps = parse_double(val, where);
            else if (key == "i_max") cfg.i_max = static_cast<int>(parse_int(val, where));
            else if (key == "i_rho_max") cfg.i_rho_max = static_cast<int>(parse_int(val, where));
            else if (key == "b_max") cfg.b_max = static_cast<int>(parse_int(val, where));
            else if (key == "eta") cfg.eta = parse_double(val, where);
            else if (key == "t_ran_s") cfg.t_ran_s = parse_double(val, where);
            else if (key == "bisect_tol") cfg.bisect_tol = parse_double(val, where);
            else throw ConfigError("unknown key '" + where + "'");
        } else {  // rng
            if (key == "seed") {
                long long s = parse_int(val, where);
                if (s < 0) throw ConfigError("rng.seed must be nonnegative");
                cfg.seed = static_cast<std::uint64_t>(s);
            } else
                throw ConfigError("unknown key '" + where + "'");
        }
    }
    validate(cfg);
    return cfg;
}

void validate(const ScenarioConfig& cfg) {
    if (cfg.num_rrhs < 1) throw ConfigError("radio.rrhs must be >= 1");
    if (cfg.antennas < 1) throw ConfigError("radio.antennas must be >= 1");
    if (cfg.bandwidth_hz <= 0) throw ConfigError("radio.bandwidth_hz must be positive");
    if (cfg.p_max_w <= 0) throw ConfigError("radio.p_max_w must be positive");
    if (cfg.fronthaul_bps <= 0) throw ConfigError("radio.fronthaul_bps must be positive");
    if (cfg.inter_site_m <= 0) throw ConfigError("radio.inter_site_m must be positive");
    if (cfg.area_radius_m <= 0) throw ConfigError("radio.area_radius_m must be positive");
    if (radio::noise_power_w(cfg.noise_dbm_per_hz, cfg.bandwidth_hz) <= 0)
        throw ConfigError("noise power must be positive");

    const int n = static_cast<int>(cfg.nodes.size());
    if (n < 1) throw ConfigError("topology needs at least one node");
    std::vector<char> seen(n, 0);
    int bbus = 0;
    for (const auto& node : cfg.nodes) {
        if (node.id < 0 || node.id >= n)
            throw ConfigError("topology.node ids must cover 0.." + std::to_string(n - 1));
        if (seen[node.id]) throw ConfigError("duplicate topology.node id " + std::to_string(node.id));
        seen[node.id] = 1;
        if (node.capacity_cps <= 0)
            throw ConfigError("topology.node " + std::to_string(node.id) +
                              " capacity must be positive");
        if (node.lambda_eff < 0)
            throw ConfigError("topology.node " + std::to_string(node.id) +
                              " lambda must be nonnegative");
        bbus += node.is_bbu ? 1 : 0;
    }
    if (bbus != 1) throw ConfigError("exactly one topology.node must carry the bbu flag");

    std::set<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adj(n);
    for (const auto& l : cfg.links) {
        if (l.a < 0 || l.a >= n || l.b < 0 || l.b >= n)
            throw ConfigError("topology.link endpoint out of range");
        if (l.a == l.b) throw ConfigError("topology.link may not be a self-loop");
        auto key = std::minmax(l.a, l.b);
        if (!edges.insert({key.first, key.second}).second)
            throw ConfigError("duplicate topology.link " + std::to_string(l.a) + "-" +
                              std::to_string(l.b));
        if (l.capacity_bps <= 0) throw ConfigError("topology.link capacity must be positive");
        if (l.latency_s < 0) throw ConfigError("topology.link latency must be nonnegative");
        adj[l.a].push_back(l.b);
        adj[l.b].push_back(l.a);
    }
    // connectivity from the BBU
    std::vector<char> reach(n, 0);
    std::vector<int> stack;
    for (const auto& node : cfg.nodes)
        if (node.is_bbu) stack.push_back(node.id);
    reach[stack[0]] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
            if (!reach[w]) {
                reach[w] = 1;
                stack.push_back(w);
            }
    }
    if (std::count(reach.begin(), reach.end(), 1) != n)
        throw ConfigError("topology must be connected");

    if (cfg.classes.empty()) throw ConfigError("tasks need at least one class");
    for (const auto& c : cfg.classes) {
        if (c.count < 1) throw ConfigError("tasks.class count must be >= 1");
        if (c.load_cycles <= 0) throw ConfigError("tasks.class load_cycles must be positive");
        if (c.data_bits <= 0) throw ConfigError("tasks.class data_bits must be positive");
        if (c.max_latency_s <= 0) throw ConfigError("tasks.class max_latency_s must be positive");
    }

    if (cfg.eps <= 0) throw ConfigError("algo.eps must be positive");
    if (cfg.i_max < 1) throw ConfigError("algo.i_max must be >= 1");
    if (cfg.i_rho_max < 1) throw ConfigError("algo.i_rho_max must be >= 1");
    if (cfg.b_max < 1) throw ConfigError("algo.b_max must be >= 1");
    if (cfg.eta < 0) throw ConfigError("algo.eta must be nonnegative");
    if (cfg.t_ran_s <= 0) throw ConfigError("algo.t_ran_s must be positive");
    if (cfg.bisect_tol <= 0) throw ConfigError("algo.bisect_tol must be positive");
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

ScenarioInstance generate_instance(const ScenarioConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    ScenarioInstance inst;
    inst.cfg = cfg;
    inst.seed = seed;

    // RRHs on a centered square grid with inter-site spacing, row-major order
    int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.num_rrhs))));
    for (int u = 0; u < cfg.num_rrhs; ++u) {
        int i = u % cols, j = u / cols;
        double rows = std::ceil(static_cast<double>(cfg.num_rrhs) / cols);
        inst.rrh_pos_m.push_back({(i - (cols - 1) / 2.0) * cfg.inter_site_m,
                                  (j - (rows - 1) / 2.0) * cfg.inter_site_m});
    }

    for (const auto& c : cfg.classes)
        for (int i = 0; i < c.count; ++i)
            inst.tasks.push_back({c.load_cycles, c.data_bits, c.max_latency_s});
    const int K = inst.num_tasks();

    std::mt19937_64 rng(seed);
    for (int k = 0; k < K; ++k) {
        double r = cfg.area_radius_m * std::sqrt(uniform01(rng));
        double th = 2.0 * M_PI * uniform01(rng);
        inst.user_pos_m.push_back({r * std::cos(th), r * std::sin(th)});
    }

    inst.serving.resize(K);
    for (int k = 0; k < K; ++k) {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int u = 0; u < cfg.num_rrhs; ++u) {
            double dx = inst.user_pos_m[k][0] - inst.rrh_pos_m[u][0];
            double dy = inst.user_pos_m[k][1] - inst.rrh_pos_m[u][1];
            double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = u;
            }
        }
        inst.serving[k] = best;
    }

    inst.env = radio::generate_channels(
        rng, inst.user_pos_m, inst.rrh_pos_m, inst.serving, cfg.antennas, cfg.bandwidth_hz,
        radio::noise_power_w(cfg.noise_dbm_per_hz, cfg.bandwidth_hz), cfg.p_max_w,
        cfg.fronthaul_bps);

    inst.topo.capacity_cps.resize(cfg.nodes.size());
    inst.topo.lambda_eff.resize(cfg.nodes.size());
    for (const auto& nspec : cfg.nodes) {
        inst.topo.capacity_cps[nspec.id] = nspec.capacity_cps;
        inst.topo.lambda_eff[nspec.id] = nspec.lambda_eff;
        if (nspec.is_bbu) inst.topo.bbu = nspec.id;
    }
    for (const auto& l : cfg.links)
        inst.topo.links.push_back({l.a, l.b, l.capacity_bps, l.latency_s});

    inst.paths = transport::enumerate_paths(inst.topo, cfg.b_max);
    return inst;
}

}  // namespace offsim
