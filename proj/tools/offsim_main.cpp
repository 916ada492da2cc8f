#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "offsim/scenario.hpp"
#include "offsim/sweep.hpp"

namespace {

offsim::ScenarioConfig read_config(const std::string& path) {
    if (path.empty()) return offsim::default_config();
    std::ifstream in(path);
    if (!in) throw offsim::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return offsim::load_config(ss.str());
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto c = s.find(',', pos);
        if (c == std::string::npos) c = s.size();
        if (c > pos) out.push_back(s.substr(pos, c - pos));
        pos = c + 1;
    }
    return out;
}

std::vector<double> parse_values(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& tok : split_list(s)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw offsim::ConfigError("bad number '" + tok + "' in " + what);
        }
        if (used != tok.size())
            throw offsim::ConfigError("bad number '" + tok + "' in " + what);
        out.push_back(v);
    }
    if (out.empty()) throw offsim::ConfigError(what + " needs at least one value");
    return out;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string topo_dot(const offsim::ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "graph transport {\n";
    os << "  node [shape=ellipse];\n";
    for (const auto& n : cfg.nodes) {
        os << "  n" << n.id << " [label=\"" << n.id << "\\n" << n.capacity_cps
           << " c/s\\nlambda " << n.lambda_eff << "\"";
        if (n.is_bbu) os << " shape=box style=bold";
        os << "];\n";
    }
    for (const auto& l : cfg.links)
        os << "  n" << l.a << " -- n" << l.b << " [label=\"" << l.capacity_bps << " bps\\n"
           << l.latency_s << " s\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"task offloading experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::string sweep_arg, algos_arg = "jto";
    std::string caps_arg;
    int trials = 10;
    std::int64_t seed = -1;  // -1: take the config's seed
    int workers = 1;
    bool omit_timing = false;
    std::int64_t lto_budget = 10'000'000;

    auto* run = app.add_subcommand("run", "parameter sweep over one knob, CSV out");
    run->add_option("--config", config_path, "scenario config file (defaults built in)");
    run->add_option("--sweep", sweep_arg, "param=v1,v2,... with param in T,K,C,D,L,TRAN")
        ->required();
    run->add_option("--algos", algos_arg, "comma list from jto,dto,lto (default jto)");
    run->add_option("--trials", trials, "Monte Carlo trials per value (default 10)");
    run->add_option("--seed", seed, "base seed; trial i uses seed+i");
    run->add_option("--out", out_path, "output CSV path (default stdout)");
    run->add_option("--workers", workers, "concurrent trials (default 1)");
    run->add_flag("--omit-timing", omit_timing, "write wall_s as 0 for byte-stable output");
    run->add_option("--lto-budget", lto_budget, "max LTO enumeration size before refusal");

    auto* classes = app.add_subcommand("classes", "per-class acceptance vs node capacity");
    classes->add_option("--config", config_path, "scenario config file with task classes");
    classes->add_option("--capacities", caps_arg, "comma list of node capacities, cycles/s")
        ->required();
    classes->add_option("--trials", trials, "Monte Carlo trials per capacity (default 10)");
    classes->add_option("--seed", seed, "base seed; trial i uses seed+i");
    classes->add_option("--out", out_path, "output CSV path (default stdout)");
    classes->add_option("--workers", workers, "concurrent trials (default 1)");

    auto* topo = app.add_subcommand("topo", "emit the transport graph as graphviz DOT");
    topo->add_option("--config", config_path, "scenario config file");
    topo->add_option("--out", out_path, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        offsim::ScenarioConfig cfg = read_config(config_path);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);

        if (run->parsed()) {
            auto eq = sweep_arg.find('=');
            if (eq == std::string::npos)
                throw offsim::ConfigError("--sweep wants param=v1,v2,...");
            offsim::sweep::Spec spec;
            spec.base = cfg;
            spec.param = sweep_arg.substr(0, eq);
            spec.values = parse_values(sweep_arg.substr(eq + 1), "--sweep");
            spec.algos = split_list(algos_arg);
            spec.trials = trials;
            spec.seed = cfg.seed;
            spec.workers = workers;
            spec.omit_timing = omit_timing;
            spec.lto_budget = lto_budget;
            write_out(out_path, offsim::sweep::to_csv(offsim::sweep::run_sweep(spec)));
        } else if (classes->parsed()) {
            offsim::sweep::ClassSpec spec;
            spec.base = cfg;
            spec.c_values = parse_values(caps_arg, "--capacities");
            spec.trials = trials;
            spec.seed = cfg.seed;
            spec.workers = workers;
            write_out(out_path,
                      offsim::sweep::class_rows_to_csv(offsim::sweep::run_class_experiment(spec)));
        } else {
            write_out(out_path, topo_dot(cfg));
        }
    } catch (const offsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
