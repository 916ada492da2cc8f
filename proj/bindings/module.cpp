#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "offsim/lto.hpp"
#include "offsim/pipelines.hpp"
#include "offsim/scenario.hpp"
#include "offsim/sweep.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

using offsim::ScenarioConfig;
using offsim::ScenarioInstance;
using offsim::TaskClassSpec;

PYBIND11_MODULE(_core, m) {
    m.doc() = "joint task offloading simulator core";

    py::register_exception<offsim::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<offsim::lto::BudgetError>(m, "BudgetError", PyExc_RuntimeError);

    py::class_<TaskClassSpec>(m, "TaskClassSpec")
        .def(py::init<>())
        .def_readwrite("count", &TaskClassSpec::count)
        .def_readwrite("load_cycles", &TaskClassSpec::load_cycles)
        .def_readwrite("data_bits", &TaskClassSpec::data_bits)
        .def_readwrite("max_latency_s", &TaskClassSpec::max_latency_s);

    py::class_<offsim::NodeSpec>(m, "NodeSpec")
        .def(py::init<>())
        .def_readwrite("id", &offsim::NodeSpec::id)
        .def_readwrite("capacity_cps", &offsim::NodeSpec::capacity_cps)
        .def_readwrite("lambda_eff", &offsim::NodeSpec::lambda_eff)
        .def_readwrite("is_bbu", &offsim::NodeSpec::is_bbu);

    py::class_<offsim::LinkSpec>(m, "LinkSpec")
        .def(py::init<>())
        .def_readwrite("a", &offsim::LinkSpec::a)
        .def_readwrite("b", &offsim::LinkSpec::b)
        .def_readwrite("capacity_bps", &offsim::LinkSpec::capacity_bps)
        .def_readwrite("latency_s", &offsim::LinkSpec::latency_s);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("num_rrhs", &ScenarioConfig::num_rrhs)
        .def_readwrite("antennas", &ScenarioConfig::antennas)
        .def_readwrite("bandwidth_hz", &ScenarioConfig::bandwidth_hz)
        .def_readwrite("noise_dbm_per_hz", &ScenarioConfig::noise_dbm_per_hz)
        .def_readwrite("p_max_w", &ScenarioConfig::p_max_w)
        .def_readwrite("fronthaul_bps", &ScenarioConfig::fronthaul_bps)
        .def_readwrite("inter_site_m", &ScenarioConfig::inter_site_m)
        .def_readwrite("area_radius_m", &ScenarioConfig::area_radius_m)
        .def_readwrite("nodes", &ScenarioConfig::nodes)
        .def_readwrite("links", &ScenarioConfig::links)
        .def_readwrite("classes", &ScenarioConfig::classes)
        .def_readwrite("eps", &ScenarioConfig::eps)
        .def_readwrite("i_max", &ScenarioConfig::i_max)
        .def_readwrite("i_rho_max", &ScenarioConfig::i_rho_max)
        .def_readwrite("b_max", &ScenarioConfig::b_max)
        .def_readwrite("eta", &ScenarioConfig::eta)
        .def_readwrite("t_ran_s", &ScenarioConfig::t_ran_s)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def("num_tasks", &ScenarioConfig::num_tasks);

    py::class_<ScenarioInstance>(m, "ScenarioInstance")
        .def_readonly("seed", &ScenarioInstance::seed)
        .def_property_readonly("serving",
                               [](const ScenarioInstance& s) { return s.serving; })
        .def("num_tasks", &ScenarioInstance::num_tasks);

    py::class_<offsim::pipelines::Solution>(m, "Solution")
        .def_property_readonly("accepted",
                               [](const offsim::pipelines::Solution& s) {
                                   std::vector<bool> out(s.accepted.begin(), s.accepted.end());
                                   return out;
                               })
        .def_readonly("rho", &offsim::pipelines::Solution::rho)
        .def_readonly("ups", &offsim::pipelines::Solution::ups)
        .def_readonly("alpha", &offsim::pipelines::Solution::alpha)
        .def_readonly("node", &offsim::pipelines::Solution::node)
        .def_readonly("path", &offsim::pipelines::Solution::path)
        .def_readonly("rejection_order", &offsim::pipelines::Solution::rejection_order)
        .def_readonly("alpha_traces", &offsim::pipelines::Solution::alpha_traces)
        .def_readonly("energy_trace", &offsim::pipelines::Solution::energy_trace)
        .def_readonly("iters_feasibility", &offsim::pipelines::Solution::iters_feasibility)
        .def_readonly("iters_refine", &offsim::pipelines::Solution::iters_refine)
        .def_readonly("guard_reverts", &offsim::pipelines::Solution::guard_reverts)
        .def_readonly("min_ccp_slack", &offsim::pipelines::Solution::min_ccp_slack)
        .def_readonly("wall_s", &offsim::pipelines::Solution::wall_s)
        .def("acceptance_ratio", &offsim::pipelines::Solution::acceptance_ratio);

    m.def("default_config", &offsim::default_config);
    m.def("load_config", &offsim::load_config, "text"_a,
          "Parse the sectioned key/value config format");
    m.def("validate", &offsim::validate, "cfg"_a);
    m.def("generate_instance", &offsim::generate_instance, "cfg"_a, "seed"_a);

    m.def("run_jto", &offsim::pipelines::run_jto, "inst"_a,
          py::call_guard<py::gil_scoped_release>(),
          "Joint pipeline: admission control then energy refinement");
    m.def(
        "run_dto",
        [](const ScenarioInstance& inst, double t_ran_s) {
            return offsim::pipelines::run_dto(inst, t_ran_s);
        },
        "inst"_a, "t_ran_s"_a, py::call_guard<py::gil_scoped_release>(),
        "Disjoint baseline with a fixed radio budget");
    m.def(
        "validate_solution",
        [](const ScenarioInstance& inst, const offsim::pipelines::Solution& sol) {
            std::string why;
            bool ok = offsim::pipelines::validate_solution(inst, sol, &why);
            return py::make_tuple(ok, why);
        },
        "inst"_a, "sol"_a, "Re-check every constraint of the accepted set; returns (ok, why)");

    m.def(
        "run_sweep_csv",
        [](const ScenarioConfig& base, const std::string& param, std::vector<double> values,
           std::vector<std::string> algos, int trials, std::uint64_t seed, int workers,
           bool omit_timing) {
            offsim::sweep::Spec spec;
            spec.base = base;
            spec.param = param;
            spec.values = std::move(values);
            spec.algos = std::move(algos);
            spec.trials = trials;
            spec.seed = seed;
            spec.workers = workers;
            spec.omit_timing = omit_timing;
            return offsim::sweep::to_csv(offsim::sweep::run_sweep(spec));
        },
        "base"_a, "param"_a, "values"_a, "algos"_a, "trials"_a = 1, "seed"_a = 1,
        "workers"_a = 1, "omit_timing"_a = false, py::call_guard<py::gil_scoped_release>(),
        "Run a parameter sweep and return the result table as CSV text");

    m.def(
        "run_class_experiment_csv",
        [](const ScenarioConfig& base, std::vector<double> c_values, int trials,
           std::uint64_t seed, int workers) {
            offsim::sweep::ClassSpec spec;
            spec.base = base;
            spec.c_values = std::move(c_values);
            spec.trials = trials;
            spec.seed = seed;
            spec.workers = workers;
            return offsim::sweep::class_rows_to_csv(offsim::sweep::run_class_experiment(spec));
        },
        "base"_a, "c_values"_a, "trials"_a = 1, "seed"_a = 1, "workers"_a = 1,
        py::call_guard<py::gil_scoped_release>(),
        "Per-class acceptance versus node capacity, as CSV text");
}
