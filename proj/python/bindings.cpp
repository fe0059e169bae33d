#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "housing_sd/acceptance.hpp"
#include "housing_sd/calibration.hpp"
#include "housing_sd/model.hpp"
#include "housing_sd/params.hpp"
#include "housing_sd/scenarios.hpp"
#include "housing_sd/validation.hpp"

namespace py = pybind11;
using namespace hsd;

namespace {

py::dict metrics_dict(const MetricSet& m) {
    py::dict d;
    for (const auto& [k, v] : m.items()) d[py::str(k)] = v;
    return d;
}

SimClock clock_for(double dt) {
    SimClock c;
    c.dt = dt;
    c.validate();
    return c;
}

const Scenario& pick(const std::vector<Scenario>& all, const std::string& name) { return find_scenario(all, name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Housing market system dynamics model: scenario runs, sweeps, validation and calibration";
    m.attr("__version__") = HOUSING_SD_VERSION;

    py::class_<ModelParams>(m, "Params")
        .def(py::init<>())
        .def("__getitem__", [](const ModelParams& p, const std::string& k) { return get_param(p, k); })
        .def("__setitem__", [](ModelParams& p, const std::string& k, double v) { set_param(p, k, v); })
        .def("provenance", [](const ModelParams& p, const std::string& k) { return provenance_of(p, k); })
        .def("validate", &ModelParams::validate)
        .def("to_toml", &params_to_string)
        .def("copy", [](const ModelParams& p) { return ModelParams(p); })
        .def_static("names", [] {
            std::vector<std::string> out;
            for (const auto& info : param_registry()) out.emplace_back(info.name);
            return out;
        });

    m.def("load_params", &load_params, py::arg("path"));
    m.def("equilibrate", &housing::equilibrate, py::arg("params"),
          "Solve the stationary constants and initial stocks for the pre-shock model.");

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readonly("label", &Scenario::label)
        .def_readonly("covid", &Scenario::covid_on)
        .def_readonly("moratorium", &Scenario::moratorium_on)
        .def_readonly("era", &Scenario::era_on)
        .def_readwrite("era_rate_multiplier", &Scenario::era_rate_multiplier)
        .def("__repr__", [](const Scenario& s) { return "<Scenario " + s.name + ">"; });

    m.def("default_scenarios", &default_scenarios, py::arg("run4a_multiplier") = 3.0);
    m.def("load_scenarios", &load_scenarios, py::arg("path"));

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("scenario", &RunResult::scenario)
        .def_readonly("times", &RunResult::times)
        .def_readonly("diagnostics", &RunResult::diagnostics)
        .def_property_readonly("metrics", [](const RunResult& r) { return metrics_dict(r.metrics); })
        .def("series",
             [](const RunResult& r, const std::string& name) {
                 const auto t = emit_timeseries(r, {name});
                 std::vector<double> out;
                 for (const auto& row : t.rows) out.push_back(row[1]);
                 return out;
             },
             py::arg("name"))
        .def("to_csv", [](const RunResult& r, const std::vector<std::string>& sel) { return emit_timeseries(r, sel).to_csv(); },
             py::arg("selection"))
        .def("check_invariants", &check_invariants);

    m.def(
        "run_scenario",
        [](const std::string& name, const ModelParams& p, double dt, const std::vector<Scenario>& scenarios) {
            const auto all = scenarios.empty() ? default_scenarios() : scenarios;
            return run_scenario(pick(all, name), p, clock_for(dt));
        },
        py::arg("name"), py::arg("params"), py::arg("dt") = 0.25, py::arg("scenarios") = std::vector<Scenario>{});

    m.def(
        "compare",
        [](const RunResult& a, const RunResult& b) {
            py::dict out;
            for (const auto& d : compare(a, b).deltas) {
                py::dict row;
                row["baseline"] = d.baseline;
                row["variant"] = d.variant;
                row["absolute"] = d.absolute;
                row["percent"] = d.percent;
                out[py::str(d.metric)] = row;
            }
            return out;
        },
        py::arg("baseline"), py::arg("variant"));

    py::class_<TheilResult>(m, "TheilResult")
        .def_readonly("U", &TheilResult::U)
        .def_readonly("U_M", &TheilResult::U_M)
        .def_readonly("U_S", &TheilResult::U_S)
        .def_readonly("U_C", &TheilResult::U_C)
        .def_readonly("mse", &TheilResult::mse);
    m.def(
        "theils_u",
        [](const std::vector<double>& sim, const std::vector<double>& obs) { return theils_u(sim, obs); },
        py::arg("simulated"), py::arg("observed"));

    m.def(
        "sensitivity_sweep",
        [](const ModelParams& p, const std::string& scenario, double delta, unsigned workers) {
            const auto all = default_scenarios();
            const Scenario& sc = pick(all, scenario);
            SensitivityReport rep;
            {
                py::gil_scoped_release unlocked;
                rep = sensitivity_sweep(p, sc, delta, SimClock{}, workers);
            }
            py::list out;
            for (const auto& e : rep.entries) {
                py::dict row;
                row["parameter"] = e.parameter;
                row["low_value"] = e.low_value;
                row["high_value"] = e.high_value;
                row["low"] = metrics_dict(e.low);
                row["high"] = metrics_dict(e.high);
                row["max_abs_elasticity"] = e.max_abs_elasticity;
                row["flagged"] = !e.error.empty() || !e.violations.empty();
                out.append(row);
            }
            return out;
        },
        py::arg("params"), py::arg("scenario") = "run2", py::arg("delta") = 0.15, py::arg("workers") = 0);

    m.def(
        "extreme_conditions",
        [](const ModelParams& p) {
            std::vector<std::tuple<std::string, bool, std::string>> out;
            for (const auto& c : extreme_conditions(p)) out.emplace_back(c.name, c.passed, c.detail);
            return out;
        },
        py::arg("params"));

    m.def(
        "calibrate",
        [](const std::string& spec_json, const ModelParams& start) {
            const auto res = calibrate(parse_calibration_spec(spec_json), start, default_scenarios());
            py::dict report;
            report["initial_loss"] = res.initial_loss;
            report["final_loss"] = res.final_loss;
            report["evaluations"] = res.evaluations;
            report["converged"] = res.converged;
            report["warnings"] = res.warnings;
            return py::make_tuple(res.params, report);
        },
        py::arg("spec_json"), py::arg("params"),
        "Fit the spec's free parameters; returns (fitted params, report). The spec is passed as JSON text.");

    m.def(
        "run_acceptance",
        [](const ModelParams& p, const std::string& self_consistency_spec) {
            AcceptanceOptions opts;
            opts.self_consistency_spec = self_consistency_spec;
            std::vector<std::tuple<int, std::string, bool, std::vector<std::string>>> out;
            for (const auto& r : run_acceptance(p, default_scenarios(), opts))
                out.emplace_back(r.id, r.title, r.passed, r.details);
            return out;
        },
        py::arg("params"), py::arg("self_consistency_spec"));
}
