// Copyright 2026 The squeezemag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Thin Python surface. Structured values cross as JSON text; the package
// __init__ decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "squeezemag/collective_spin.hpp"
#include "squeezemag/error.hpp"
#include "squeezemag/io.hpp"
#include "squeezemag/magnetometry.hpp"
#include "squeezemag/oracle.hpp"
#include "squeezemag/reproduce.hpp"

namespace py = pybind11;
using namespace squeezemag;
using nlohmann::json;

namespace {

std::string figure_json(const FigureResult &r) {
    json tables = json::object();
    for (const auto &t : r.tables) tables[t.name] = {{"columns", t.columns}, {"rows", t.rows}};
    return json{{"target", r.target}, {"summary", r.summary}, {"tables", tables}}.dump();
}

FieldProtocolParams params(double t_int, double visibility, double swap_sensitivity) {
    FieldProtocolParams p;
    p.swap_sensitivity = swap_sensitivity;
    p.t_hold = t_int - 2.0 * p.t_pi;
    p.visibility = visibility;
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "squeezemag native core";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    m.def("default_config", [] { return config_to_json(reference_run_config()).dump(); });
    m.def("normalize_config", [](const std::string &text) { return config_to_json(parse_config(text)).dump(); });

    m.def(
        "simulate_csv",
        [](const std::string &config_json) {
            const auto config = parse_config(config_json);
            ShotBatch batch;
            {
                py::gil_scoped_release release;
                batch = simulate(config);
            }
            std::ostringstream out;
            write_shots_csv(out, batch.records[0]);
            return out.str();
        },
        py::arg("config_json"));

    m.def(
        "analyze_csv",
        [](const std::string &csv, const std::string &spec_json) {
            std::istringstream in(csv);
            const auto shots = read_shots_csv(in);
            return analyze_shots(shots, json::parse(spec_json.empty() ? "{}" : spec_json)).dump();
        },
        py::arg("csv"), py::arg("spec_json") = "{}");

    m.def("targets", &reproduce_targets);
    m.def(
        "reproduce",
        [](const std::string &target, int shots, std::uint64_t seed, int workers, int resamples) {
            ReproduceOptions o;
            o.shots = shots;
            o.seed = seed;
            o.workers = workers;
            o.bootstrap_resamples = resamples;
            FigureResult r;
            {
                py::gil_scoped_release release;
                r = reproduce(target, o);
            }
            return figure_json(r);
        },
        py::arg("target"), py::arg("shots") = 0, py::arg("seed") = 1, py::arg("workers") = 1,
        py::arg("resamples") = 200);

    m.def(
        "sql",
        [](double n_tot, double t_int, double visibility, double s) { return sql(n_tot, params(t_int, visibility, s)); },
        py::arg("n_tot"), py::arg("t_int"), py::arg("visibility") = 1.0,
        py::arg("swap_sensitivity") = units::default_swap_sensitivity());
    m.def(
        "sensitivity",
        [](double std_dz, double t_int, double visibility, double s) {
            return sensitivity(std_dz, params(t_int, visibility, s));
        },
        py::arg("std_dz"), py::arg("t_int"), py::arg("visibility") = 1.0,
        py::arg("swap_sensitivity") = units::default_swap_sensitivity());

    m.def(
        "twisting_moments",
        [](int n, double chi, double t) {
            const auto s = evolve_oat(make_css(n, 0.5 * units::kPi, 0.0), chi, 0.0, t);
            const auto mo = moments(s);
            const auto cf = twisting_closed_form(n, chi, t);
            return py::dict(py::arg("mean_length") = mo.mean_length(), py::arg("min_variance") = mo.min_variance,
                            py::arg("max_variance") = mo.max_variance,
                            py::arg("closed_form_min_variance") = cf.min_variance,
                            py::arg("closed_form_mean_length") = cf.mean_length);
        },
        py::arg("n_atoms"), py::arg("chi"), py::arg("t"));
}
