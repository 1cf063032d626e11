// SPDX-License-Identifier: Apache-2.0
//
// rceq - reservoir computing channel equalization for OFDM receivers
// Copyright (C) 2026 The rceq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "rceq/experiment.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace rceq;

namespace {

ExperimentConfig config_from_string(const std::string& config_json)
{
    return config_from_json(json::parse(config_json.empty() ? "{}" : config_json));
}

py::tuple ser_row(const SerResult& r)
{
    return py::make_tuple(r.method, r.ebn0_db, r.seed, r.n_symbols, r.n_errors, r.ser);
}

} // namespace

PYBIND11_MODULE(_rceq, m)
{
    m.doc() = "Reservoir-computing channel equalization for OFDM (native core)";
    m.attr("__version__") = kToolVersion;

    static py::exception<Error> error(m, "RceqError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.message()).c_str());
        }
    });

    m.def(
        "load_config",
        [](const std::filesystem::path& path, const std::vector<std::string>& overrides) {
            return config_to_json(load_config(path, overrides)).dump();
        },
        py::arg("path") = std::filesystem::path{}, py::arg("overrides") = std::vector<std::string>{},
        "Resolved configuration as a JSON string.");

    m.def(
        "derive_weights",
        [](const std::string& config_json) {
            RunManifest man;
            man.command = "derive-weights";
            DeriveResult res;
            {
                py::gil_scoped_release release;
                res = derive_weights(config_from_string(config_json), man);
            }
            return py::make_tuple(weights_to_json(res.weights).dump(), basis_to_json(res.basis).dump(),
                                  man.to_json().dump());
        },
        py::arg("config_json") = "", "Returns (weights_json, basis_json, manifest_json).");

    m.def(
        "run_ser",
        [](const std::string& config_json, const std::string& weights_json) {
            const ExperimentConfig cfg = config_from_string(config_json);
            std::optional<WeightFile> wf;
            if (!weights_json.empty())
                wf = weights_from_json(json::parse(weights_json));
            RunManifest man;
            man.command = "run-ser";
            std::vector<SerResult> rows;
            {
                py::gil_scoped_release release;
                rows = run_ser(cfg, wf ? &wf->model : nullptr, man);
            }
            py::list out;
            for (const auto& r : rows)
                out.append(ser_row(r));
            return py::make_tuple(out, ser_csv(rows), man.to_json().dump());
        },
        py::arg("config_json") = "", py::arg("weights_json") = "",
        "Returns (rows, csv_text, manifest_json); rows are (method, ebn0_db, seed, n_symbols, n_errors, ser).");

    m.def(
        "verify_rank",
        [](const std::string& config_json) {
            RunManifest man;
            RankReport rep;
            {
                py::gil_scoped_release release;
                rep = verify_rank(config_from_string(config_json), man);
            }
            return py::make_tuple(rep.spectrum, rank_to_json(rep).dump());
        },
        py::arg("config_json") = "", "Returns (spectrum, report_json).");

    m.def("render_ser_svg",
          [](const std::string& csv_text, const std::string& title) {
              return render_ser_svg(parse_ser_csv(csv_text), title);
          },
          py::arg("csv_text"), py::arg("title") = "SER");

    m.def(
        "fit_rational",
        [](const ComplexVector& samples, std::size_t K, std::size_t K_prime) {
            const auto ra = fit_rational(samples, K, K_prime);
            return py::make_tuple(ra.numerator(), ra.denominator(), ra.fit_error());
        },
        py::arg("samples"), py::arg("K"), py::arg("K_prime"), "Returns (c, d, fit_error); d excludes d_0 = 1.");

    m.def(
        "partial_fractions",
        [](const ComplexVector& c, const ComplexVector& d) {
            const auto prs = partial_fractions(RationalApprox(c, d));
            return py::make_tuple(prs.poles, prs.residues);
        },
        py::arg("c"), py::arg("d"), "Returns (poles, residues).");

    m.def(
        "channel_inverse_freq",
        [](const ComplexVector& taps, std::size_t n_freq) { return channel_inverse_freq({taps, {}}, n_freq); },
        py::arg("taps"), py::arg("n_freq"));

    m.def(
        "sample_exp_pdp",
        [](std::size_t taps, std::uint64_t seed) {
            RngStream rng(seed);
            return sample_exp_pdp(taps, rng).taps;
        },
        py::arg("taps") = 10, py::arg("seed") = 1);

    m.def(
        "is_minimum_phase", [](const ComplexVector& taps) { return is_minimum_phase({taps, {}}); },
        py::arg("taps"));

    m.def(
        "predict",
        [](const std::string& weights_json, const ComplexVector& input) {
            const auto wf = weights_from_json(json::parse(weights_json));
            EsnModel model = wf.model;
            if (!model.w_out) {
                model.w_out = ComplexMatrix(1, model.n_nodes(), cplx(1.0));
            }
            return predict(model, input);
        },
        py::arg("weights_json"), py::arg("input"),
        "Runs an optimum model; without a stored readout every neuron is summed.");
}
