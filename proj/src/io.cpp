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

#include "rceq/io.hpp"

#include <fstream>
#include <sstream>

namespace rceq {

namespace {

const json& require(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorKind::SchemaError, std::string("missing key '") + key + "'");
    return j.at(key);
}

template <typename T>
T get_as(const json& j, const char* key)
{
    try {
        return require(j, key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaError, std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace

json complex_to_json(cplx z)
{
    return json::array({z.real(), z.imag()});
}

cplx complex_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(ErrorKind::SchemaError, "complex value must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

json vector_to_json(std::span<const cplx> v)
{
    json out = json::array();
    for (const auto& z : v)
        out.push_back(complex_to_json(z));
    return out;
}

ComplexVector vector_from_json(const json& j)
{
    if (!j.is_array())
        throw Error(ErrorKind::SchemaError, "expected an array of complex values");
    ComplexVector out;
    out.reserve(j.size());
    for (const auto& e : j)
        out.push_back(complex_from_json(e));
    return out;
}

json matrix_to_json(const ComplexMatrix& m)
{
    json out = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        out.push_back(vector_to_json(m.row(r)));
    return out;
}

ComplexMatrix matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty())
        throw Error(ErrorKind::SchemaError, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const ComplexVector row = vector_from_json(j[r]);
        if (row.size() != cols)
            throw Error(ErrorKind::SchemaError, "ragged matrix rows");
        std::copy(row.begin(), row.end(), m.row(r).begin());
    }
    return m;
}

json basis_to_json(const BasisSet& basis)
{
    json j;
    j["format"] = "rceq-basis";
    j["version"] = 1;
    j["N"] = basis.N;
    j["M"] = basis.M;
    j["centered"] = basis.centered;
    j["eigenvalues"] = basis.eigenvalues;
    j["F"] = matrix_to_json(basis.F);
    j["mean"] = vector_to_json(basis.mean);
    return j;
}

BasisSet basis_from_json(const json& j)
{
    BasisSet b;
    b.N = get_as<std::size_t>(j, "N");
    b.M = get_as<std::size_t>(j, "M");
    b.centered = get_as<bool>(j, "centered");
    b.eigenvalues = get_as<RealVector>(j, "eigenvalues");
    b.F = matrix_from_json(require(j, "F"));
    b.mean = vector_from_json(require(j, "mean"));
    if (b.F.rows() != b.N || b.F.cols() != b.M || b.mean.size() != b.N)
        throw Error(ErrorKind::SchemaError, "basis dimensions disagree with N and M");
    return b;
}

json model_to_json(const EsnModel& model)
{
    json j;
    j["activation"] = to_string(model.activation);
    j["init_kind"] = to_string(model.init_kind);
    j["n_nodes"] = model.n_nodes();
    j["w_in"] = matrix_to_json(model.w_in);
    j["w_res"] = matrix_to_json(model.w_res);
    j["w_out"] = model.w_out ? json(vector_to_json(model.w_out->row(0))) : json(nullptr);
    return j;
}

EsnModel model_from_json(const json& j)
{
    EsnModel m;
    m.activation = activation_from_string(get_as<std::string>(j, "activation"));
    m.init_kind = init_kind_from_string(get_as<std::string>(j, "init_kind"));
    m.w_in = matrix_from_json(require(j, "w_in"));
    m.w_res = matrix_from_json(require(j, "w_res"));
    if (m.w_res.rows() != m.w_res.cols() || m.w_in.rows() != m.w_res.rows())
        throw Error(ErrorKind::SchemaError, "inconsistent model dimensions");
    if (j.contains("w_out") && !j["w_out"].is_null()) {
        const ComplexVector w = vector_from_json(j["w_out"]);
        if (w.size() != m.n_nodes())
            throw Error(ErrorKind::SchemaError, "readout length differs from node count");
        m.w_out = ComplexMatrix(1, w.size(), w);
    }
    return m;
}

json weights_to_json(const WeightFile& wf)
{
    json j;
    j["format"] = "rceq-weights";
    j["version"] = 1;
    j["rho_max"] = wf.rho_max;
    j["activation"] = to_string(wf.model.activation);
    j["init_kind"] = to_string(wf.model.init_kind);
    j["n_nodes"] = wf.model.n_nodes();
    json entries = json::array();
    for (std::size_t m = 0; m < wf.entries.size(); ++m) {
        const auto& e = wf.entries[m];
        json je;
        je["m"] = m;
        je["K"] = e.fit.order();
        je["K_prime"] = e.fit.numerator_order();
        je["c"] = vector_to_json(e.fit.numerator());
        je["d"] = vector_to_json(e.fit.denominator());
        je["fit_error"] = e.fit.fit_error();
        je["ridge_fallback"] = e.fit.used_ridge_fallback;
        je["poles"] = vector_to_json(e.poles.poles);
        je["residues"] = vector_to_json(e.poles.residues);
        je["stabilized"] = json::array();
        for (bool s : e.poles.stabilized)
            je["stabilized"].push_back(s);
        je["perturbed"] = e.poles.perturbed;
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    j["w_out"] = wf.model.w_out ? json(vector_to_json(wf.model.w_out->row(0))) : json(nullptr);
    if (wf.model.init_kind == InitKind::Random) {
        j["w_in"] = matrix_to_json(wf.model.w_in);
        j["w_res"] = matrix_to_json(wf.model.w_res);
    }
    return j;
}

WeightFile weights_from_json(const json& j)
{
    if (!j.is_object() || j.value("format", std::string{}) != "rceq-weights")
        throw Error(ErrorKind::SchemaError, "not a weight file");
    WeightFile wf;
    wf.rho_max = get_as<double>(j, "rho_max");
    const Activation act = activation_from_string(get_as<std::string>(j, "activation"));
    const InitKind kind = init_kind_from_string(get_as<std::string>(j, "init_kind"));
    for (const auto& je : require(j, "entries")) {
        RationalApprox fit(vector_from_json(require(je, "c")), vector_from_json(require(je, "d")),
                           get_as<double>(je, "fit_error"));
        fit.used_ridge_fallback = je.value("ridge_fallback", false);
        PoleResidueSet prs;
        prs.poles = vector_from_json(require(je, "poles"));
        prs.residues = vector_from_json(require(je, "residues"));
        for (const auto& s : require(je, "stabilized"))
            prs.stabilized.push_back(s.get<bool>());
        prs.perturbed = je.value("perturbed", false);
        if (prs.poles.size() != prs.residues.size() || prs.stabilized.size() != prs.poles.size())
            throw Error(ErrorKind::SchemaError, "pole, residue and flag counts differ");
        wf.entries.push_back({std::move(fit), std::move(prs)});
    }
    if (kind == InitKind::Optimum) {
        std::vector<PoleResidueSet> sets;
        for (const auto& e : wf.entries)
            sets.push_back(e.poles);
        wf.model = init_optimum(sets, wf.rho_max, act);
    } else {
        wf.model.init_kind = kind;
        wf.model.activation = act;
        wf.model.w_in = matrix_from_json(require(j, "w_in"));
        wf.model.w_res = matrix_from_json(require(j, "w_res"));
    }
    if (j.contains("w_out") && !j["w_out"].is_null()) {
        const ComplexVector w = vector_from_json(j["w_out"]);
        if (w.size() != wf.model.n_nodes())
            throw Error(ErrorKind::SchemaError, "readout length differs from node count");
        wf.model.w_out = ComplexMatrix(1, w.size(), w);
    }
    return wf;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(ErrorKind::ConfigError, "write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path)
{
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j)
{
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace rceq
