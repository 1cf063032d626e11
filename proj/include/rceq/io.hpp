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

#pragma once

// JSON files: basis sets, synthesized weights, trained models.
// Complex numbers are written as [re, im] pairs.

#include "rceq/basis.hpp"
#include "rceq/esn.hpp"
#include "rceq/ratfit.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace rceq {

using json = nlohmann::json;

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);
json vector_to_json(std::span<const cplx> v);
ComplexVector vector_from_json(const json& j);
json matrix_to_json(const ComplexMatrix& m); // nested rows
ComplexMatrix matrix_from_json(const json& j);

json basis_to_json(const BasisSet& basis);
BasisSet basis_from_json(const json& j);

/// One synthesized basis vector: its rational fit and the pole/residue set
/// after stabilization.
struct WeightEntry {
    RationalApprox fit;
    PoleResidueSet poles; // stabilized
};

struct WeightFile {
    std::vector<WeightEntry> entries;
    double rho_max = 0.999;
    EsnModel model;
};

json weights_to_json(const WeightFile& wf);
WeightFile weights_from_json(const json& j);

/// Any model, including random ones (stored as dense W_in / W_res).
json model_to_json(const EsnModel& model);
EsnModel model_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

} // namespace rceq
