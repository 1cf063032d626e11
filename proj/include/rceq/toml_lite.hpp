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

// Reader for the TOML subset used by experiment configs and channel profiles:
// [table] / [a.b] headers, bare or dotted keys, strings, integers, floats
// (inc. inf/nan), booleans, and (possibly multi-line) arrays of those.
// Output is a JSON tree so the same accessors serve .toml and .json files.

#include <json.hpp>

#include <string>

namespace rceq {

nlohmann::json parse_toml_lite(const std::string& text);

/// Parses a single scalar/array TOML value, e.g. for `--set key=value`.
/// Unquoted text that is not a number/bool/array is taken as a string.
nlohmann::json parse_toml_value(const std::string& text);

} // namespace rceq
