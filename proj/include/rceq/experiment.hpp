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

// Experiment driver behind the `rceq` command: configuration, weight
// derivation, SER sweeps, eigen-spectrum rank checks and plotting.

#include "rceq/basis.hpp"
#include "rceq/channel.hpp"
#include "rceq/esn.hpp"
#include "rceq/io.hpp"
#include "rceq/ofdm.hpp"
#include "rceq/ratfit.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rceq {

inline constexpr const char* kToolVersion = "0.3.0";

struct ChannelSpec {
    ChannelFamily family = ChannelFamily::ExpPdp;
    std::size_t taps = 10;
    std::filesystem::path profile; // TDL only
    bool min_phase_only = true;
    double sigma0 = 0.05;          // iid_gaussian only
    double mean_decay = 1.5;       // iid_gaussian only
    ExpPdpParams exp_pdp;
    std::optional<ComplexVector> fixed_taps; // when set, every trial uses this channel
};

struct BasisSpec {
    std::size_t n_freq = 128;
    std::size_t n_obs = 5000;
    std::size_t M = 10;
    bool centered = false;
};

struct FitSpec {
    std::size_t K = 10;
    std::size_t K_prime = 9;
    double rho_max = 0.999;
};

struct EsnSpec {
    Activation activation = Activation::SplitTanh;
    double spectral_radius = 0.4;
    double sparsity = 0.6;
    std::optional<double> ridge;
    std::optional<std::size_t> washout;
    std::size_t random_nodes = 0; // 0: same as the optimum reservoir (M K)
    std::size_t target_delay = 0;
};

struct SweepSpec {
    RealVector ebn0_db;
    std::size_t trials = 50;
    std::uint64_t seed = 1;
    std::vector<std::string> methods;
    bool fixed_channel = false;
    bool charge_cp = false;
};

struct RankSpec {
    bool centered = true;
    bool min_phase_only = false;
    std::size_t n_eps = 9;
    std::optional<double> eps;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::size_t workers = 1;
    ChannelSpec channel;
    BasisSpec basis;
    FitSpec fit;
    EsnSpec esn;
    OfdmConfig ofdm;
    SweepSpec sweep;
    RankSpec rank;

    ExperimentConfig();
    void validate() const;
};

const std::vector<std::string>& all_methods();

/// Relative profile paths resolve against `base_dir`.
ExperimentConfig config_from_json(const json& tree, const std::filesystem::path& base_dir = {});
json config_to_json(const ExperimentConfig& cfg);

/// Sets `dotted.key` in a config tree from TOML value text.
void apply_override(json& tree, const std::string& assignment);
/// Reads a .toml or .json config (or defaults when `path` is empty) and applies overrides.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

std::uint64_t fnv1a64(std::string_view bytes);
std::string config_hash(const ExperimentConfig& cfg);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::map<std::string, std::size_t> warnings;

    void warn(const std::string& what, std::size_t count = 1);
    void add_stage(const std::string& stage, double seconds);
    json to_json() const;
};

/// Error tagged with the pipeline stage it came from.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& inner);
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

ChannelStatistics channel_statistics(const ExperimentConfig& cfg);

struct DeriveResult {
    BasisSet basis;
    std::vector<PoleResidueSet> raw_poles;
    WeightFile weights;
};

DeriveResult derive_weights(const ExperimentConfig& cfg, RunManifest& manifest);
std::string fit_error_csv(const DeriveResult& result);

/// One row per (method, Eb/N0, trial), ordered by method, Eb/N0, seed.
std::vector<SerResult> run_ser(const ExperimentConfig& cfg, const EsnModel* optimum, RunManifest& manifest);

std::string ser_csv(const std::vector<SerResult>& rows);
std::vector<SerResult> parse_ser_csv(const std::string& text);

struct SerPoint {
    std::size_t n_symbols = 0;
    std::size_t n_errors = 0;
    double ser() const { return n_symbols ? static_cast<double>(n_errors) / static_cast<double>(n_symbols) : 0.0; }
};
/// Pooled SER per method and Eb/N0.
std::map<std::string, std::map<double, SerPoint>> aggregate_ser(const std::vector<SerResult>& rows);

std::string render_ser_svg(const std::vector<SerResult>& rows, const std::string& title);

struct RankReport {
    RealVector spectrum;   // full 2N spectrum, descending
    std::size_t predicted = 0; // 4 (L + 1)
    std::vector<std::pair<double, std::size_t>> eps_grid;
    double default_eps = 0.0;
    std::size_t default_rank = 0;
    double plateau_ratio = 0.0; // lambda[predicted-1] / lambda[predicted]
    std::size_t n_obs = 0;
};

RankReport verify_rank(const ExperimentConfig& cfg, RunManifest& manifest);
std::string spectrum_csv(const RankReport& report);
json rank_to_json(const RankReport& report);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

} // namespace rceq
