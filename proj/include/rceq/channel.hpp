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

// Random multipath channel draws and their sampled frequency-domain inverse.

#include "rceq/numkit.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rceq {

/// Seeded random stream. Only the engine's raw 64-bit output is consumed, and
/// uniform/normal transforms are done here, so sequences are identical across
/// standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent child stream derived from (seed, index).
    RngStream split(std::uint64_t index) const;

    std::uint64_t next_u64() { return engine_(); }
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);
    std::uint64_t below(std::uint64_t n);   // [0, n)
    double normal();
    /// Circularly symmetric CN(0, variance).
    cplx complex_normal(double variance = 1.0);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

/// Stateless 64-bit mixer, used for seed derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

struct ChannelRealization {
    ComplexVector taps;
    std::optional<ComplexVector> freq_samples;

    std::size_t length() const noexcept { return taps.size(); }
};

enum class ChannelFamily { ExpPdp, TappedDelayLine, IidGaussian };

const char* to_string(ChannelFamily family);
ChannelFamily channel_family_from_string(const std::string& name);

/// Exponential power-delay-profile law: h0 = 1, mu_l = exp(-mean_decay l) mu0,
/// sigma_l^2 = variance_scale exp(-variance_decay l), mu0 ~ CN(0,1).
struct ExpPdpParams {
    double mean_decay = 1.5;
    double variance_scale = 0.5;
    double variance_decay = 3.75;
};

struct ChannelStatistics {
    ChannelFamily family = ChannelFamily::ExpPdp;
    std::string name;
    std::size_t taps = 0;
    ComplexVector means;   // per tap; for ExpPdp these are relative to mu0 = 1
    RealVector variances;  // per tap
    // Tapped-delay-line paths (all three have equal length).
    std::vector<std::size_t> delays;
    RealVector powers;     // linear
    RealVector k_factors;  // linear
    ExpPdpParams exp_pdp;
};

ChannelStatistics exp_pdp_statistics(std::size_t taps, const ExpPdpParams& params = {});
/// Independent taps h_l ~ CN(exp(-mean_decay l), sigma0^2), the law used for ε-rank analysis.
ChannelStatistics iid_gaussian_statistics(std::size_t taps, double sigma0, double mean_decay = 1.5);

ChannelRealization sample_exp_pdp(std::size_t taps, RngStream& rng, const ExpPdpParams& params = {});
/// Same law with mu0 fixed by the caller.
ChannelRealization sample_exp_pdp_given_mean(std::size_t taps, cplx mu0, RngStream& rng,
                                             const ExpPdpParams& params = {});
ChannelRealization sample_tdl(const ChannelStatistics& stats, RngStream& rng);
ChannelRealization sample_iid_gaussian(const ChannelStatistics& stats, RngStream& rng);
ChannelRealization sample_channel(const ChannelStatistics& stats, RngStream& rng);

/// Rejection-samples until a minimum-phase draw appears. Rejections are added
/// to `rejections` when given. Throws NoConvergence after `max_tries` draws.
ChannelRealization sample_min_phase(const ChannelStatistics& stats, RngStream& rng,
                                    std::size_t* rejections = nullptr, std::size_t max_tries = 100000);

/// Every zero of H(z) = sum h_l z^-l strictly inside |z| < 1 - 1e-9.
bool is_minimum_phase(const ChannelRealization& h);
/// Zeros of H(z) in the z-plane.
ComplexVector channel_zeros(const ChannelRealization& h);

/// v_i = 1 / H(exp(j 2 pi i / n_freq)).
ComplexVector channel_inverse_freq(const ChannelRealization& h, std::size_t n_freq);

/// Tapped-delay-line profile: keys `name`, `delays_taps`, `powers_db`,
/// `k_factors_db`, optional `taps` (defaults to max delay + 1).
ChannelStatistics parse_tdl_profile(const std::string& text, bool json_syntax = false);
ChannelStatistics load_tdl_profile(const std::filesystem::path& path);

} // namespace rceq
