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

// SISO OFDM link: block-pilot subframes, multipath + AWGN, classical and
// reservoir equalizers, symbol error counting.

#include "rceq/channel.hpp"
#include "rceq/esn.hpp"
#include "rceq/numkit.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace rceq {

enum class Constellation { QPSK, QAM16, QAM64 };

const char* to_string(Constellation c);
Constellation constellation_from_string(const std::string& s);
std::size_t constellation_size(Constellation c);
unsigned bits_per_symbol(Constellation c);
/// Gray-mapped square constellation with unit average energy, indexed by symbol value.
const ComplexVector& constellation_points(Constellation c);

using IndexGrid = Matrix<std::uint32_t>;

ComplexMatrix modulate(const IndexGrid& indices, Constellation c);
std::uint32_t demap_symbol(cplx y, Constellation c);
IndexGrid demap(const ComplexMatrix& grid, Constellation c);

/// In-place radix-2 transform; `inverse` flips the exponent sign. No scaling.
void fft_inplace(std::span<cplx> data, bool inverse);

struct OfdmConfig {
    std::size_t fft_size = 256;
    std::size_t cp_len = 40;
    std::size_t n_pilot_syms = 4;
    std::size_t n_data_syms = 13;
    Constellation constellation = Constellation::QAM16;

    std::size_t symbol_len() const noexcept { return fft_size + cp_len; }
    std::size_t n_symbols() const noexcept { return n_pilot_syms + n_data_syms; }
    std::size_t frame_len() const noexcept { return n_symbols() * symbol_len(); }
    void validate() const;
};

struct Subframe {
    ComplexMatrix pilot_grid; // fft_size x n_pilot
    ComplexMatrix data_grid;  // fft_size x n_data
    IndexGrid pilot_indices;
    IndexGrid data_indices;
    ComplexVector tx_time;    // CP + unitary IFFT per symbol, pilots first
};

Subframe build_subframe(const OfdmConfig& cfg, RngStream& rng);

/// Unitary IFFT of each grid column with the cyclic prefix prepended.
ComplexVector ofdm_modulate(const ComplexMatrix& grid, const OfdmConfig& cfg);
/// CP removal and unitary FFT for `count` symbols starting at `first_symbol`
/// (symbol index within `time`).
ComplexMatrix ofdm_demodulate(std::span<const cplx> time, const OfdmConfig& cfg, std::size_t first_symbol,
                              std::size_t count);

/// Linear convolution with h, truncated to the input length.
ComplexVector convolve_truncated(std::span<const cplx> tx, const ChannelRealization& h);
ComplexVector apply_channel(std::span<const cplx> tx, const ChannelRealization& h, double noise_var, RngStream& rng);

double average_power(std::span<const cplx> v);

/// noise_var = Es / (log2|C| 10^(EbN0/10)). With `charge_cp` the per-bit
/// energy also carries the cyclic-prefix overhead.
double ebn0_to_noise_var(double ebn0_db, Constellation c, double es_per_sample = 1.0,
                         const OfdmConfig* cfg_for_cp = nullptr);

IndexGrid zf_perfect_csi(const ComplexMatrix& rx_grid, const ChannelRealization& h, const OfdmConfig& cfg);

ComplexVector ls_estimate(const ComplexMatrix& rx_pilot_grid, const ComplexMatrix& pilot_grid);
/// Per-subcarrier Wiener shrinkage of the LS estimate with the signal power
/// taken from the spread of the per-pilot LS estimates.
ComplexVector mmse_estimate(const ComplexMatrix& rx_pilot_grid, const ComplexMatrix& pilot_grid, double noise_var);
IndexGrid mmse_equalize(const ComplexMatrix& rx_grid, std::span<const cplx> h_est, double noise_var, Constellation c);

struct EsnEqualizeOptions {
    std::optional<std::size_t> washout; // defaults to cp_len
    std::optional<double> ridge;        // defaults to default_ridge()
    std::size_t target_delay = 0;
};

struct EsnEqualizeResult {
    IndexGrid decisions;
    double training_mse = 0.0;
};

/// Reservoir driven by the whole received subframe; readout trained on the
/// pilot span, applied to the data span.
EsnEqualizeResult esn_equalize(const EsnModel& model, const Subframe& sf, std::span<const cplx> rx_time,
                               const OfdmConfig& cfg, const EsnEqualizeOptions& opts = {});

struct SerResult {
    std::string method;
    double ebn0_db = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_symbols = 0;
    std::size_t n_errors = 0;
    double ser = 0.0;
};

SerResult measure_ser(const IndexGrid& estimated, const IndexGrid& truth);

} // namespace rceq
