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

#include "rceq/ofdm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace rceq {

const char* to_string(Constellation c)
{
    switch (c) {
    case Constellation::QPSK: return "qpsk";
    case Constellation::QAM16: return "qam16";
    case Constellation::QAM64: return "qam64";
    }
    return "?";
}

Constellation constellation_from_string(const std::string& s)
{
    if (s == "qpsk" || s == "QPSK")
        return Constellation::QPSK;
    if (s == "qam16" || s == "16qam" || s == "16-QAM")
        return Constellation::QAM16;
    if (s == "qam64" || s == "64qam" || s == "64-QAM")
        return Constellation::QAM64;
    throw Error(ErrorKind::ConfigError, "unknown constellation '" + s + "'");
}

std::size_t constellation_size(Constellation c)
{
    return std::size_t{1} << bits_per_symbol(c);
}

unsigned bits_per_symbol(Constellation c)
{
    switch (c) {
    case Constellation::QPSK: return 2;
    case Constellation::QAM16: return 4;
    case Constellation::QAM64: return 6;
    }
    return 0;
}

namespace {

inline std::uint32_t gray_to_binary(std::uint32_t g)
{
    for (std::uint32_t shift = 1; shift < 32; shift <<= 1)
        g ^= g >> shift;
    return g;
}

inline std::uint32_t binary_to_gray(std::uint32_t b) { return b ^ (b >> 1); }

ComplexVector build_points(Constellation c)
{
    const unsigned half = bits_per_symbol(c) / 2;
    const std::uint32_t side = 1u << half;
    const std::size_t size = constellation_size(c);
    const double scale = std::sqrt(2.0 * (static_cast<double>(size) - 1.0) / 3.0);
    ComplexVector pts(size);
    for (std::uint32_t idx = 0; idx < size; ++idx) {
        const std::uint32_t gi = idx >> half, gq = idx & (side - 1);
        const double i = 2.0 * gray_to_binary(gi) - (side - 1.0);
        const double q = 2.0 * gray_to_binary(gq) - (side - 1.0);
        pts[idx] = cplx{i, q} / scale;
    }
    return pts;
}

std::uint32_t axis_level(double v, std::uint32_t side)
{
    const double lvl = std::round((v + (side - 1.0)) / 2.0);
    if (!(lvl > 0.0))
        return 0;
    return static_cast<std::uint32_t>(std::min(lvl, side - 1.0));
}

} // namespace

const ComplexVector& constellation_points(Constellation c)
{
    static const ComplexVector qpsk = build_points(Constellation::QPSK);
    static const ComplexVector q16 = build_points(Constellation::QAM16);
    static const ComplexVector q64 = build_points(Constellation::QAM64);
    switch (c) {
    case Constellation::QPSK: return qpsk;
    case Constellation::QAM16: return q16;
    case Constellation::QAM64: return q64;
    }
    return qpsk;
}

ComplexMatrix modulate(const IndexGrid& indices, Constellation c)
{
    const auto& pts = constellation_points(c);
    ComplexMatrix out(indices.rows(), indices.cols());
    for (std::size_t i = 0; i < indices.data().size(); ++i) {
        const auto idx = indices.data()[i];
        if (idx >= pts.size())
            throw Error(ErrorKind::IndexOutOfRange, "symbol index " + std::to_string(idx) + " out of range");
        out.data()[i] = pts[idx];
    }
    return out;
}

std::uint32_t demap_symbol(cplx y, Constellation c)
{
    const unsigned half = bits_per_symbol(c) / 2;
    const std::uint32_t side = 1u << half;
    const double scale = std::sqrt(2.0 * (static_cast<double>(constellation_size(c)) - 1.0) / 3.0);
    const std::uint32_t li = axis_level(y.real() * scale, side);
    const std::uint32_t lq = axis_level(y.imag() * scale, side);
    return (binary_to_gray(li) << half) | binary_to_gray(lq);
}

IndexGrid demap(const ComplexMatrix& grid, Constellation c)
{
    IndexGrid out(grid.rows(), grid.cols());
    for (std::size_t i = 0; i < grid.data().size(); ++i)
        out.data()[i] = demap_symbol(grid.data()[i], c);
    return out;
}

void fft_inplace(std::span<cplx> data, bool inverse)
{
    const std::size_t n = data.size();
    if (n == 0 || !std::has_single_bit(n))
        throw Error(ErrorKind::InvalidArgument, "FFT length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(data[i], data[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k) {
            const cplx w = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                               static_cast<double>(len));
            for (std::size_t s = 0; s < n; s += len) {
                const cplx a = data[s + k], b = data[s + k + half] * w;
                data[s + k] = a + b;
                data[s + k + half] = a - b;
            }
        }
    }
}

void OfdmConfig::validate() const
{
    if (fft_size < 2 || !std::has_single_bit(fft_size))
        throw Error(ErrorKind::ConfigError, "fft_size must be a power of two");
    if (cp_len >= fft_size)
        throw Error(ErrorKind::ConfigError, "cp_len must be shorter than fft_size");
    if (n_pilot_syms == 0 || n_data_syms == 0)
        throw Error(ErrorKind::ConfigError, "need at least one pilot and one data symbol");
}

ComplexVector ofdm_modulate(const ComplexMatrix& grid, const OfdmConfig& cfg)
{
    if (grid.rows() != cfg.fft_size)
        throw Error(ErrorKind::ShapeMismatch, "grid rows must equal fft_size");
    const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.fft_size));
    ComplexVector out;
    out.reserve(grid.cols() * cfg.symbol_len());
    ComplexVector sym(cfg.fft_size);
    for (std::size_t s = 0; s < grid.cols(); ++s) {
        for (std::size_t k = 0; k < cfg.fft_size; ++k)
            sym[k] = grid(k, s);
        fft_inplace(sym, true);
        for (auto& z : sym)
            z *= norm;
        out.insert(out.end(), sym.end() - static_cast<std::ptrdiff_t>(cfg.cp_len), sym.end());
        out.insert(out.end(), sym.begin(), sym.end());
    }
    return out;
}

ComplexMatrix ofdm_demodulate(std::span<const cplx> time, const OfdmConfig& cfg, std::size_t first_symbol,
                              std::size_t count)
{
    const std::size_t sl = cfg.symbol_len();
    if ((first_symbol + count) * sl > time.size())
        throw Error(ErrorKind::LengthMismatch, "time signal shorter than the requested symbols");
    const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.fft_size));
    ComplexMatrix grid(cfg.fft_size, count);
    ComplexVector sym(cfg.fft_size);
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t start = (first_symbol + s) * sl + cfg.cp_len;
        std::copy_n(time.begin() + static_cast<std::ptrdiff_t>(start), cfg.fft_size, sym.begin());
        fft_inplace(sym, false);
        for (std::size_t k = 0; k < cfg.fft_size; ++k)
            grid(k, s) = sym[k] * norm;
    }
    return grid;
}

Subframe build_subframe(const OfdmConfig& cfg, RngStream& rng)
{
    cfg.validate();
    const std::uint64_t size = constellation_size(cfg.constellation);
    Subframe sf;
    sf.pilot_indices = IndexGrid(cfg.fft_size, cfg.n_pilot_syms);
    sf.data_indices = IndexGrid(cfg.fft_size, cfg.n_data_syms);
    // Symbol-major draw order: pilots then data, subcarriers within a symbol.
    for (std::size_t s = 0; s < cfg.n_pilot_syms; ++s)
        for (std::size_t k = 0; k < cfg.fft_size; ++k)
            sf.pilot_indices(k, s) = static_cast<std::uint32_t>(rng.below(size));
    for (std::size_t s = 0; s < cfg.n_data_syms; ++s)
        for (std::size_t k = 0; k < cfg.fft_size; ++k)
            sf.data_indices(k, s) = static_cast<std::uint32_t>(rng.below(size));
    sf.pilot_grid = modulate(sf.pilot_indices, cfg.constellation);
    sf.data_grid = modulate(sf.data_indices, cfg.constellation);
    sf.tx_time = ofdm_modulate(sf.pilot_grid, cfg);
    const ComplexVector data_time = ofdm_modulate(sf.data_grid, cfg);
    sf.tx_time.insert(sf.tx_time.end(), data_time.begin(), data_time.end());
    return sf;
}

ComplexVector convolve_truncated(std::span<const cplx> tx, const ChannelRealization& h)
{
    if (h.taps.empty())
        throw Error(ErrorKind::InvalidArgument, "channel has no taps");
    ComplexVector out(tx.size(), cplx{});
    for (std::size_t n = 0; n < tx.size(); ++n) {
        cplx acc{};
        const std::size_t lmax = std::min(h.taps.size(), n + 1);
        for (std::size_t l = 0; l < lmax; ++l)
            acc += h.taps[l] * tx[n - l];
        out[n] = acc;
    }
    return out;
}

ComplexVector apply_channel(std::span<const cplx> tx, const ChannelRealization& h, double noise_var, RngStream& rng)
{
    if (!(noise_var >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "noise variance must be non-negative");
    ComplexVector out = convolve_truncated(tx, h);
    if (noise_var > 0.0)
        for (auto& z : out)
            z += rng.complex_normal(noise_var);
    return out;
}

double average_power(std::span<const cplx> v)
{
    if (v.empty())
        return 0.0;
    return norm2_squared(v) / static_cast<double>(v.size());
}

double ebn0_to_noise_var(double ebn0_db, Constellation c, double es_per_sample, const OfdmConfig* cfg_for_cp)
{
    double es = es_per_sample;
    if (cfg_for_cp)
        es *= static_cast<double>(cfg_for_cp->symbol_len()) / static_cast<double>(cfg_for_cp->fft_size);
    return es / (static_cast<double>(bits_per_symbol(c)) * std::pow(10.0, ebn0_db / 10.0));
}

IndexGrid zf_perfect_csi(const ComplexMatrix& rx_grid, const ChannelRealization& h, const OfdmConfig& cfg)
{
    if (rx_grid.rows() != cfg.fft_size)
        throw Error(ErrorKind::ShapeMismatch, "grid rows must equal fft_size");
    const ComplexVector hf = dft_response(h.taps, cfg.fft_size);
    for (std::size_t k = 0; k < hf.size(); ++k)
        if (std::abs(hf[k]) <= 1e-9)
            throw SpectralNullError(k, std::abs(hf[k]));
    ComplexMatrix eq(rx_grid.rows(), rx_grid.cols());
    for (std::size_t k = 0; k < rx_grid.rows(); ++k)
        for (std::size_t s = 0; s < rx_grid.cols(); ++s)
            eq(k, s) = rx_grid(k, s) / hf[k];
    return demap(eq, cfg.constellation);
}

ComplexVector ls_estimate(const ComplexMatrix& rx_pilot_grid, const ComplexMatrix& pilot_grid)
{
    if (rx_pilot_grid.rows() != pilot_grid.rows() || rx_pilot_grid.cols() != pilot_grid.cols())
        throw Error(ErrorKind::ShapeMismatch, "received and reference pilot grids differ in shape");
    if (pilot_grid.cols() == 0)
        throw Error(ErrorKind::InvalidArgument, "need at least one pilot symbol");
    const std::size_t n = pilot_grid.rows(), p = pilot_grid.cols();
    ComplexVector h(n, cplx{});
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t s = 0; s < p; ++s)
            h[k] += rx_pilot_grid(k, s) / pilot_grid(k, s);
        h[k] /= static_cast<double>(p);
    }
    return h;
}

ComplexVector mmse_estimate(const ComplexMatrix& rx_pilot_grid, const ComplexMatrix& pilot_grid, double noise_var)
{
    ComplexVector h = ls_estimate(rx_pilot_grid, pilot_grid);
    const std::size_t n = pilot_grid.rows(), p = pilot_grid.cols();
    const double pd = static_cast<double>(p);
    for (std::size_t k = 0; k < n; ++k) {
        // E|Y/X|^2 = |H|^2 + noise/|X|^2 per pilot; the averaged estimate
        // carries noise (1/P^2) sum noise/|X|^2.
        double second_moment = 0.0, inv_energy = 0.0;
        for (std::size_t s = 0; s < p; ++s) {
            second_moment += std::norm(rx_pilot_grid(k, s) / pilot_grid(k, s));
            inv_energy += 1.0 / std::norm(pilot_grid(k, s));
        }
        second_moment /= pd;
        const double sigma_h2 = std::max(0.0, second_moment - noise_var * inv_energy / pd);
        const double est_noise = noise_var * inv_energy / (pd * pd);
        const double denom = sigma_h2 + est_noise;
        h[k] *= denom > 0.0 ? sigma_h2 / denom : 1.0;
    }
    return h;
}

IndexGrid mmse_equalize(const ComplexMatrix& rx_grid, std::span<const cplx> h_est, double noise_var, Constellation c)
{
    if (h_est.size() != rx_grid.rows())
        throw Error(ErrorKind::LengthMismatch, "channel estimate length differs from grid rows");
    ComplexMatrix eq(rx_grid.rows(), rx_grid.cols());
    for (std::size_t k = 0; k < rx_grid.rows(); ++k) {
        const double den = std::norm(h_est[k]) + noise_var;
        const cplx g = den > 0.0 ? std::conj(h_est[k]) / den : cplx{};
        for (std::size_t s = 0; s < rx_grid.cols(); ++s)
            eq(k, s) = g * rx_grid(k, s);
    }
    return demap(eq, c);
}

EsnEqualizeResult esn_equalize(const EsnModel& model, const Subframe& sf, std::span<const cplx> rx_time,
                               const OfdmConfig& cfg, const EsnEqualizeOptions& opts)
{
    const std::size_t frame = cfg.frame_len();
    if (rx_time.size() != frame || sf.tx_time.size() != frame)
        throw Error(ErrorKind::LengthMismatch, "received waveform does not match the subframe length");
    const std::size_t d = opts.target_delay;
    const std::size_t washout = opts.washout.value_or(cfg.cp_len);
    const std::size_t pilot_end = cfg.n_pilot_syms * cfg.symbol_len();

    ComplexVector input(rx_time.begin(), rx_time.end());
    input.resize(frame + d, cplx{});
    const StateTrajectory traj = run_states(model, input);

    StateTrajectory train;
    train.washout = washout + d;
    train.states = ComplexMatrix(model.n_nodes(), pilot_end + d);
    for (std::size_t i = 0; i < model.n_nodes(); ++i) {
        auto src = traj.states.row(i);
        std::copy_n(src.begin(), pilot_end + d, train.states.row(i).begin());
    }
    ComplexVector targets(pilot_end + d, cplx{});
    for (std::size_t n = d; n < pilot_end + d; ++n)
        targets[n] = sf.tx_time[n - d];

    const TrainResult trained = train_readout(model, train, targets, opts.ridge);
    ComplexVector out = apply_readout(trained.model, traj, pilot_end + d);
    const ComplexMatrix grid = ofdm_demodulate(out, cfg, 0, cfg.n_data_syms);
    return {demap(grid, cfg.constellation), trained.training_mse};
}

SerResult measure_ser(const IndexGrid& estimated, const IndexGrid& truth)
{
    if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols())
        throw Error(ErrorKind::ShapeMismatch, "decision and truth grids differ in shape");
    SerResult r;
    r.n_symbols = truth.data().size();
    for (std::size_t i = 0; i < r.n_symbols; ++i)
        r.n_errors += estimated.data()[i] != truth.data()[i] ? 1 : 0;
    r.ser = r.n_symbols ? static_cast<double>(r.n_errors) / static_cast<double>(r.n_symbols) : 0.0;
    return r;
}

} // namespace rceq
