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

#include "rceq/channel.hpp"
#include "rceq/toml_lite.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rceq {

// ---------------------------------------------------------------------------
// RngStream

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RngStream RngStream::split(std::uint64_t index) const { return RngStream(mix_seed(seed_, index)); }

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t RngStream::below(std::uint64_t n)
{
    if (n == 0)
        throw Error(ErrorKind::InvalidArgument, "below(0)");
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double RngStream::normal()
{
    if (spare_normal_) {
        const double v = *spare_normal_;
        spare_normal_.reset();
        return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(a);
    return r * std::cos(a);
}

cplx RngStream::complex_normal(double variance)
{
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

// ---------------------------------------------------------------------------
// Statistics and sampling

const char* to_string(ChannelFamily family)
{
    switch (family) {
    case ChannelFamily::ExpPdp: return "exp_pdp";
    case ChannelFamily::TappedDelayLine: return "tdl";
    case ChannelFamily::IidGaussian: return "iid_gaussian";
    }
    return "unknown";
}

ChannelFamily channel_family_from_string(const std::string& name)
{
    if (name == "exp_pdp")
        return ChannelFamily::ExpPdp;
    if (name == "tdl")
        return ChannelFamily::TappedDelayLine;
    if (name == "iid_gaussian")
        return ChannelFamily::IidGaussian;
    throw Error(ErrorKind::ConfigError, "unknown channel family '" + name + "'");
}

ChannelStatistics exp_pdp_statistics(std::size_t taps, const ExpPdpParams& params)
{
    if (taps < 2)
        throw Error(ErrorKind::InvalidArgument, "exponential PDP needs at least 2 taps");
    ChannelStatistics st;
    st.family = ChannelFamily::ExpPdp;
    st.name = "exp-pdp";
    st.taps = taps;
    st.exp_pdp = params;
    st.means.resize(taps);
    st.variances.resize(taps);
    st.means[0] = 1.0;
    st.variances[0] = 0.0;
    for (std::size_t l = 1; l < taps; ++l) {
        const double ld = static_cast<double>(l);
        st.means[l] = std::exp(-params.mean_decay * ld);
        st.variances[l] = params.variance_scale * std::exp(-params.variance_decay * ld);
    }
    return st;
}

ChannelStatistics iid_gaussian_statistics(std::size_t taps, double sigma0, double mean_decay)
{
    if (taps < 1)
        throw Error(ErrorKind::InvalidArgument, "need at least one tap");
    if (!(sigma0 >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "sigma0 must be non-negative");
    ChannelStatistics st;
    st.family = ChannelFamily::IidGaussian;
    st.name = "iid-gaussian";
    st.taps = taps;
    st.means.resize(taps);
    st.variances.assign(taps, sigma0 * sigma0);
    for (std::size_t l = 0; l < taps; ++l)
        st.means[l] = std::exp(-mean_decay * static_cast<double>(l));
    return st;
}

ChannelRealization sample_exp_pdp_given_mean(std::size_t taps, cplx mu0, RngStream& rng, const ExpPdpParams& params)
{
    if (taps < 2)
        throw Error(ErrorKind::InvalidArgument, "exponential PDP needs at least 2 taps");
    ChannelRealization h;
    h.taps.resize(taps);
    h.taps[0] = 1.0;
    for (std::size_t l = 1; l < taps; ++l) {
        const double ld = static_cast<double>(l);
        const cplx mean = std::exp(-params.mean_decay * ld) * mu0;
        const double var = params.variance_scale * std::exp(-params.variance_decay * ld);
        h.taps[l] = mean + rng.complex_normal(var);
    }
    return h;
}

ChannelRealization sample_exp_pdp(std::size_t taps, RngStream& rng, const ExpPdpParams& params)
{
    const cplx mu0 = rng.complex_normal(1.0);
    return sample_exp_pdp_given_mean(taps, mu0, rng, params);
}

ChannelRealization sample_tdl(const ChannelStatistics& stats, RngStream& rng)
{
    if (stats.family != ChannelFamily::TappedDelayLine)
        throw Error(ErrorKind::BadProfile, "statistics are not a tapped-delay-line profile");
    if (stats.delays.size() != stats.powers.size() || stats.delays.size() != stats.k_factors.size())
        throw Error(ErrorKind::BadProfile, "delay/power/K-factor lengths differ");
    ChannelRealization h;
    h.taps.assign(stats.taps, cplx{});
    for (std::size_t i = 0; i < stats.delays.size(); ++i) {
        if (stats.delays[i] >= stats.taps)
            throw Error(ErrorKind::BadProfile, "delay beyond last tap");
        const double k = stats.k_factors[i];
        const cplx g = rng.complex_normal(1.0);
        const cplx path = std::sqrt(stats.powers[i]) * (std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * g);
        h.taps[stats.delays[i]] += path;
    }
    return h;
}

ChannelRealization sample_iid_gaussian(const ChannelStatistics& stats, RngStream& rng)
{
    if (stats.means.size() != stats.taps || stats.variances.size() != stats.taps)
        throw Error(ErrorKind::BadProfile, "mean/variance lengths differ from tap count");
    ChannelRealization h;
    h.taps.resize(stats.taps);
    for (std::size_t l = 0; l < stats.taps; ++l)
        h.taps[l] = stats.means[l] + rng.complex_normal(stats.variances[l]);
    return h;
}

ChannelRealization sample_channel(const ChannelStatistics& stats, RngStream& rng)
{
    switch (stats.family) {
    case ChannelFamily::ExpPdp: return sample_exp_pdp(stats.taps, rng, stats.exp_pdp);
    case ChannelFamily::TappedDelayLine: return sample_tdl(stats, rng);
    case ChannelFamily::IidGaussian: return sample_iid_gaussian(stats, rng);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown channel family");
}

ChannelRealization sample_min_phase(const ChannelStatistics& stats, RngStream& rng, std::size_t* rejections,
                                    std::size_t max_tries)
{
    ChannelRealization last;
    for (std::size_t i = 0; i < max_tries; ++i) {
        last = sample_channel(stats, rng);
        if (is_minimum_phase(last))
            return last;
        if (rejections)
            ++*rejections;
    }
    throw NoConvergenceError("no minimum-phase draw within " + std::to_string(max_tries) + " tries", last.taps);
}

// ---------------------------------------------------------------------------
// Phase and inverse

ComplexVector channel_zeros(const ChannelRealization& h)
{
    std::size_t len = h.taps.size();
    while (len > 1 && h.taps[len - 1] == cplx{})
        --len;
    if (len <= 1)
        return {};
    // z^(L-1) H(z) = sum_l h_l z^(L-1-l): ascending coefficients are the reversed taps.
    ComplexVector coeffs(h.taps.rbegin() + static_cast<std::ptrdiff_t>(h.taps.size() - len), h.taps.rend());
    return poly_roots(coeffs);
}

bool is_minimum_phase(const ChannelRealization& h)
{
    if (h.taps.empty())
        throw Error(ErrorKind::InvalidArgument, "empty channel");
    require_finite(h.taps, "channel taps");
    double max_tap = 0.0;
    for (const auto& t : h.taps)
        max_tap = std::max(max_tap, std::abs(t));
    if (std::abs(h.taps[0]) <= 1e-12 * std::max(1.0, max_tap))
        return false; // leading delay puts a zero at infinity
    for (const auto& z : channel_zeros(h))
        if (!(std::abs(z) < 1.0 - 1e-9))
            return false;
    return true;
}

ComplexVector channel_inverse_freq(const ChannelRealization& h, std::size_t n_freq)
{
    ComplexVector hf = dft_response(h.taps, n_freq);
    for (std::size_t i = 0; i < hf.size(); ++i) {
        const double mag = std::abs(hf[i]);
        if (!(mag > 1e-9))
            throw SpectralNullError(i, mag);
        hf[i] = 1.0 / hf[i];
    }
    return hf;
}

// ---------------------------------------------------------------------------
// Profiles

ChannelStatistics parse_tdl_profile(const std::string& text, bool json_syntax)
{
    nlohmann::json doc;
    try {
        doc = json_syntax ? nlohmann::json::parse(text) : parse_toml_lite(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::BadProfile, std::string("profile parse error: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::BadProfile, e.what());
    }
    try {
        ChannelStatistics st;
        st.family = ChannelFamily::TappedDelayLine;
        st.name = doc.value("name", std::string("tdl"));
        const auto delays = doc.at("delays_taps").get<std::vector<std::int64_t>>();
        const auto powers_db = doc.at("powers_db").get<std::vector<double>>();
        const auto k_db = doc.at("k_factors_db").get<std::vector<double>>();
        if (delays.empty())
            throw Error(ErrorKind::BadProfile, "profile has no paths");
        if (delays.size() != powers_db.size() || delays.size() != k_db.size())
            throw Error(ErrorKind::BadProfile, "delays_taps, powers_db and k_factors_db lengths differ");
        std::int64_t max_delay = 0;
        for (auto d : delays) {
            if (d < 0)
                throw Error(ErrorKind::BadProfile, "negative delay");
            max_delay = std::max(max_delay, d);
        }
        st.taps = doc.contains("taps") ? doc.at("taps").get<std::size_t>() : static_cast<std::size_t>(max_delay + 1);
        if (st.taps == 0 || static_cast<std::size_t>(max_delay) > st.taps - 1)
            throw Error(ErrorKind::BadProfile, "delay beyond L-1");
        st.means.assign(st.taps, cplx{});
        st.variances.assign(st.taps, 0.0);
        for (std::size_t i = 0; i < delays.size(); ++i) {
            const double p = std::pow(10.0, powers_db[i] / 10.0);
            // -inf dB K-factor means pure Rayleigh.
            const double k = std::isinf(k_db[i]) && k_db[i] < 0 ? 0.0 : std::pow(10.0, k_db[i] / 10.0);
            if (!(p > 0.0) || !std::isfinite(p))
                throw Error(ErrorKind::BadProfile, "path powers must be positive and finite");
            if (!(k >= 0.0) || !std::isfinite(k))
                throw Error(ErrorKind::BadProfile, "K-factors must be finite");
            const auto d = static_cast<std::size_t>(delays[i]);
            st.delays.push_back(d);
            st.powers.push_back(p);
            st.k_factors.push_back(k);
            st.means[d] += std::sqrt(p * k / (k + 1.0));
            st.variances[d] += p / (k + 1.0);
        }
        return st;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::BadProfile, std::string("profile schema error: ") + e.what());
    }
}

ChannelStatistics load_tdl_profile(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::BadProfile, "cannot open profile " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_tdl_profile(ss.str(), path.extension() == ".json");
}

} // namespace rceq
