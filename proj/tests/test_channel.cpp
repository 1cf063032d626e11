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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace rceq;
using namespace rceq::test;

TEST_CASE("rng streams are reproducible and splittable")
{
    RngStream a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    RngStream s0 = RngStream(7).split(0), s0b = RngStream(7).split(0), s1 = RngStream(7).split(1);
    CHECK(s0.next_u64() == s0b.next_u64());
    CHECK(s0.next_u64() != s1.next_u64());

    RngStream r(9);
    double sum = 0, sum2 = 0, csum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        const double g = r.normal();
        sum += g;
        sum2 += g * g;
        csum2 += std::norm(r.complex_normal(2.0));
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(csum2 / n == doctest::Approx(2.0).epsilon(0.02));
    for (int i = 0; i < 1000; ++i)
        CHECK(r.below(7) < 7u);
}

TEST_CASE("exp-PDP realizations")
{
    RngStream rng(1);
    const auto h = sample_exp_pdp(10, rng);
    CHECK(h.length() == 10);
    CHECK(h.taps[0] == cplx(1.0, 0.0));

    RngStream r1(5), r2(5);
    CHECK(sample_exp_pdp(10, r1).taps == sample_exp_pdp(10, r2).taps);
    CHECK_THROWS_AS(sample_exp_pdp(1, rng), Error);
}

TEST_CASE("exp-PDP conditional moments with mu0 held fixed")
{
    const cplx mu0(0.6, -0.3);
    RngStream rng(77);
    const int n = 100000;
    cplx mean1{}, mean3{};
    double var1 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto h = sample_exp_pdp_given_mean(4, mu0, rng);
        mean1 += h.taps[1];
        mean3 += h.taps[3];
        var1 += std::norm(h.taps[1] - std::exp(-1.5) * mu0);
    }
    mean1 /= n;
    mean3 /= n;
    var1 /= n;
    CHECK(std::abs(mean1 - std::exp(-1.5) * mu0) <= 0.02 * std::abs(std::exp(-1.5) * mu0));
    CHECK(std::abs(mean3 - std::exp(-4.5) * mu0) <= 0.02 * std::abs(std::exp(-4.5) * mu0) + 5e-4);
    CHECK(var1 == doctest::Approx(0.5 * std::exp(-3.75)).epsilon(0.05));

    ExpPdpParams frozen;
    frozen.variance_scale = 0.0;
    const auto h = sample_exp_pdp_given_mean(5, mu0, rng, frozen);
    for (int l = 1; l < 5; ++l)
        CHECK(h.taps[l] == std::exp(-1.5 * l) * mu0);
}

TEST_CASE("tapped delay line sampling")
{
    ChannelStatistics st;
    st.family = ChannelFamily::TappedDelayLine;
    st.taps = 1;
    st.delays = {0};
    st.powers = {1.0};
    st.k_factors = {1e12};
    RngStream rng(3);
    for (int i = 0; i < 10; ++i)
        CHECK(std::abs(sample_tdl(st, rng).taps[0] - 1.0) < 1e-5);

    const auto prof = parse_tdl_profile("name = \"t\"\ndelays_taps = [0, 2, 3]\npowers_db = [0, -3, -10]\n"
                                        "k_factors_db = [6, -inf, 0]\n");
    CHECK(prof.taps == 4);
    const int n = 100000;
    RealVector power(4, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto h = sample_tdl(prof, rng);
        for (int l = 0; l < 4; ++l)
            power[l] += std::norm(h.taps[l]) / n;
    }
    CHECK(power[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(power[1] == 0.0);
    CHECK(power[2] == doctest::Approx(std::pow(10.0, -0.3)).epsilon(0.05));
    CHECK(power[3] == doctest::Approx(0.1).epsilon(0.05));

    CHECK_THROWS_AS(sample_tdl(exp_pdp_statistics(3), rng), Error);
}

TEST_CASE("shipped CDL stand-in profiles")
{
    const auto d = load_tdl_profile(std::string(RCEQ_SOURCE_DIR) + "/profiles/cdl-d.toml");
    CHECK(d.name == "CDL-D");
    CHECK(d.taps == 14);
    const auto e = load_tdl_profile(std::string(RCEQ_SOURCE_DIR) + "/profiles/cdl-e.toml");
    CHECK(e.name == "CDL-E");
    CHECK(e.taps == 15);
    CHECK(e.k_factors[0] == doctest::Approx(10.0));
    CHECK(e.k_factors[1] == 0.0);
}

TEST_CASE("profile validation")
{
    auto bad = [](const std::string& text, bool json = false) {
        try {
            parse_tdl_profile(text, json);
        } catch (const Error& e) {
            return e.kind() == ErrorKind::BadProfile;
        }
        return false;
    };
    CHECK(bad("delays_taps = [0, 1]\npowers_db = [0]\nk_factors_db = [0, 0]\n"));
    CHECK(bad("taps = 2\ndelays_taps = [0, 5]\npowers_db = [0, -3]\nk_factors_db = [0, 0]\n"));
    CHECK(bad("delays_taps = [0]\npowers_db = [0]\n"));
    CHECK(bad(R"({"delays_taps": [0, 1], "powers_db": [0, -1], "k_factors_db": [0]})", true));
    const auto ok = parse_tdl_profile(R"({"name": "j", "delays_taps": [0, 1], "powers_db": [0, -1],
                                          "k_factors_db": [0, 0]})",
                                      true);
    CHECK(ok.taps == 2);
}

TEST_CASE("minimum phase verdicts")
{
    CHECK(is_minimum_phase({{1.0, 0.5}, {}}));
    CHECK_FALSE(is_minimum_phase({{0.5, 1.0}, {}}));
    CHECK_FALSE(is_minimum_phase({{0.0, 1.0}, {}}));
    CHECK(is_minimum_phase({{2.0}, {}}));

    // Oracle: zeros from Eigen's companion-matrix eigenvalues.
    RngStream rng(99);
    int min_phase = 0;
    const int draws = 300;
    for (int i = 0; i < draws; ++i) {
        const auto h = sample_exp_pdp(10, rng);
        const int deg = 9;
        EMat comp = EMat::Zero(deg, deg);
        for (int k = 0; k < deg; ++k)
            comp(0, k) = -h.taps[k + 1] / h.taps[0];
        for (int k = 1; k < deg; ++k)
            comp(k, k - 1) = 1.0;
        Eigen::ComplexEigenSolver<EMat> es(comp);
        const double rmax = es.eigenvalues().cwiseAbs().maxCoeff();
        if (std::abs(rmax - 1.0) > 1e-6)
            CHECK(is_minimum_phase(h) == (rmax < 1.0));
        min_phase += is_minimum_phase(h) ? 1 : 0;
    }
    MESSAGE("exp-PDP minimum-phase fraction: " << static_cast<double>(min_phase) / draws);
}

TEST_CASE("channel inverse frequency response")
{
    for (auto v : channel_inverse_freq({{1.0}, {}}, 8))
        CHECK(v == cplx(1.0));

    const auto v = channel_inverse_freq({{1.0, 0.5}, {}}, 4);
    for (int n = 0; n < 4; ++n) {
        const cplx direct = 1.0 / (1.0 + 0.5 * std::exp(cplx(0, -2.0 * std::numbers::pi * n / 4.0)));
        CHECK(std::abs(v[n] - direct) < 1e-14);
    }

    try {
        channel_inverse_freq({{1.0, -1.0}, {}}, 2);
        FAIL("expected SpectralNull");
    } catch (const SpectralNullError& e) {
        CHECK(e.kind() == ErrorKind::SpectralNull);
        CHECK(e.index() == 0);
    }

    RngStream rng(4);
    const auto h = sample_exp_pdp(10, rng);
    const auto inv = channel_inverse_freq(h, 64);
    const auto resp = dft_response(h.taps, 64);
    for (int n = 0; n < 64; ++n)
        CHECK(std::abs(inv[n] * resp[n] - 1.0) < 1e-10);
}

TEST_CASE("rejection sampling for minimum phase")
{
    const auto prof = load_tdl_profile(std::string(RCEQ_SOURCE_DIR) + "/profiles/cdl-e.toml");
    RngStream rng(12);
    std::size_t rejections = 0;
    for (int i = 0; i < 20; ++i)
        CHECK(is_minimum_phase(sample_min_phase(prof, rng, &rejections)));
    CHECK(rejections > 0);

    ChannelStatistics never;
    never.family = ChannelFamily::IidGaussian;
    never.taps = 2;
    never.means = {0.1, 1.0};
    never.variances = {0.0, 0.0};
    CHECK_THROWS_AS(sample_min_phase(never, rng, nullptr, 10), NoConvergenceError);
}

TEST_CASE("iid Gaussian statistics")
{
    const auto st = iid_gaussian_statistics(4, 0.05);
    CHECK(st.family == ChannelFamily::IidGaussian);
    CHECK(st.means[2] == std::exp(-3.0));
    CHECK(st.variances[3] == doctest::Approx(0.0025));
    RngStream rng(8);
    double var0 = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i)
        var0 += std::norm(sample_iid_gaussian(st, rng).taps[0] - 1.0) / n;
    CHECK(var0 == doctest::Approx(0.0025).epsilon(0.03));
}
