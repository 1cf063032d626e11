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

#include "rceq/experiment.hpp"
#include "rceq/toml_lite.hpp"
#include "test_util.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>

using namespace rceq;
using namespace rceq::test;

namespace {

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no exception");
    return ErrorKind::InvalidArgument;
}

ExperimentConfig tiny_config()
{
    return load_config({}, {"basis.n_freq=32", "basis.n_obs=400", "basis.M=3", "fit.K=4", "ofdm.fft_size=64",
                            "ofdm.cp_len=16", "ofdm.n_pilot_syms=2", "ofdm.n_data_syms=3", "sweep.trials=2",
                            "sweep.ebn0_db=[10, 20]"});
}

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("rceq_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("TOML subset reader")
{
    const auto j = parse_toml_lite(R"(# comment
name = "a \"q\" b"   # trailing
top.dotted = 3
[channel]
taps = 10
ratio = -2.5e-1
flag = true
neg = -inf
list = [ 1, 2,
         3, ]   # multi-line
[sweep.inner]
names = ["x", 'y']
)");
    CHECK(j["name"] == "a \"q\" b");
    CHECK(j["top"]["dotted"] == 3);
    CHECK(j["channel"]["taps"] == 10);
    CHECK(j["channel"]["ratio"].get<double>() == -0.25);
    CHECK(j["channel"]["flag"] == true);
    CHECK(std::isinf(j["channel"]["neg"].get<double>()));
    CHECK(j["channel"]["list"] == json::array({1, 2, 3}));
    CHECK(j["sweep"]["inner"]["names"] == json::array({"x", "y"}));

    CHECK_THROWS_AS(parse_toml_lite("a = 1\na = 2\n"), Error);
    CHECK_THROWS_AS(parse_toml_lite("a = [1, 2\n"), Error);
    CHECK_THROWS_AS(parse_toml_lite("= 3\n"), Error);
    CHECK_THROWS_AS(parse_toml_lite("a = \"open\n"), Error);

    CHECK(parse_toml_value("12") == 12);
    CHECK(parse_toml_value("1.5") == 1.5);
    CHECK(parse_toml_value("[1, 2]") == json::array({1, 2}));
    CHECK(parse_toml_value("qam64") == "qam64");
    CHECK(parse_toml_value("false") == false);
}

TEST_CASE("config defaults and strict keys")
{
    const auto cfg = load_config({});
    CHECK(cfg.basis.M == 10);
    CHECK(cfg.fit.K == 10);
    CHECK(cfg.fit.K_prime == 9);
    CHECK(cfg.ofdm.fft_size == 256);
    CHECK(cfg.ofdm.cp_len == 40);
    CHECK(cfg.sweep.ebn0_db.size() == 11);
    CHECK(cfg.sweep.methods == all_methods());

    CHECK(kind_of([] { load_config({}, {"basis.bogus=1"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_config({}, {"nonsense"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_config({}, {"fit.K=3", "fit.K_prime=3"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_config({}, {"sweep.methods=[\"esn-magic\"]"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_config({}, {"ofdm.constellation=qam8"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_config({}, {"channel.family=tdl"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_config("/nonexistent/x.toml"); }) == ErrorKind::ConfigError);

    const auto k6 = load_config({}, {"fit.K=6"});
    CHECK(k6.fit.K_prime == 5);
}

TEST_CASE("config serialization round trip and hashing")
{
    auto cfg = tiny_config();
    cfg.channel.fixed_taps = ComplexVector{1.0, cplx(0.1, 0.2)};
    cfg.esn.ridge = 1e-4;
    const auto back = config_from_json(config_to_json(cfg));
    CHECK(config_hash(back) == config_hash(cfg));
    CHECK(back.channel.fixed_taps == cfg.channel.fixed_taps);
    auto other = cfg;
    other.sweep.seed = 2;
    CHECK(config_hash(other) != config_hash(cfg));
    CHECK(config_hash(cfg).size() == 16);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("TOML config files with relative profile paths")
{
    const auto dir = scratch("cfg");
    std::filesystem::create_directories(dir / "profiles");
    write_text_file(dir / "profiles" / "p.toml",
                    "name = \"p\"\ndelays_taps = [0, 1]\npowers_db = [0, -3]\nk_factors_db = [-inf, -inf]\n");
    write_text_file(dir / "exp.toml", "name = \"rel\"\n[channel]\nfamily = \"tdl\"\nprofile = \"profiles/p.toml\"\n"
                                      "[ofdm]\nconstellation = \"qpsk\"\n");
    const auto cfg = load_config(dir / "exp.toml", {"sweep.seed=9"});
    CHECK(cfg.name == "rel");
    CHECK(cfg.channel.profile == (dir / "profiles" / "p.toml").lexically_normal());
    CHECK(cfg.sweep.seed == 9);
    CHECK(channel_statistics(cfg).taps == 2);

    write_text_file(dir / "exp.json", R"({"name": "j", "basis": {"M": 4}})");
    CHECK(load_config(dir / "exp.json").basis.M == 4);
    write_text_file(dir / "bad.json", "{nope");
    CHECK(kind_of([&] { load_config(dir / "bad.json"); }) == ErrorKind::ConfigError);
}

TEST_CASE("json helpers and weight files")
{
    RngStream rng(30);
    const auto m = random_complex(3, 4, rng);
    CHECK(matrix_from_json(matrix_to_json(m)).data() == m.data());
    CHECK(complex_from_json(complex_to_json(cplx(1.5, -2))) == cplx(1.5, -2));
    CHECK_THROWS_AS(complex_from_json(json::array({1})), Error);

    const auto dir = scratch("io");
    write_text_file(dir / "broken.json", "[1, 2");
    CHECK(kind_of([&] { read_json_file(dir / "broken.json"); }) == ErrorKind::SchemaError);
    CHECK_THROWS_AS(read_text_file(dir / "missing.json"), Error);

    const auto model = init_random(6, 1, 1, 0.4, 0.5, rng);
    const auto back = model_from_json(model_to_json(model));
    CHECK(back.w_res.data() == model.w_res.data());
    CHECK(back.w_in.data() == model.w_in.data());
    CHECK(back.activation == model.activation);
}

TEST_CASE("derive_weights: shapes, determinism, serialization")
{
    const auto cfg = tiny_config();
    RunManifest man1, man2;
    const auto a = derive_weights(cfg, man1);
    CHECK(a.basis.F.cols() == 3);
    CHECK(a.weights.entries.size() == 3);
    CHECK(a.weights.model.n_nodes() == 12);
    CHECK(a.weights.model.diagonal_reservoir());
    for (const auto& e : a.weights.entries)
        for (auto p : e.poles.poles)
            CHECK(std::abs(p) <= cfg.fit.rho_max + 1e-15);

    auto cfg4 = cfg;
    cfg4.workers = 4;
    const auto b = derive_weights(cfg4, man2);
    CHECK(b.weights.model.w_res.data() == a.weights.model.w_res.data());
    CHECK(b.weights.model.w_in.data() == a.weights.model.w_in.data());

    const auto wf = weights_from_json(weights_to_json(a.weights));
    CHECK(wf.model.w_in.data() == a.weights.model.w_in.data());
    CHECK(wf.entries.size() == 3);
    CHECK(wf.entries[1].fit.denominator() == a.weights.entries[1].fit.denominator());

    const auto basis = basis_from_json(basis_to_json(a.basis));
    CHECK(basis.F.data() == a.basis.F.data());
    CHECK(basis.eigenvalues == a.basis.eigenvalues);
    CHECK(kind_of([] { basis_from_json(json{{"format", "other"}}); }) == ErrorKind::SchemaError);

    const auto csv = fit_error_csv(a);
    CHECK(csv.rfind("m,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    const auto mj = man1.to_json();
    CHECK(mj["stages"].size() >= 5);
    CHECK(mj["tool_version"] == kToolVersion);
}

TEST_CASE("run_ser: ordering, determinism, worker invariance")
{
    auto cfg = tiny_config();
    RunManifest man;
    const auto w = derive_weights(cfg, man);
    const auto rows = run_ser(cfg, &w.weights.model, man);
    REQUIRE(rows.size() == all_methods().size() * 2 * 2);
    CHECK(rows[0].method == all_methods()[0]);
    CHECK(rows[0].ebn0_db == 10.0);
    CHECK(rows[0].seed == cfg.sweep.seed);
    CHECK(rows[1].seed == cfg.sweep.seed + 1);
    CHECK(rows.back().method == all_methods().back());
    for (const auto& r : rows)
        CHECK(r.n_symbols == 64 * 3);

    cfg.workers = 3;
    const auto again = run_ser(cfg, &w.weights.model, man);
    CHECK(ser_csv(again) == ser_csv(rows));

    cfg.sweep.methods = {"esn-optimum"};
    try {
        run_ser(cfg, nullptr, man);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }

    const auto parsed = parse_ser_csv(ser_csv(rows));
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(parsed[i].method == rows[i].method);
        CHECK(parsed[i].n_errors == rows[i].n_errors);
        CHECK(parsed[i].ser == doctest::Approx(rows[i].ser).epsilon(1e-11));
    }
    const auto agg = aggregate_ser(rows);
    CHECK(agg.size() == all_methods().size());
    CHECK(agg.at("zf-perfect").at(10.0).n_symbols == 2 * 64 * 3);
}

TEST_CASE("fixed channel and noiseless sweeps")
{
    auto cfg = tiny_config();
    cfg.channel.fixed_taps = ComplexVector{1.0};
    cfg.sweep.ebn0_db = {std::numeric_limits<double>::infinity()};
    cfg.sweep.methods = {"zf-perfect", "ls-mmse", "mmse-mmse"};
    RunManifest man;
    for (const auto& r : run_ser(cfg, nullptr, man))
        CHECK(r.n_errors == 0);
}

TEST_CASE("CSV schema errors")
{
    CHECK(kind_of([] { parse_ser_csv("a,b\n1,2\n"); }) == ErrorKind::SchemaError);
    CHECK(kind_of([] { parse_ser_csv("method,ebn0_db,seed,n_symbols,n_errors,ser\n"); }) == ErrorKind::SchemaError);
    CHECK(kind_of([] { parse_ser_csv("method,ebn0_db,seed,n_symbols,n_errors,ser\nx,1,2\n"); }) ==
          ErrorKind::SchemaError);
    CHECK(kind_of([] { parse_ser_csv("method,ebn0_db,seed,n_symbols,n_errors,ser\nx,a,1,1,1,1\n"); }) ==
          ErrorKind::SchemaError);
}

TEST_CASE("SVG rendering")
{
    std::vector<SerResult> rows{{"zf-perfect", 0.0, 1, 100, 10, 0.1}, {"zf-perfect", 10.0, 1, 100, 0, 0.0},
                                {"ls-mmse", 0.0, 1, 100, 20, 0.2}};
    const auto svg = render_ser_svg(rows, "t & <x>");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("t &amp; &lt;x&gt;") != std::string::npos);
    CHECK(svg.find("zf-perfect") != std::string::npos);
}

TEST_CASE("rank report on a small iid ensemble")
{
    auto cfg = load_config({}, {"channel.family=iid_gaussian", "channel.taps=3", "basis.n_freq=32",
                                "basis.n_obs=3000", "fit.K=4"});
    RunManifest man;
    const auto rep = verify_rank(cfg, man);
    CHECK(rep.predicted == 16);
    CHECK(rep.spectrum.size() == 64);
    CHECK(std::is_sorted(rep.spectrum.rbegin(), rep.spectrum.rend()));
    CHECK(rep.eps_grid.size() == cfg.rank.n_eps);
    for (std::size_t i = 1; i < rep.eps_grid.size(); ++i)
        CHECK(rep.eps_grid[i].second <= rep.eps_grid[i - 1].second);
    CHECK(rep.plateau_ratio == doctest::Approx(rep.spectrum[15] / rep.spectrum[16]));
    CHECK(spectrum_csv(rep).rfind("index,eigenvalue", 0) == 0);
    CHECK(rank_to_json(rep)["predicted_rank"] == 16);

    auto wrong = cfg;
    wrong.channel.family = ChannelFamily::ExpPdp;
    CHECK_THROWS_AS(verify_rank(wrong, man), Error);
}

TEST_CASE("stage errors and parallel_for")
{
    const StageError e("basis", Error(ErrorKind::SingularSystem, "boom"));
    CHECK(std::string(e.what()) == "SingularSystem: [basis] boom");
    CHECK(e.message() == "[basis] boom");
    CHECK(e.stage() == "basis");
    CHECK(e.kind() == ErrorKind::SingularSystem);

    std::atomic<int> sum{0};
    parallel_for(100, 4, [&](std::size_t i) { sum += static_cast<int>(i); });
    CHECK(sum == 4950);
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 7)
                                         throw Error(ErrorKind::InvalidArgument, "x");
                                 }),
                    Error);
}
