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

#include "rceq/experiment.hpp"
#include "rceq/toml_lite.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace rceq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt12(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Strict reader: every key of a table must be consumed.
class Table {
public:
    Table(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw Error(ErrorKind::ConfigError, "'" + path_ + "' must be a table");
    }

    bool has(const char* key) const { return j_.contains(key); }

    template <typename T>
    void get(const char* key, T& out)
    {
        if (!j_.contains(key))
            return;
        used_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::ConfigError, "bad value for '" + qualified(key) + "'");
        }
    }

    template <typename T>
    void get_opt(const char* key, std::optional<T>& out)
    {
        if (!j_.contains(key))
            return;
        T v{};
        get(key, v);
        out = v;
    }

    std::optional<Table> sub(const char* key)
    {
        if (!j_.contains(key))
            return std::nullopt;
        used_.insert(key);
        return Table(j_.at(key), qualified(key));
    }

    const json& raw(const char* key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw Error(ErrorKind::ConfigError, "unknown config key '" + qualified(it.key()) + "'");
    }

private:
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

ComplexMatrix columns(const ComplexMatrix& m, std::size_t first, std::size_t count)
{
    ComplexMatrix out(m.rows(), count);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < count; ++c)
            out(r, c) = m(r, first + c);
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& all_methods()
{
    static const std::vector<std::string> m{"esn-optimum", "esn-random", "zf-perfect", "ls-mmse", "mmse-mmse"};
    return m;
}

ExperimentConfig::ExperimentConfig()
{
    for (int i = 0; i <= 10; ++i)
        sweep.ebn0_db.push_back(2.5 * i);
    sweep.methods = all_methods();
}

void ExperimentConfig::validate() const
{
    auto positive = [](std::size_t v, const char* what) {
        if (v == 0)
            throw Error(ErrorKind::ConfigError, std::string(what) + " must be positive");
    };
    positive(workers, "workers");
    positive(channel.taps, "channel.taps");
    positive(basis.n_freq, "basis.n_freq");
    positive(basis.n_obs, "basis.n_obs");
    positive(basis.M, "basis.M");
    positive(fit.K, "fit.K");
    positive(sweep.trials, "sweep.trials");
    if (basis.M > basis.n_freq)
        throw Error(ErrorKind::ConfigError, "basis.M must not exceed basis.n_freq");
    if (fit.K_prime >= fit.K)
        throw Error(ErrorKind::ConfigError, "fit.K_prime must be smaller than fit.K");
    if (basis.n_freq < fit.K + fit.K_prime + 1)
        throw Error(ErrorKind::ConfigError, "basis.n_freq must be at least K + K' + 1");
    if (!(fit.rho_max > 0.0 && fit.rho_max < 1.0))
        throw Error(ErrorKind::ConfigError, "fit.rho_max must lie in (0, 1)");
    if (!(esn.spectral_radius > 0.0 && esn.spectral_radius < 1.0))
        throw Error(ErrorKind::ConfigError, "esn.spectral_radius must lie in (0, 1)");
    if (!(esn.sparsity >= 0.0 && esn.sparsity < 1.0))
        throw Error(ErrorKind::ConfigError, "esn.sparsity must lie in [0, 1)");
    if (esn.ridge && !(*esn.ridge >= 0.0))
        throw Error(ErrorKind::ConfigError, "esn.ridge must be non-negative");
    if (channel.family == ChannelFamily::TappedDelayLine && channel.profile.empty())
        throw Error(ErrorKind::ConfigError, "channel.profile is required for the tdl family");
    if (!(channel.sigma0 > 0.0))
        throw Error(ErrorKind::ConfigError, "channel.sigma0 must be positive");
    if (sweep.ebn0_db.empty())
        throw Error(ErrorKind::ConfigError, "sweep.ebn0_db must not be empty");
    if (!std::is_sorted(sweep.ebn0_db.begin(), sweep.ebn0_db.end()))
        throw Error(ErrorKind::ConfigError, "sweep.ebn0_db must be sorted");
    for (double e : sweep.ebn0_db)
        if (std::isnan(e))
            throw Error(ErrorKind::ConfigError, "sweep.ebn0_db contains NaN");
    if (sweep.methods.empty())
        throw Error(ErrorKind::ConfigError, "sweep.methods must not be empty");
    for (const auto& m : sweep.methods)
        if (std::find(all_methods().begin(), all_methods().end(), m) == all_methods().end())
            throw Error(ErrorKind::ConfigError, "unknown method '" + m + "'");
    if (rank.n_eps < 2)
        throw Error(ErrorKind::ConfigError, "rank.n_eps must be at least 2");
    try {
        ofdm.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, std::string("ofdm: ") + e.what());
    }
    const std::size_t washout = esn.washout.value_or(ofdm.cp_len);
    if (washout + esn.target_delay >= ofdm.n_pilot_syms * ofdm.symbol_len())
        throw Error(ErrorKind::ConfigError, "esn.washout leaves no pilot samples for training");
}

ExperimentConfig config_from_json(const json& tree, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    Table root(tree, "");
    root.get("name", cfg.name);
    root.get("workers", cfg.workers);

    if (auto t = root.sub("channel")) {
        std::string family = to_string(cfg.channel.family);
        t->get("family", family);
        cfg.channel.family = channel_family_from_string(family);
        t->get("taps", cfg.channel.taps);
        std::string profile;
        t->get("profile", profile);
        if (!profile.empty()) {
            std::filesystem::path p(profile);
            if (p.is_relative() && !base_dir.empty())
                p = base_dir / p;
            cfg.channel.profile = p.lexically_normal();
        }
        t->get("min_phase_only", cfg.channel.min_phase_only);
        t->get("sigma0", cfg.channel.sigma0);
        t->get("mean_decay", cfg.channel.mean_decay);
        t->get("pdp_mean_decay", cfg.channel.exp_pdp.mean_decay);
        t->get("pdp_variance_scale", cfg.channel.exp_pdp.variance_scale);
        t->get("pdp_variance_decay", cfg.channel.exp_pdp.variance_decay);
        if (t->has("fixed_taps")) {
            try {
                cfg.channel.fixed_taps = vector_from_json(t->raw("fixed_taps"));
            } catch (const Error& e) {
                throw Error(ErrorKind::ConfigError, std::string("channel.fixed_taps: ") + e.what());
            }
        }
        t->finish();
    }
    if (auto t = root.sub("basis")) {
        t->get("n_freq", cfg.basis.n_freq);
        t->get("n_obs", cfg.basis.n_obs);
        t->get("M", cfg.basis.M);
        t->get("centered", cfg.basis.centered);
        t->finish();
    }
    if (auto t = root.sub("fit")) {
        t->get("K", cfg.fit.K);
        cfg.fit.K_prime = cfg.fit.K - 1;
        t->get("K_prime", cfg.fit.K_prime);
        t->get("rho_max", cfg.fit.rho_max);
        t->finish();
    }
    if (auto t = root.sub("esn")) {
        std::string act = to_string(cfg.esn.activation);
        t->get("activation", act);
        cfg.esn.activation = activation_from_string(act);
        t->get("spectral_radius", cfg.esn.spectral_radius);
        t->get("sparsity", cfg.esn.sparsity);
        t->get_opt("ridge", cfg.esn.ridge);
        t->get_opt("washout", cfg.esn.washout);
        t->get("random_nodes", cfg.esn.random_nodes);
        t->get("target_delay", cfg.esn.target_delay);
        t->finish();
    }
    if (auto t = root.sub("ofdm")) {
        t->get("fft_size", cfg.ofdm.fft_size);
        t->get("cp_len", cfg.ofdm.cp_len);
        t->get("n_pilot_syms", cfg.ofdm.n_pilot_syms);
        t->get("n_data_syms", cfg.ofdm.n_data_syms);
        std::string c = to_string(cfg.ofdm.constellation);
        t->get("constellation", c);
        cfg.ofdm.constellation = constellation_from_string(c);
        t->finish();
    }
    if (auto t = root.sub("sweep")) {
        t->get("ebn0_db", cfg.sweep.ebn0_db);
        t->get("trials", cfg.sweep.trials);
        t->get("seed", cfg.sweep.seed);
        t->get("methods", cfg.sweep.methods);
        t->get("fixed_channel", cfg.sweep.fixed_channel);
        t->get("charge_cp", cfg.sweep.charge_cp);
        t->finish();
    }
    if (auto t = root.sub("rank")) {
        t->get("centered", cfg.rank.centered);
        t->get("min_phase_only", cfg.rank.min_phase_only);
        t->get("n_eps", cfg.rank.n_eps);
        t->get_opt("eps", cfg.rank.eps);
        t->finish();
    }
    root.finish();
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg)
{
    json j;
    j["name"] = cfg.name;
    j["workers"] = cfg.workers;
    auto& ch = j["channel"];
    ch["family"] = to_string(cfg.channel.family);
    ch["taps"] = cfg.channel.taps;
    ch["profile"] = cfg.channel.profile.generic_string();
    ch["min_phase_only"] = cfg.channel.min_phase_only;
    ch["sigma0"] = cfg.channel.sigma0;
    ch["mean_decay"] = cfg.channel.mean_decay;
    ch["pdp_mean_decay"] = cfg.channel.exp_pdp.mean_decay;
    ch["pdp_variance_scale"] = cfg.channel.exp_pdp.variance_scale;
    ch["pdp_variance_decay"] = cfg.channel.exp_pdp.variance_decay;
    if (cfg.channel.fixed_taps)
        ch["fixed_taps"] = vector_to_json(*cfg.channel.fixed_taps);
    j["basis"] = {{"n_freq", cfg.basis.n_freq}, {"n_obs", cfg.basis.n_obs}, {"M", cfg.basis.M},
                  {"centered", cfg.basis.centered}};
    j["fit"] = {{"K", cfg.fit.K}, {"K_prime", cfg.fit.K_prime}, {"rho_max", cfg.fit.rho_max}};
    auto& e = j["esn"];
    e["activation"] = to_string(cfg.esn.activation);
    e["spectral_radius"] = cfg.esn.spectral_radius;
    e["sparsity"] = cfg.esn.sparsity;
    if (cfg.esn.ridge)
        e["ridge"] = *cfg.esn.ridge;
    if (cfg.esn.washout)
        e["washout"] = *cfg.esn.washout;
    e["random_nodes"] = cfg.esn.random_nodes;
    e["target_delay"] = cfg.esn.target_delay;
    j["ofdm"] = {{"fft_size", cfg.ofdm.fft_size}, {"cp_len", cfg.ofdm.cp_len},
                 {"n_pilot_syms", cfg.ofdm.n_pilot_syms}, {"n_data_syms", cfg.ofdm.n_data_syms},
                 {"constellation", to_string(cfg.ofdm.constellation)}};
    j["sweep"] = {{"ebn0_db", cfg.sweep.ebn0_db}, {"trials", cfg.sweep.trials}, {"seed", cfg.sweep.seed},
                  {"methods", cfg.sweep.methods}, {"fixed_channel", cfg.sweep.fixed_channel},
                  {"charge_cp", cfg.sweep.charge_cp}};
    auto& r = j["rank"];
    r["centered"] = cfg.rank.centered;
    r["min_phase_only"] = cfg.rank.min_phase_only;
    r["n_eps"] = cfg.rank.n_eps;
    if (cfg.rank.eps)
        r["eps"] = *cfg.rank.eps;
    return j;
}

void apply_override(json& tree, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(ErrorKind::ConfigError, "override must look like key=value: '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    json value;
    try {
        value = parse_toml_value(assignment.substr(eq + 1));
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, "override '" + key + "': " + e.what());
    }
    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty())
            throw Error(ErrorKind::ConfigError, "empty path segment in '" + key + "'");
        if (!node->is_object())
            throw Error(ErrorKind::ConfigError, "'" + key + "' descends into a non-table value");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null())
            *node = json::object();
        start = dot + 1;
    }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    json tree = json::object();
    std::filesystem::path base;
    if (!path.empty()) {
        const std::string text = read_text_file(path);
        try {
            tree = path.extension() == ".json" ? json::parse(text) : parse_toml_lite(text);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
        }
        base = path.parent_path();
    }
    for (const auto& o : overrides)
        apply_override(tree, o);
    return config_from_json(tree, base);
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& cfg)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_to_json(cfg).dump())));
    return buf;
}

// ---------------------------------------------------------------------------

void RunManifest::warn(const std::string& what, std::size_t count)
{
    warnings[what] += count;
}

void RunManifest::add_stage(const std::string& stage, double seconds)
{
    stage_seconds.emplace_back(stage, seconds);
}

json RunManifest::to_json() const
{
    json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    json stages = json::array();
    for (const auto& [name, secs] : stage_seconds)
        stages.push_back({{"stage", name}, {"seconds", secs}});
    j["stages"] = std::move(stages);
    j["warnings"] = json::object();
    for (const auto& [name, count] : warnings)
        j["warnings"][name] = count;
    return j;
}

StageError::StageError(std::string stage, const Error& inner)
    : Error(inner.kind(), "[" + stage + "] " + inner.message()), stage_(std::move(stage))
{
}

namespace {

template <typename F>
auto staged(const char* stage, RunManifest& manifest, F&& fn) -> decltype(fn())
{
    const auto t0 = Clock::now();
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            manifest.add_stage(stage, seconds_since(t0));
        } else {
            auto r = fn();
            manifest.add_stage(stage, seconds_since(t0));
            return r;
        }
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

} // namespace

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn)
{
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers)
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

ChannelStatistics channel_statistics(const ExperimentConfig& cfg)
{
    switch (cfg.channel.family) {
    case ChannelFamily::ExpPdp: return exp_pdp_statistics(cfg.channel.taps, cfg.channel.exp_pdp);
    case ChannelFamily::IidGaussian:
        return iid_gaussian_statistics(cfg.channel.taps, cfg.channel.sigma0, cfg.channel.mean_decay);
    case ChannelFamily::TappedDelayLine: return load_tdl_profile(cfg.channel.profile);
    }
    throw Error(ErrorKind::ConfigError, "unknown channel family");
}

// ---------------------------------------------------------------------------

DeriveResult derive_weights(const ExperimentConfig& cfg, RunManifest& manifest)
{
    cfg.validate();
    const auto t_start = Clock::now();
    manifest.seed = cfg.sweep.seed;
    manifest.config_hash = config_hash(cfg);

    const ChannelStatistics stats = staged("channel", manifest, [&] { return channel_statistics(cfg); });

    EnsembleOptions eo;
    eo.n_freq = cfg.basis.n_freq;
    eo.n_obs = cfg.basis.n_obs;
    eo.min_phase_only = cfg.channel.min_phase_only;
    eo.workers = cfg.workers;
    EnsembleCounters counters;
    const RngStream rng = RngStream(cfg.sweep.seed).split(0xba515);
    const CovarianceEstimate cov = staged("covariance", manifest, [&] {
        return inverse_covariance(stats, rng, eo, cfg.basis.centered, &counters);
    });
    if (counters.min_phase_rejections)
        manifest.warn("min_phase_rejections", counters.min_phase_rejections);
    if (cov.undersampled)
        manifest.warn("undersampled_covariance");

    DeriveResult out;
    out.basis = staged("basis", manifest, [&] { return optimum_basis(cov, cfg.basis.M); });

    const std::size_t M = cfg.basis.M;
    std::vector<std::optional<RationalApprox>> fits(M);
    out.raw_poles.assign(M, {});
    RatfitOptions ro;
    ro.rho_max = cfg.fit.rho_max;
    staged("rational_fit", manifest, [&] {
        parallel_for(M, cfg.workers, [&](std::size_t m) {
            const ComplexVector f = out.basis.F.col(m);
            fits[m] = fit_rational(f, cfg.fit.K, cfg.fit.K_prime, ro);
        });
    });
    staged("partial_fractions", manifest, [&] {
        for (std::size_t m = 0; m < M; ++m)
            out.raw_poles[m] = partial_fractions(*fits[m], ro);
    });

    std::vector<PoleResidueSet> stable(M);
    staged("stabilize", manifest, [&] {
        for (std::size_t m = 0; m < M; ++m)
            stable[m] = stabilize_poles(out.raw_poles[m], cfg.fit.rho_max);
    });
    std::size_t clamps = 0, fallbacks = 0, perturbed = 0;
    for (std::size_t m = 0; m < M; ++m) {
        clamps += stable[m].stabilized_count();
        fallbacks += fits[m]->used_ridge_fallback ? 1 : 0;
        perturbed += stable[m].perturbed ? 1 : 0;
    }
    if (clamps)
        manifest.warn("pole_clamps", clamps);
    if (fallbacks)
        manifest.warn("ridge_fallbacks", fallbacks);
    if (perturbed)
        manifest.warn("perturbed_pole_sets", perturbed);

    out.weights.rho_max = cfg.fit.rho_max;
    out.weights.model = staged("assemble", manifest, [&] {
        return init_optimum(stable, cfg.fit.rho_max, cfg.esn.activation);
    });
    for (std::size_t m = 0; m < M; ++m)
        out.weights.entries.push_back({*fits[m], stable[m]});
    manifest.wall_seconds += seconds_since(t_start);
    return out;
}

std::string fit_error_csv(const DeriveResult& result)
{
    std::string s = "m,K,K_prime,fit_error,stabilized_poles,ridge_fallback\n";
    for (std::size_t m = 0; m < result.weights.entries.size(); ++m) {
        const auto& e = result.weights.entries[m];
        s += std::to_string(m) + "," + std::to_string(e.fit.order()) + "," +
             std::to_string(e.fit.numerator_order()) + "," + fmt12(e.fit.fit_error()) + "," +
             std::to_string(e.poles.stabilized_count()) + "," + (e.fit.used_ridge_fallback ? "1" : "0") + "\n";
    }
    return s;
}

// ---------------------------------------------------------------------------

namespace {

struct TrialOutput {
    std::vector<SerResult> rows;
    std::size_t rejections = 0;
};

} // namespace

std::vector<SerResult> run_ser(const ExperimentConfig& cfg, const EsnModel* optimum, RunManifest& manifest)
{
    cfg.validate();
    const auto t_start = Clock::now();
    manifest.seed = cfg.sweep.seed;
    manifest.config_hash = config_hash(cfg);

    const auto& methods = cfg.sweep.methods;
    auto wants = [&](const char* m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
    if (wants("esn-optimum") && !optimum)
        throw StageError("setup", Error(ErrorKind::ConfigError, "esn-optimum requires a weight file"));
    if (optimum && optimum->init_kind != InitKind::Optimum)
        throw StageError("setup", Error(ErrorKind::ConfigError, "weight file does not hold an optimum model"));

    std::optional<ChannelStatistics> stats;
    if (!cfg.channel.fixed_taps)
        stats = staged("channel", manifest, [&] { return channel_statistics(cfg); });
    const std::size_t max_taps = cfg.channel.fixed_taps ? cfg.channel.fixed_taps->size() : stats->taps;
    if (cfg.ofdm.cp_len + 1 < max_taps)
        manifest.warn("cp_shorter_than_channel");

    const std::size_t random_nodes =
        cfg.esn.random_nodes ? cfg.esn.random_nodes : (optimum ? optimum->n_nodes() : cfg.basis.M * cfg.fit.K);
    EsnEqualizeOptions eq_opts;
    eq_opts.washout = cfg.esn.washout;
    eq_opts.ridge = cfg.esn.ridge;
    eq_opts.target_delay = cfg.esn.target_delay;

    const OfdmConfig& oc = cfg.ofdm;
    std::vector<TrialOutput> trials(cfg.sweep.trials);

    auto run_trial = [&](std::size_t t) {
        const std::uint64_t seed = cfg.sweep.seed + t;
        const RngStream root(seed);
        TrialOutput& out = trials[t];

        ChannelRealization h;
        if (cfg.channel.fixed_taps) {
            h.taps = *cfg.channel.fixed_taps;
        } else {
            RngStream ch_rng = cfg.sweep.fixed_channel ? RngStream(cfg.sweep.seed).split(0) : root.split(0);
            h = cfg.channel.min_phase_only ? sample_min_phase(*stats, ch_rng, &out.rejections)
                                           : sample_channel(*stats, ch_rng);
        }
        RngStream sf_rng = root.split(1);
        const Subframe sf = build_subframe(oc, sf_rng);
        RngStream noise_rng = root.split(2);
        ComplexVector unit_noise(sf.tx_time.size());
        for (auto& z : unit_noise)
            z = noise_rng.complex_normal(1.0);
        std::optional<EsnModel> random_model;
        if (wants("esn-random")) {
            RngStream res_rng = root.split(3);
            random_model = init_random(random_nodes, 1, 1, cfg.esn.spectral_radius, cfg.esn.sparsity, res_rng,
                                       cfg.esn.activation);
        }

        const ComplexVector clean = convolve_truncated(sf.tx_time, h);
        const double es = average_power(sf.tx_time);
        for (double ebn0 : cfg.sweep.ebn0_db) {
            const double nv = ebn0_to_noise_var(ebn0, oc.constellation, es, cfg.sweep.charge_cp ? &oc : nullptr);
            const double amp = std::sqrt(nv);
            ComplexVector rx(clean.size());
            for (std::size_t n = 0; n < rx.size(); ++n)
                rx[n] = clean[n] + amp * unit_noise[n];
            const ComplexMatrix grid = ofdm_demodulate(rx, oc, 0, oc.n_symbols());
            const ComplexMatrix rx_pilot = columns(grid, 0, oc.n_pilot_syms);
            const ComplexMatrix rx_data = columns(grid, oc.n_pilot_syms, oc.n_data_syms);

            for (const auto& method : methods) {
                IndexGrid decisions;
                if (method == "esn-optimum")
                    decisions = esn_equalize(*optimum, sf, rx, oc, eq_opts).decisions;
                else if (method == "esn-random")
                    decisions = esn_equalize(*random_model, sf, rx, oc, eq_opts).decisions;
                else if (method == "zf-perfect")
                    decisions = zf_perfect_csi(rx_data, h, oc);
                else if (method == "ls-mmse")
                    decisions = mmse_equalize(rx_data, ls_estimate(rx_pilot, sf.pilot_grid), nv, oc.constellation);
                else
                    decisions = mmse_equalize(rx_data, mmse_estimate(rx_pilot, sf.pilot_grid, nv), nv,
                                              oc.constellation);
                SerResult r = measure_ser(decisions, sf.data_indices);
                r.method = method;
                r.ebn0_db = ebn0;
                r.seed = seed;
                out.rows.push_back(std::move(r));
            }
        }
    };

    staged("trials", manifest, [&] { parallel_for(cfg.sweep.trials, cfg.workers, run_trial); });

    std::vector<SerResult> rows;
    std::size_t rejections = 0;
    for (auto& t : trials) {
        rejections += t.rejections;
        for (auto& r : t.rows)
            rows.push_back(std::move(r));
    }
    if (rejections)
        manifest.warn("min_phase_rejections", rejections);
    std::map<std::string, std::size_t> order;
    for (std::size_t i = 0; i < methods.size(); ++i)
        order[methods[i]] = i;
    std::stable_sort(rows.begin(), rows.end(), [&](const SerResult& a, const SerResult& b) {
        if (order[a.method] != order[b.method])
            return order[a.method] < order[b.method];
        if (a.ebn0_db != b.ebn0_db)
            return a.ebn0_db < b.ebn0_db;
        return a.seed < b.seed;
    });
    manifest.wall_seconds += seconds_since(t_start);
    return rows;
}

std::string ser_csv(const std::vector<SerResult>& rows)
{
    std::string s = "method,ebn0_db,seed,n_symbols,n_errors,ser\n";
    for (const auto& r : rows)
        s += r.method + "," + fmt12(r.ebn0_db) + "," + std::to_string(r.seed) + "," + std::to_string(r.n_symbols) +
             "," + std::to_string(r.n_errors) + "," + fmt12(r.ser) + "\n";
    return s;
}

namespace {

template <typename T>
T parse_field(const std::string& s, std::size_t line, const char* what)
{
    T v{};
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e)
        throw Error(ErrorKind::SchemaError, "line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
    return v;
}

} // namespace

std::vector<SerResult> parse_ser_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::SchemaError, "empty CSV");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "method,ebn0_db,seed,n_symbols,n_errors,ser")
        throw Error(ErrorKind::SchemaError, "unexpected CSV header '" + line + "'");
    std::vector<SerResult> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (f.size() != 6)
            throw Error(ErrorKind::SchemaError, "line " + std::to_string(lineno) + ": expected 6 fields");
        SerResult r;
        r.method = f[0];
        if (r.method.empty())
            throw Error(ErrorKind::SchemaError, "line " + std::to_string(lineno) + ": empty method");
        r.ebn0_db = parse_field<double>(f[1], lineno, "ebn0_db");
        r.seed = parse_field<std::uint64_t>(f[2], lineno, "seed");
        r.n_symbols = parse_field<std::size_t>(f[3], lineno, "n_symbols");
        r.n_errors = parse_field<std::size_t>(f[4], lineno, "n_errors");
        r.ser = parse_field<double>(f[5], lineno, "ser");
        if (r.n_errors > r.n_symbols || !(r.ser >= 0.0 && r.ser <= 1.0))
            throw Error(ErrorKind::SchemaError, "line " + std::to_string(lineno) + ": inconsistent counts");
        rows.push_back(std::move(r));
    }
    if (rows.empty())
        throw Error(ErrorKind::SchemaError, "CSV has no data rows");
    return rows;
}

std::map<std::string, std::map<double, SerPoint>> aggregate_ser(const std::vector<SerResult>& rows)
{
    std::map<std::string, std::map<double, SerPoint>> out;
    for (const auto& r : rows) {
        auto& p = out[r.method][r.ebn0_db];
        p.n_symbols += r.n_symbols;
        p.n_errors += r.n_errors;
    }
    return out;
}

namespace {

std::string xml_escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_ser_svg(const std::vector<SerResult>& rows, const std::string& title)
{
    if (rows.empty())
        throw Error(ErrorKind::SchemaError, "nothing to plot");
    const auto agg = aggregate_ser(rows);

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_min = 1.0;
    for (const auto& [m, pts] : agg)
        for (const auto& [x, p] : pts) {
            if (!std::isfinite(x))
                continue;
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            if (p.ser() > 0.0)
                y_min = std::min(y_min, p.ser());
        }
    if (!std::isfinite(x_lo))
        throw Error(ErrorKind::SchemaError, "no finite Eb/N0 values to plot");
    if (x_hi == x_lo) {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    const int dec_lo = std::min(-1, static_cast<int>(std::floor(std::log10(y_min))) - (y_min >= 1.0 ? 1 : 0));

    const double W = 720, H = 480, L = 80, R = 180, T = 40, B = 60;
    const double pw = W - L - R, ph = H - T - B;
    auto px = [&](double x) { return L + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double ser) {
        const double lg = ser > 0.0 ? std::log10(ser) : static_cast<double>(dec_lo);
        return T + (0.0 - std::max(lg, static_cast<double>(dec_lo))) / (0.0 - dec_lo) * ph;
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << num(L + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
    for (int d = dec_lo; d <= 0; ++d) {
        const double y = py(std::pow(10.0, d));
        s << "<line x1=\"" << num(L) << "\" y1=\"" << num(y) << "\" x2=\"" << num(L + pw) << "\" y2=\"" << num(y)
          << "\" stroke=\"#dddddd\"/>\n";
        s << "<text x=\"" << num(L - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e" << d
          << "</text>\n";
    }
    const double step = (x_hi - x_lo) / 5.0;
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_lo + step * i;
        s << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(T) << "\" x2=\"" << num(px(xv)) << "\" y2=\""
          << num(T + ph) << "\" stroke=\"#eeeeee\"/>\n";
        s << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(T + ph + 18) << "\" text-anchor=\"middle\">"
          << fmt12(std::round(xv * 100.0) / 100.0) << "</text>\n";
    }
    s << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(L + pw / 2) << "\" y=\"" << num(H - 16) << "\" text-anchor=\"middle\">Eb/N0 (dB)</text>\n";
    s << "<text x=\"20\" y=\"" << num(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << num(T + ph / 2) << ")\">SER</text>\n";

    std::size_t idx = 0;
    for (const auto& [method, pts] : agg) {
        const char* color = palette[idx % 10];
        std::string path;
        for (const auto& [x, p] : pts) {
            if (!std::isfinite(x))
                continue;
            path += (path.empty() ? "M" : " L") + num(px(x)) + " " + num(py(p.ser()));
        }
        if (path.find('L') != std::string::npos)
            s << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        for (const auto& [x, p] : pts) {
            if (!std::isfinite(x))
                continue;
            s << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(p.ser())) << "\" r=\"3\" fill=\""
              << (p.n_errors ? color : "white") << "\" stroke=\"" << color << "\"/>\n";
        }
        const double ly = T + 16 + 18.0 * static_cast<double>(idx);
        s << "<line x1=\"" << num(L + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(L + pw + 36)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << num(L + pw + 42) << "\" y=\"" << num(ly + 4) << "\">" << xml_escape(method) << "</text>\n";
        ++idx;
    }
    s << "</svg>\n";
    return s.str();
}

// ---------------------------------------------------------------------------

RankReport verify_rank(const ExperimentConfig& cfg, RunManifest& manifest)
{
    cfg.validate();
    if (cfg.channel.family != ChannelFamily::IidGaussian)
        throw StageError("setup", Error(ErrorKind::ConfigError, "verify-rank needs channel.family = iid_gaussian"));
    const auto t_start = Clock::now();
    manifest.seed = cfg.sweep.seed;
    manifest.config_hash = config_hash(cfg);

    const ChannelStatistics stats = channel_statistics(cfg);
    EnsembleOptions eo;
    eo.n_freq = cfg.basis.n_freq;
    eo.n_obs = cfg.basis.n_obs;
    eo.min_phase_only = cfg.rank.min_phase_only;
    eo.workers = cfg.workers;
    EnsembleCounters counters;
    const RngStream rng = RngStream(cfg.sweep.seed).split(0x4a4e);
    const CovarianceEstimate cov = staged("covariance", manifest, [&] {
        return inverse_covariance(stats, rng, eo, cfg.rank.centered, &counters);
    });
    if (counters.min_phase_rejections)
        manifest.warn("min_phase_rejections", counters.min_phase_rejections);
    if (cov.undersampled)
        manifest.warn("undersampled_covariance");

    RankReport rep;
    rep.n_obs = cov.n_obs;
    rep.spectrum = staged("eigen", manifest, [&] { return sym_eig(cov.sigma).eigenvalues; });
    rep.predicted = 4 * (cfg.channel.taps + 1);
    if (rep.predicted < rep.spectrum.size())
        rep.plateau_ratio = rep.spectrum[rep.predicted - 1] / rep.spectrum[rep.predicted];

    const double s0 = cfg.channel.sigma0;
    const double lo = std::log(std::pow(s0, 6)), hi = std::log(s0 * s0);
    for (std::size_t i = 0; i < cfg.rank.n_eps; ++i) {
        const double eps = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.rank.n_eps - 1));
        rep.eps_grid.emplace_back(eps, epsilon_rank(rep.spectrum, eps));
    }
    rep.default_eps = cfg.rank.eps.value_or(10.0 * std::pow(s0, 4) * rep.spectrum.front());
    rep.default_rank = epsilon_rank(rep.spectrum, rep.default_eps);
    manifest.wall_seconds += seconds_since(t_start);
    return rep;
}

std::string spectrum_csv(const RankReport& report)
{
    std::string s = "index,eigenvalue\n";
    for (std::size_t i = 0; i < report.spectrum.size(); ++i)
        s += std::to_string(i + 1) + "," + fmt12(report.spectrum[i]) + "\n";
    return s;
}

json rank_to_json(const RankReport& report)
{
    json j;
    j["predicted_rank"] = report.predicted;
    j["plateau_ratio"] = report.plateau_ratio;
    j["default_eps"] = report.default_eps;
    j["default_rank"] = report.default_rank;
    j["n_obs"] = report.n_obs;
    json grid = json::array();
    for (const auto& [eps, rank] : report.eps_grid)
        grid.push_back({{"eps", eps}, {"rank", rank}});
    j["eps_grid"] = std::move(grid);
    return j;
}

} // namespace rceq
