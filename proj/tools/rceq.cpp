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
//
// rceq derive-weights | run-ser | verify-rank | plot

#include "rceq/experiment.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace rceq;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string weights;
    std::optional<std::size_t> workers;
    std::vector<std::string> sets;
};

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("rceq");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("RC_EQ_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

ExperimentConfig resolve_config(const CommonOptions& opt)
{
    std::vector<std::string> overrides = opt.sets;
    if (opt.seed)
        overrides.push_back("sweep.seed=" + std::to_string(*opt.seed));
    if (opt.workers)
        overrides.push_back("workers=" + std::to_string(*opt.workers));
    ExperimentConfig cfg = load_config(opt.config, overrides);
    spdlog::info("config '{}' hash {}", cfg.name, config_hash(cfg));
    return cfg;
}

void log_warnings(const RunManifest& manifest)
{
    for (const auto& [what, count] : manifest.warnings)
        spdlog::warn("{}: {}", what, count);
}

void write_manifest(const fs::path& dir, RunManifest& manifest)
{
    write_json_file(dir / "manifest.json", manifest.to_json());
}

int cmd_derive(const CommonOptions& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    RunManifest manifest;
    manifest.command = "derive-weights";
    const DeriveResult res = derive_weights(cfg, manifest);
    const fs::path dir(opt.out);
    write_json_file(dir / "weights.json", weights_to_json(res.weights));
    write_json_file(dir / "basis.json", basis_to_json(res.basis));
    write_text_file(dir / "fit_errors.csv", fit_error_csv(res));
    write_manifest(dir, manifest);
    for (std::size_t m = 0; m < res.weights.entries.size(); ++m)
        spdlog::info("m={} K={} fit_error={:.3e}", m, res.weights.entries[m].fit.order(),
                     res.weights.entries[m].fit.fit_error());
    log_warnings(manifest);
    spdlog::info("wrote {} (N_nodes = {})", (dir / "weights.json").string(), res.weights.model.n_nodes());
    return 0;
}

int cmd_run_ser(const CommonOptions& opt, bool plot)
{
    const ExperimentConfig cfg = resolve_config(opt);
    RunManifest manifest;
    manifest.command = "run-ser";
    std::optional<EsnModel> optimum;
    const bool needs_optimum = std::find(cfg.sweep.methods.begin(), cfg.sweep.methods.end(), "esn-optimum") !=
                               cfg.sweep.methods.end();
    if (!opt.weights.empty()) {
        optimum = weights_from_json(read_json_file(opt.weights)).model;
    } else if (needs_optimum) {
        spdlog::info("no --weights given; deriving optimum weights in-process");
        optimum = derive_weights(cfg, manifest).weights.model;
        manifest.warn("weights_derived_inline");
    }
    const auto rows = run_ser(cfg, optimum ? &*optimum : nullptr, manifest);
    const fs::path dir(opt.out);
    write_text_file(dir / "ser.csv", ser_csv(rows));
    if (plot)
        write_text_file(dir / "ser.svg", render_ser_svg(rows, cfg.name));
    write_manifest(dir, manifest);
    for (const auto& [method, pts] : aggregate_ser(rows)) {
        std::string line;
        for (const auto& [x, p] : pts)
            line += fmt::format(" {:g}:{:.3e}", x, p.ser());
        spdlog::info("{}{}", method, line);
    }
    log_warnings(manifest);
    spdlog::info("wrote {} ({} rows)", (dir / "ser.csv").string(), rows.size());
    return 0;
}

int cmd_verify_rank(const CommonOptions& opt)
{
    const ExperimentConfig cfg = resolve_config(opt);
    RunManifest manifest;
    manifest.command = "verify-rank";
    const RankReport rep = verify_rank(cfg, manifest);
    const fs::path dir(opt.out);
    write_text_file(dir / "spectrum.csv", spectrum_csv(rep));
    write_json_file(dir / "rank.json", rank_to_json(rep));
    write_manifest(dir, manifest);
    spdlog::info("predicted rank 4(L+1) = {}", rep.predicted);
    for (const auto& [eps, rank] : rep.eps_grid)
        spdlog::info("eps={:.3e} rank={}", eps, rank);
    spdlog::info("default eps={:.3e} rank={}; lambda[{}]/lambda[{}] = {:.3g}", rep.default_eps, rep.default_rank,
                 rep.predicted, rep.predicted + 1, rep.plateau_ratio);
    log_warnings(manifest);
    return 0;
}

int cmd_plot(const std::vector<std::string>& csvs, const std::string& out, const std::string& title)
{
    std::vector<SerResult> rows;
    for (const auto& path : csvs) {
        auto part = parse_ser_csv(read_text_file(path));
        if (csvs.size() > 1)
            for (auto& r : part)
                r.method = fs::path(path).stem().string() + ":" + r.method;
        rows.insert(rows.end(), part.begin(), part.end());
    }
    const fs::path target = fs::path(out).extension() == ".svg" ? fs::path(out) : fs::path(out) / "ser.svg";
    write_text_file(target, render_ser_svg(rows, title));
    spdlog::info("wrote {}", target.string());
    return 0;
}

int exit_code_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::SchemaError:
    case ErrorKind::BadProfile:
        return kExitConfig;
    default:
        return kExitNumeric;
    }
}

void add_common(CLI::App* sub, CommonOptions& opt, bool with_weights)
{
    sub->add_option("--config", opt.config, "Experiment config (.toml or .json)");
    sub->add_option("--seed", opt.seed, "Base seed (overrides sweep.seed)");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--workers", opt.workers, "Worker threads");
    sub->add_option("--set", opt.sets, "Config override KEY=VALUE (repeatable)")->take_all();
    if (with_weights)
        sub->add_option("--weights", opt.weights, "Weight file from derive-weights");
}

} // namespace

int main(int argc, char** argv)
{
    setup_logging();
    CLI::App app{"Reservoir-computing channel equalization for OFDM"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOptions opt;
    bool no_plot = false;
    std::vector<std::string> plot_inputs;
    std::string plot_title = "SER";

    auto* derive = app.add_subcommand("derive-weights", "Synthesize optimum reservoir weights from channel statistics");
    add_common(derive, opt, false);
    auto* ser = app.add_subcommand("run-ser", "Monte-Carlo SER sweep over all equalizers");
    add_common(ser, opt, true);
    ser->add_flag("--no-plot", no_plot, "Skip the SVG plot");
    auto* rank = app.add_subcommand("verify-rank", "Eigen-spectrum and epsilon-rank of the inverse-response covariance");
    add_common(rank, opt, false);
    auto* plot = app.add_subcommand("plot", "Render SER CSV files to SVG");
    plot->add_option("csv", plot_inputs, "SER CSV files")->required();
    plot->add_option("--out", opt.out, "Output directory or .svg path");
    plot->add_option("--title", plot_title, "Plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (derive->parsed())
            return cmd_derive(opt);
        if (ser->parsed())
            return cmd_run_ser(opt, !no_plot);
        if (rank->parsed())
            return cmd_verify_rank(opt);
        if (plot->parsed())
            return cmd_plot(plot_inputs, opt.out, plot_title);
    } catch (const StageError& e) {
        spdlog::error("stage {}: {} ({})", e.stage(), e.what(), to_string(e.kind()));
        return exit_code_for(e.kind());
    } catch (const Error& e) {
        spdlog::error("{} ({})", e.what(), to_string(e.kind()));
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitNumeric;
    }
    return 0;
}
