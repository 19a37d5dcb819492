// Copyright 2026 The vlaj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "vlaj/cli/commands.hpp"

namespace {

using vlaj::cli::CliConfig;
using vlaj::cli::Format;
namespace fs = std::filesystem;

std::string format_name = "text";

void add_common(CLI::App* cmd, CliConfig& cfg) {
    cmd->add_option("--output-dir", cfg.output_dir, "Directory for output files")
        ->envname("VLAJ_OUTPUT_DIR")
        ->capture_default_str();
    cmd->add_option("--format", format_name, "Output format: text, csv or json")
        ->envname("VLAJ_FORMAT")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
}

void add_window(CLI::App* cmd, CliConfig& cfg) {
    cmd->add_option("--window", cfg.window, "Sliding window length in steps (>= 4)")
        ->envname("VLAJ_WINDOW")
        ->check(CLI::Range(std::size_t{vlaj::metrics::min_window}, std::size_t{1} << 20))
        ->capture_default_str();
    cmd->add_option("--ev-samples", cfg.ev_samples_expected, "Expected inference samples per step for EV")
        ->envname("VLAJ_EV_SAMPLES")
        ->check(CLI::Range(2, 1 << 16))
        ->capture_default_str();
}

/// CLI11 silently skips environment values that fail validation; treat
/// them as usage errors instead.
bool rejected_env(const CLI::App& app) {
    for (const auto* sub : app.get_subcommands()) {
        for (const auto* opt : sub->get_options()) {
            const auto name = opt->get_envname();
            if (name.empty() || opt->count() != 0) continue;
            const char* value = std::getenv(name.c_str());
            if (value && *value) {
                std::cerr << name << ": invalid value '" << value << "' for " << opt->get_name() << "\n";
                return true;
            }
        }
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CliConfig cfg;
    cfg.jobs = std::max(1u, std::thread::hardware_concurrency());

    CLI::App app{"vlaj: uncertainty and quality metrics for robot manipulation traces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "vlaj 0.1.0");

    std::vector<fs::path> traces;

    auto* metrics = app.add_subcommand("metrics", "Compute per-step metrics and run summaries for traces");
    metrics->add_option("traces", traces, "Trace files (JSONL)")->required()->check(CLI::ExistingFile);
    add_common(metrics, cfg);
    add_window(metrics, cfg);
    metrics->add_option("--jobs", cfg.jobs, "Parallel workers")
        ->envname("VLAJ_JOBS")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();

    fs::path summaries;
    std::optional<fs::path> labels_path;
    auto* analyze = app.add_subcommand("analyze", "Breakdown, correlation and discrimination reports");
    analyze->add_option("summaries", summaries, "summaries.json written by 'metrics'")->required()->check(CLI::ExistingFile);
    analyze->add_option("--labels", labels_path, "resolved.csv or a label log (.jsonl)")->check(CLI::ExistingFile);
    add_common(analyze, cfg);

    auto* bench = app.add_subcommand("bench", "Per-step execution overhead of each metric group");
    bench->add_option("traces", traces, "Trace files (JSONL)")->required()->check(CLI::ExistingFile);
    bench->add_option("--repetitions", cfg.repetitions, "Timing repetitions")
        ->envname("VLAJ_REPETITIONS")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000}))
        ->capture_default_str();
    add_common(bench, cfg);
    add_window(bench, cfg);

    fs::path trace_dir, label_log, static_dir;
    auto* serve = app.add_subcommand("serve", "Run the labeling service");
    serve->add_option("trace_dir", trace_dir, "Directory of trace files (and optional <run_id>.mp4)")
        ->required()
        ->check(CLI::ExistingDirectory);
    serve->add_option("--labels", label_log, "Label log (JSONL, created if missing)")
        ->envname("VLAJ_LABELS")
        ->required();
    serve->add_option("--bind", cfg.bind, "host:port to listen on")->envname("VLAJ_BIND")->capture_default_str();
    serve->add_option("--batch-limit", cfg.batch_limit, "Labels per annotator session")
        ->envname("VLAJ_BATCH_LIMIT")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    serve->add_option("--static-dir", static_dir, "Serve UI assets from this directory")->check(CLI::ExistingDirectory);

    std::string profile = "smooth";
    std::vector<std::string> task_names{"pick_up"};
    std::size_t count = 1;
    vlaj::trace::SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Generate deterministic synthetic traces");
    synth->add_option("--profile", profile, "smooth, jittery, stalled or failing")
        ->check(CLI::IsMember({"smooth", "jittery", "stalled", "failing"}))
        ->capture_default_str();
    synth->add_option("--task", task_names, "pick_up, move_near, put_in, put_on or all")
        ->check(CLI::IsMember({"pick_up", "move_near", "put_in", "put_on", "all"}));
    synth->add_option("--count", count, "Traces per task")->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--steps", synth_opt.steps, "Steps per trace")->check(CLI::Range(8, 100000))->capture_default_str();
    synth->add_option("--model-id", synth_opt.model_id, "model_id written to headers")->capture_default_str();
    synth->add_option("--seed", cfg.seed, "First seed")->envname("VLAJ_SEED")->capture_default_str();
    add_common(synth, cfg);

    bool partial = false;
    auto* exp = app.add_subcommand("export", "Export labels.csv and resolved.csv from a label log");
    exp->add_option("log", label_log, "Label log (JSONL)")->required()->check(CLI::ExistingFile);
    exp->add_flag("--partial", partial, "Export even with unresolved disagreements");
    add_common(exp, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : vlaj::cli::exit_usage;
    }
    if (rejected_env(app)) return vlaj::cli::exit_usage;
    cfg.format = format_name == "json" ? Format::json : format_name == "csv" ? Format::csv : Format::text;

    try {
        if (*metrics) return vlaj::cli::cmd_metrics(traces, cfg, std::cout, std::cerr);
        if (*analyze) return vlaj::cli::cmd_analyze(summaries, labels_path, cfg, std::cout, std::cerr);
        if (*bench) return vlaj::cli::cmd_bench(traces, cfg, std::cout, std::cerr);
        if (*serve) return vlaj::cli::cmd_serve(trace_dir, label_log, cfg, static_dir, std::cout, std::cerr);
        if (*exp) return vlaj::cli::cmd_export(label_log, partial, cfg, std::cout, std::cerr);
        if (*synth) {
            std::vector<vlaj::trace::Task> tasks;
            for (const auto& name : task_names) {
                if (name == "all") {
                    tasks.assign(vlaj::trace::all_tasks.begin(), vlaj::trace::all_tasks.end());
                    break;
                }
                tasks.push_back(vlaj::trace::parse_task(name));
            }
            const auto written = vlaj::cli::cmd_synth(vlaj::trace::parse_profile(profile), tasks, count, cfg, synth_opt);
            for (const auto& p : written) std::cout << p.string() << "\n";
            return vlaj::cli::exit_ok;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return vlaj::cli::exit_partial;
    }
    return vlaj::cli::exit_usage;
}
