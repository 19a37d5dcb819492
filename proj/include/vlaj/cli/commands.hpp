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
#pragma once

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaj/labels/service.hpp"
#include "vlaj/labels/store.hpp"
#include "vlaj/metrics/summary.hpp"
#include "vlaj/report/overhead.hpp"
#include "vlaj/report/tables.hpp"
#include "vlaj/trace/io.hpp"
#include "vlaj/trace/synth.hpp"

namespace vlaj::cli {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_partial = 1;
inline constexpr int exit_usage = 2;

enum class Format { text, csv, json };

inline std::string_view to_string(Format f) {
    switch (f) {
        case Format::text: return "text";
        case Format::csv: return "csv";
        case Format::json: return "json";
    }
    return "?";
}

inline std::string_view extension(Format f) {
    switch (f) {
        case Format::text: return ".txt";
        case Format::csv: return ".csv";
        case Format::json: return ".json";
    }
    return "";
}

struct CliConfig {
    std::size_t window = metrics::default_window;
    int ev_samples_expected = 4;
    std::uint64_t seed = 0;
    fs::path output_dir = ".";
    Format format = Format::text;
    unsigned jobs = 1;
    std::size_t repetitions = 5;
    std::string bind = "127.0.0.1:8080";
    std::size_t batch_limit = labels::default_batch_limit;

    metrics::MetricOptions metric_options() const { return {window}; }
};

inline void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path.string());
    out << content;
    if (!out) throw error("failed writing " + path.string());
}

inline std::string render(const report::TextTable& t, const nlohmann::json& j, Format f) {
    switch (f) {
        case Format::text: return report::render_text(t);
        case Format::csv: return report::render_csv(t);
        case Format::json: return j.dump(2) + "\n";
    }
    return {};
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsOutcome {
    std::vector<metrics::RunSummary> summaries;
    std::vector<std::string> errors;
};

/// Loads and scores each trace, writing <run_id>.metrics.json per run and
/// summaries.json. Outputs are ordered by run_id whatever the job count.
inline MetricsOutcome run_metrics(const std::vector<fs::path>& paths, const CliConfig& cfg) {
    struct Slot {
        std::optional<trace::RunTrace> trace;
        metrics::RunMetrics metrics;
        std::string error;
    };
    std::vector<Slot> slots(paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < paths.size(); i = next++) {
            try {
                auto t = trace::load_trace(paths[i]);
                slots[i].metrics = metrics::compute_all(t, cfg.metric_options());
                if (t.header.ev_samples != cfg.ev_samples_expected && t.has_ev_actions()) {
                    slots[i].metrics.notes.push_back("EV computed from " + std::to_string(t.header.ev_samples) +
                                                     " samples (expected " +
                                                     std::to_string(cfg.ev_samples_expected) + ")");
                }
                slots[i].trace = std::move(t);
            } catch (const std::exception& e) {
                slots[i].error = paths[i].string() + ": " + e.what();
            }
        }
    };
    const unsigned jobs = std::clamp<unsigned>(cfg.jobs, 1, static_cast<unsigned>(std::max<std::size_t>(paths.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
    }

    MetricsOutcome out;
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].trace) {
            out.errors.push_back(slots[i].error);
            continue;
        }
        const auto& id = slots[i].trace->header.run_id;
        if (!by_id.emplace(id, i).second) {
            out.errors.push_back(paths[i].string() + ": duplicate run_id '" + id + "' (also in " +
                                 paths[by_id[id]].string() + ")");
        }
    }
    auto all = nlohmann::json::array();
    for (const auto& [id, i] : by_id) {
        const auto& s = slots[i];
        write_file(cfg.output_dir / (id + ".metrics.json"), metrics::run_metrics_to_json(*s.trace, s.metrics).dump(2) + "\n");
        out.summaries.push_back(metrics::summarize(*s.trace, s.metrics));
        all.push_back(metrics::summary_to_json(out.summaries.back()));
    }
    nlohmann::json doc{{"schema_version", report::schema_version}, {"runs", std::move(all)}};
    write_file(cfg.output_dir / "summaries.json", doc.dump(2) + "\n");
    return out;
}

inline report::TextTable summary_table(const std::vector<metrics::RunSummary>& runs) {
    report::TextTable t{"Run summaries", {"run_id", "model", "task", "steps", "success"}, {}};
    for (const auto& c : report::metric_columns()) t.header.push_back(c);
    for (const auto& r : runs) {
        std::vector<std::string> row{r.run_id, r.model_id, std::string(trace::to_string(r.task)),
                                     std::to_string(r.steps), r.success ? "yes" : "no"};
        for (const auto& c : report::metric_columns()) {
            const auto v = r.value(c);
            row.push_back(v ? report::fixed(*v, 6) : "-");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline int cmd_metrics(const std::vector<fs::path>& paths, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto r = run_metrics(paths, cfg);
    for (const auto& e : r.errors) err << "error: " << e << "\n";
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : r.summaries) j.push_back(metrics::summary_to_json(s));
    out << render(summary_table(r.summaries), j, cfg.format);
    return r.errors.empty() ? exit_ok : exit_partial;
}

// ---------------------------------------------------------------------------
// analyze

inline std::vector<metrics::RunSummary> load_summaries(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open summaries file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw error(path.string() + ": " + e.what());
    }
    const auto& runs = doc.is_array() ? doc : doc.at("runs");
    std::vector<metrics::RunSummary> out;
    for (const auto& r : runs) out.push_back(metrics::summary_from_json(r));
    return out;
}

/// Resolved labels from a resolved.csv export or a raw label log (.jsonl).
inline std::map<std::string, QualityLevel> load_labels(const fs::path& path, std::ostream& err) {
    if (path.extension() == ".jsonl") {
        const auto set = labels::replay_file(path).label_set();
        for (const auto& run : set.unresolved) err << "warning: run '" << run << "' has unresolved disagreement; skipped\n";
        std::map<std::string, QualityLevel> out;
        for (const auto& [run, r] : set.resolutions) out.emplace(run, r.label);
        return out;
    }
    std::ifstream in(path);
    if (!in) throw error("cannot open labels file " + path.string());
    return labels::read_resolved_csv(in);
}

inline int cmd_analyze(const fs::path& summaries, const std::optional<fs::path>& labels_path, const CliConfig& cfg,
                       std::ostream& out, std::ostream& err) {
    report::StudyDataset data;
    data.runs = load_summaries(summaries);
    if (data.runs.empty()) {
        err << "error: no runs in " << summaries.string() << "\n";
        return exit_partial;
    }
    if (labels_path) data.labels = load_labels(*labels_path, err);
    const auto orphans = data.join_labels();
    for (const auto& o : orphans) err << "warning: label for unknown run '" << o << "'\n";
    if (labels_path && !data.labels.empty() && orphans.size() == data.labels.size()) {
        err << "error: no label matches any run (empty join)\n";
        return exit_partial;
    }

    const auto ext = std::string(extension(cfg.format));
    const auto breakdown = report::quality_breakdown(data);
    std::string shown = render(report::breakdown_text(breakdown),
                               {{"schema_version", report::schema_version}, {"rows", report::breakdown_json(breakdown)}},
                               cfg.format);
    write_file(cfg.output_dir / ("quality_breakdown" + ext), shown);
    out << shown;

    const bool any_label = std::any_of(data.runs.begin(), data.runs.end(),
                                       [](const metrics::RunSummary& r) { return r.quality_label.has_value(); });
    if (!any_label) {
        err << "note: no labels joined; correlation and discrimination tables skipped\n";
        return exit_ok;
    }
    const auto corr = report::correlation_table(data);
    shown = render(report::correlation_text(corr),
                   {{"schema_version", report::schema_version}, {"rows", report::correlation_json(corr)}}, cfg.format);
    write_file(cfg.output_dir / ("correlation_table" + ext), shown);
    out << shown;

    const auto disc = report::discrimination_table(data);
    shown = render(report::discrimination_text(disc),
                   {{"schema_version", report::schema_version}, {"rows", report::discrimination_json(disc)}}, cfg.format);
    write_file(cfg.output_dir / ("discrimination_table" + ext), shown);
    out << shown;
    return exit_ok;
}

// ---------------------------------------------------------------------------
// bench

inline std::string read_first_match(const fs::path& path, const std::string& key) {
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
        if (line.rfind(key, 0) == 0) {
            auto pos = line.find(':');
            if (pos != std::string::npos) return line.substr(line.find_first_not_of(" \t", pos + 1));
        }
    }
    return "unknown";
}

inline nlohmann::json machine_info(const report::BenchOptions& opt) {
    return {{"cpu", read_first_match("/proc/cpuinfo", "model name")},
            {"hardware_threads", std::thread::hardware_concurrency()},
            {"compiler", __VERSION__},
            {"timestamp", labels::utc_timestamp()},
            {"repetitions", opt.repetitions},
            {"dense_vocab", opt.dense_vocab}};
}

inline int cmd_bench(const std::vector<fs::path>& paths, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<trace::RunTrace> traces;
    int status = exit_ok;
    for (const auto& p : paths) {
        try {
            traces.push_back(trace::load_trace(p));
        } catch (const std::exception& e) {
            err << "error: " << p.string() << ": " << e.what() << "\n";
            status = exit_partial;
        }
    }
    if (traces.empty()) {
        err << "error: no loadable traces to benchmark\n";
        return exit_partial;
    }
    report::BenchOptions opt;
    opt.repetitions = cfg.repetitions;
    opt.ev_replays = cfg.ev_samples_expected;
    opt.metric = cfg.metric_options();
    const auto info = machine_info(opt);
    const auto groups = report::overhead_bench(traces, opt);
    const auto table = report::overhead_text(groups);
    std::string shown;
    if (cfg.format == Format::json) {
        shown = nlohmann::json{{"schema_version", report::schema_version},
                               {"machine", info},
                               {"groups", report::overhead_json(groups)}}
                    .dump(2) +
                "\n";
    } else {
        const std::string prefix = cfg.format == Format::csv ? "# " : "";
        for (const auto& [k, v] : info.items()) shown += prefix + k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
        shown += cfg.format == Format::csv ? report::render_csv(table) : report::render_text(table);
    }
    write_file(cfg.output_dir / ("overhead" + std::string(extension(cfg.format))), shown);
    out << shown;
    return status;
}

// ---------------------------------------------------------------------------
// synth

/// Writes `count` traces named <run_id>.jsonl, seeds seed..seed+count-1.
inline std::vector<fs::path> cmd_synth(trace::Profile profile, const std::vector<trace::Task>& tasks, std::size_t count,
                                       const CliConfig& cfg, const trace::SynthOptions& opt = {}) {
    std::vector<fs::path> written;
    for (auto task : tasks) {
        for (std::size_t i = 0; i < count; ++i) {
            const auto t = trace::generate_synthetic(profile, task, cfg.seed + i, opt);
            const auto path = cfg.output_dir / (t.header.run_id + ".jsonl");
            write_file(path, trace::to_jsonl(t));
            written.push_back(path);
        }
    }
    return written;
}

// ---------------------------------------------------------------------------
// export

inline int cmd_export(const fs::path& log, bool partial, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto set = labels::replay_file(log).label_set();
    if (!set.unresolved.empty() && !partial) {
        err << "error: unresolved disagreements (add a third label or use --partial):\n";
        for (const auto& r : set.unresolved) err << "  " << r << "\n";
        return exit_partial;
    }
    write_file(cfg.output_dir / "labels.csv", labels::labels_csv(set));
    write_file(cfg.output_dir / "resolved.csv", labels::resolved_csv(set));
    out << "exported " << set.labels.size() << " labels, " << set.resolutions.size() << " resolved runs to "
        << cfg.output_dir.string() << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// serve

inline std::pair<std::string, int> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw error("bind address must be host:port, got '" + bind + "'");
    const auto host = bind.substr(0, colon);
    std::size_t used = 0;
    int port = 0;
    try {
        port = std::stoi(bind.substr(colon + 1), &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (host.empty() || used == 0 || used != bind.size() - colon - 1 || port < 0 || port > 65535)
        throw error("bind address must be host:port, got '" + bind + "'");
    return {host, port};
}

namespace detail {
inline labels::LabelService* active_service = nullptr;
inline void stop_on_signal(int) {
    if (active_service) active_service->stop();
}
}  // namespace detail

inline int cmd_serve(const fs::path& trace_dir, const fs::path& label_log, const CliConfig& cfg,
                     const fs::path& static_dir, std::ostream& out, std::ostream& err) {
    const auto [host, port] = parse_bind(cfg.bind);
    const auto catalog = labels::RunCatalog::load_dir(trace_dir);
    for (const auto& e : catalog.load_errors) err << "warning: skipped " << e << "\n";
    labels::LabelStore store(label_log, catalog.eligibility());
    labels::ServiceOptions opt;
    opt.batch_limit = cfg.batch_limit;
    opt.media_dir = trace_dir;
    opt.static_dir = static_dir;
    labels::LabelService service(catalog, store, opt);
    detail::active_service = &service;
    std::signal(SIGINT, detail::stop_on_signal);
    std::signal(SIGTERM, detail::stop_on_signal);
    out << "serving " << catalog.runs.size() << " runs on http://" << host << ":" << port << " (labels: "
        << label_log.string() << ")" << std::endl;
    const bool ok = service.listen(host, port);
    detail::active_service = nullptr;
    if (!ok) {
        err << "error: cannot listen on " << cfg.bind << " (address in use?)\n";
        return exit_partial;
    }
    return exit_ok;
}

}  // namespace vlaj::cli
