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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaj/core/quality_level.hpp"
#include "vlaj/metrics/quality.hpp"
#include "vlaj/metrics/uncertainty.hpp"
#include "vlaj/trace/oracle.hpp"

namespace vlaj::metrics {

/// Every metric that could be computed for one run.
struct RunMetrics {
    std::map<MetricId, MetricSeries> series;
    std::optional<double> ti;
    /// One entry per metric that was unavailable or undefined, and per warning.
    std::vector<std::string> notes;
};

inline RunMetrics compute_all(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    RunMetrics out;
    auto attempt = [&](MetricId id, auto&& fn) {
        try {
            out.series.emplace(id, fn());
        } catch (const metric_unavailable& e) {
            out.notes.push_back(std::string(to_string(id)) + " unavailable: " + e.what());
        } catch (const error& e) {
            out.notes.push_back(std::string(to_string(id)) + " undefined: " + e.what());
        }
    };
    attempt(MetricId::TB_TP, [&] { return tb_tp(trace); });
    attempt(MetricId::TB_PCS, [&] { return tb_pcs(trace); });
    attempt(MetricId::TB_D, [&] { return tb_d(trace); });
    attempt(MetricId::TB_E, [&] { return tb_e(trace); });
    attempt(MetricId::A_PI, [&] { return a_pi(trace, opt); });
    attempt(MetricId::A_VI, [&] { return a_vi(trace, opt); });
    attempt(MetricId::A_AI, [&] { return a_ai(trace, opt); });
    attempt(MetricId::EV, [&] { return ev(trace); });
    attempt(MetricId::TCP_PI, [&] { return tcp_pi(trace, opt); });
    attempt(MetricId::TCP_VI, [&] { return tcp_vi(trace, opt); });
    attempt(MetricId::TCP_AI, [&] { return tcp_ai(trace, opt); });
    attempt(MetricId::OT, [&] {
        auto g = ot_distance(trace);
        if (g.warning) out.notes.push_back("OT: " + *g.warning);
        return ot_from_distance(g);
    });
    try {
        out.ti = ti(trace, opt);
    } catch (const error& e) {
        out.notes.push_back(std::string("TI undefined: ") + e.what());
    }
    return out;
}

struct RunSummary {
    std::string run_id;
    std::string model_id;
    trace::Task task = trace::Task::pick_up;
    std::size_t steps = 0;
    /// Mean of the defined per-step values; only metrics that were available.
    std::map<MetricId, double> per_metric_mean;
    std::optional<double> ti;
    bool success = false;
    std::optional<QualityLevel> quality_label;
    std::vector<std::string> notes;

    /// Per-run value of a table column; "TI" reads `ti`.
    std::optional<double> value(std::string_view column) const {
        if (column == "TI") return ti;
        if (auto id = parse_metric_id(column)) {
            auto it = per_metric_mean.find(*id);
            if (it != per_metric_mean.end()) return it->second;
        }
        return std::nullopt;
    }
};

/// Success precedence: the outcome recorded in the trace, then the symbolic
/// oracle. An oracle that cannot evaluate counts as failure with a note.
inline bool run_success(const trace::RunTrace& trace, std::vector<std::string>* notes = nullptr) {
    if (trace.outcome.oracle_success) return *trace.outcome.oracle_success;
    try {
        return trace::success_oracle(trace);
    } catch (const error& e) {
        if (notes) notes->push_back(std::string("oracle failed: ") + e.what());
        return false;
    }
}

inline RunSummary summarize(const trace::RunTrace& trace, const RunMetrics& m,
                            const std::map<std::string, QualityLevel>* labels = nullptr) {
    RunSummary s;
    s.run_id = trace.header.run_id;
    s.model_id = trace.header.model_id;
    s.task = trace.header.task;
    s.steps = trace.steps.size();
    for (const auto& [id, series] : m.series) {
        if (!series.empty()) s.per_metric_mean[id] = series.mean();
    }
    s.ti = m.ti;
    s.notes = m.notes;
    s.success = run_success(trace, &s.notes);
    if (labels) {
        if (auto it = labels->find(s.run_id); it != labels->end()) s.quality_label = it->second;
    }
    return s;
}

inline RunSummary summarize_run(const trace::RunTrace& trace, const MetricOptions& opt = {},
                                const std::map<std::string, QualityLevel>* labels = nullptr) {
    return summarize(trace, compute_all(trace, opt), labels);
}

// JSON wire format.

inline nlohmann::json series_to_json(const MetricSeries& s) {
    return {{"metric_id", to_string(s.metric_id)}, {"valid_from", s.valid_from}, {"values", s.values}};
}

inline nlohmann::json run_metrics_to_json(const trace::RunTrace& trace, const RunMetrics& m) {
    nlohmann::json series = nlohmann::json::object();
    for (const auto& [id, s] : m.series) series[std::string(to_string(id))] = series_to_json(s);
    nlohmann::json j = {{"schema_version", 1},
                        {"run_id", trace.header.run_id},
                        {"series", series},
                        {"ti", m.ti ? nlohmann::json(*m.ti) : nlohmann::json(nullptr)},
                        {"notes", m.notes}};
    return j;
}

inline nlohmann::json summary_to_json(const RunSummary& s) {
    nlohmann::json means = nlohmann::json::object();
    for (const auto& [id, v] : s.per_metric_mean) means[std::string(to_string(id))] = v;
    nlohmann::json j = {{"run_id", s.run_id},
                        {"model_id", s.model_id},
                        {"task", trace::to_string(s.task)},
                        {"steps", s.steps},
                        {"per_metric_mean", means},
                        {"ti", s.ti ? nlohmann::json(*s.ti) : nlohmann::json(nullptr)},
                        {"success", s.success},
                        {"notes", s.notes}};
    j["quality_label"] = s.quality_label ? nlohmann::json(to_string(*s.quality_label)) : nlohmann::json(nullptr);
    return j;
}

inline RunSummary summary_from_json(const nlohmann::json& j) {
    RunSummary s;
    s.run_id = j.at("run_id").get<std::string>();
    s.model_id = j.value("model_id", "unknown");
    s.task = trace::parse_task(j.at("task").get<std::string>());
    s.steps = j.value("steps", std::size_t{0});
    for (const auto& [key, v] : j.at("per_metric_mean").items()) {
        if (auto id = parse_metric_id(key)) s.per_metric_mean[*id] = v.get<double>();
    }
    if (j.contains("ti") && !j["ti"].is_null()) s.ti = j["ti"].get<double>();
    s.success = j.at("success").get<bool>();
    if (j.contains("quality_label") && !j["quality_label"].is_null())
        s.quality_label = parse_quality(j["quality_label"].get<std::string>());
    if (j.contains("notes")) s.notes = j["notes"].get<std::vector<std::string>>();
    return s;
}

}  // namespace vlaj::metrics
