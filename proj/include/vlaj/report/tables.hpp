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

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaj/report/dataset.hpp"
#include "vlaj/report/render.hpp"
#include "vlaj/stats/correlation.hpp"
#include "vlaj/stats/effect.hpp"

namespace vlaj::report {

inline constexpr int schema_version = 1;
inline constexpr double significance_level = 0.05;
/// Fewer samples than this in either group prints "-".
inline constexpr std::size_t min_group_samples = 4;

// ---------------------------------------------------------------------------
// Success and quality breakdown

struct BreakdownRow {
    std::string model_id;
    trace::Task task = trace::Task::pick_up;
    std::size_t scenes = 0;
    /// Oracle successes minus human-flagged false negatives.
    std::size_t success = 0;
    std::size_t high = 0;
    std::size_t medium = 0;
    std::size_t low = 0;
    std::size_t false_negative = 0;
    /// Successes without a graded label yet.
    std::size_t unlabeled = 0;
};

inline std::vector<BreakdownRow> quality_breakdown(const StudyDataset& data) {
    std::vector<BreakdownRow> out;
    for (const auto& [key, runs] : data.groups()) {
        BreakdownRow row{key.model_id, key.task};
        row.scenes = runs.size();
        for (const auto* r : runs) {
            if (!r->success) continue;
            const auto label = r->quality_label;
            if (label == QualityLevel::false_negative) {
                ++row.false_negative;
                continue;
            }
            ++row.success;
            if (!label) {
                ++row.unlabeled;
            } else if (*label == QualityLevel::high) {
                ++row.high;
            } else if (*label == QualityLevel::medium) {
                ++row.medium;
            } else {
                ++row.low;
            }
        }
        out.push_back(row);
    }
    return out;
}

/// Success is over scenes, quality levels over successes, false negatives over scenes.
inline TextTable breakdown_text(const std::vector<BreakdownRow>& rows) {
    TextTable t{"Success and quality breakdown",
                {"model", "task", "scenes", "success", "high", "medium", "low", "false_neg", "unlabeled"},
                {}};
    for (const auto& r : rows) {
        t.rows.push_back({r.model_id, std::string(trace::to_string(r.task)), std::to_string(r.scenes),
                          count_pct(r.success, r.scenes), count_pct(r.high, r.success),
                          count_pct(r.medium, r.success), count_pct(r.low, r.success),
                          count_pct(r.false_negative, r.scenes), std::to_string(r.unlabeled)});
    }
    return t;
}

inline nlohmann::json breakdown_json(const std::vector<BreakdownRow>& rows) {
    auto j = nlohmann::json::array();
    const auto text = breakdown_text(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& cells = text.rows[i];
        j.push_back({{"model_id", r.model_id},
                     {"task", trace::to_string(r.task)},
                     {"scenes", r.scenes},
                     {"success", r.success},
                     {"high", r.high},
                     {"medium", r.medium},
                     {"low", r.low},
                     {"false_negative", r.false_negative},
                     {"unlabeled", r.unlabeled},
                     {"cells",
                      {{"success", cells[3]},
                       {"high", cells[4]},
                       {"medium", cells[5]},
                       {"low", cells[6]},
                       {"false_negative", cells[7]}}}});
    }
    return j;
}

// ---------------------------------------------------------------------------
// Metric vs human-label correlation

struct CorrelationRow {
    std::string metric;
    std::string model_id;
    trace::Task task = trace::Task::pick_up;
    std::size_t n = 0;
    std::optional<stats::CorrelationResult> result;
    /// Why the cell is "-" when result is empty.
    std::string reason;

    bool significant() const { return result && result->p_value < significance_level; }
};

/// Spearman between each metric's per-run mean and the label rank
/// (high=1, medium=2, low=3) over the graded successful runs of each group.
inline std::vector<CorrelationRow> correlation_table(const StudyDataset& data) {
    std::vector<CorrelationRow> out;
    const auto groups = data.groups();
    for (const auto& metric : metric_columns()) {
        for (const auto& [key, runs] : groups) {
            CorrelationRow row;
            row.metric = metric;
            row.model_id = key.model_id;
            row.task = key.task;
            std::vector<double> values, ranks;
            for (const auto* r : runs) {
                if (!r->success || !r->quality_label) continue;
                const auto rank = quality_rank(*r->quality_label);
                const auto v = r->value(metric);
                if (!rank || !v) continue;
                values.push_back(*v);
                ranks.push_back(static_cast<double>(*rank));
            }
            row.n = values.size();
            if (row.n < min_group_samples) {
                row.reason = "insufficient samples";
            } else {
                try {
                    row.result = stats::spearman(values, ranks);
                } catch (const stats_error&) {
                    row.reason = "undefined correlation";
                }
            }
            out.push_back(std::move(row));
        }
    }
    return out;
}

inline TextTable correlation_text(const std::vector<CorrelationRow>& rows) {
    TextTable t{"Spearman correlation between metrics and human quality labels",
                {"metric", "model", "task", "n", "rho", "p", "category", "significant"},
                {}};
    for (const auto& r : rows) {
        if (!r.result) {
            t.rows.push_back({r.metric, r.model_id, std::string(trace::to_string(r.task)), std::to_string(r.n),
                              "-", "-", "-", "-"});
            continue;
        }
        t.rows.push_back({r.metric, r.model_id, std::string(trace::to_string(r.task)), std::to_string(r.n),
                          fixed(r.result->rho, 3), fixed(r.result->p_value, 4),
                          std::string(stats::to_string(r.result->category)),
                          r.significant() ? "yes" : "no"});
    }
    return t;
}

inline nlohmann::json correlation_json(const std::vector<CorrelationRow>& rows) {
    auto j = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row = {{"metric", r.metric},
                              {"model_id", r.model_id},
                              {"task", trace::to_string(r.task)},
                              {"n", r.n}};
        if (r.result) {
            row["rho"] = r.result->rho;
            row["p_value"] = r.result->p_value;
            row["category"] = stats::to_string(r.result->category);
            row["significant"] = r.significant();
        } else {
            row["rho"] = nullptr;
            row["reason"] = r.reason;
        }
        j.push_back(std::move(row));
    }
    return j;
}

// ---------------------------------------------------------------------------
// Quality group vs failing runs

struct DiscriminationRow {
    std::string metric;
    std::string model_id;
    trace::Task task = trace::Task::pick_up;
    QualityLevel level = QualityLevel::high;
    std::size_t n_quality = 0;
    std::size_t n_fail = 0;
    std::optional<stats::EffectResult> result;

    bool significant() const { return result && result->p_value < significance_level; }
};

/// Group values of one (model, task) cell: quality group and failing runs.
/// False negatives belong to neither.
inline std::pair<std::vector<double>, std::vector<double>> discrimination_groups(
    const std::vector<const RunSummary*>& runs, const std::string& metric, QualityLevel level) {
    std::vector<double> quality, fail;
    for (const auto* r : runs) {
        const auto v = r->value(metric);
        if (!v) continue;
        if (!r->success) {
            fail.push_back(*v);
        } else if (r->quality_label == level) {
            quality.push_back(*v);
        }
    }
    return {quality, fail};
}

/// A12 and Mann-Whitney p of each quality level against the failing runs.
/// A12 < 0.5 means the quality group had the lower (better) values.
inline std::vector<DiscriminationRow> discrimination_table(const StudyDataset& data) {
    std::vector<DiscriminationRow> out;
    const auto groups = data.groups();
    for (const auto& metric : metric_columns()) {
        for (const auto& [key, runs] : groups) {
            for (auto level : graded_quality_levels) {
                DiscriminationRow row;
                row.metric = metric;
                row.model_id = key.model_id;
                row.task = key.task;
                row.level = level;
                const auto [quality, fail] = discrimination_groups(runs, metric, level);
                row.n_quality = quality.size();
                row.n_fail = fail.size();
                if (row.n_quality >= min_group_samples && row.n_fail >= min_group_samples) {
                    row.result = stats::mann_whitney_u(quality, fail);
                }
                out.push_back(std::move(row));
            }
        }
    }
    return out;
}

inline TextTable discrimination_text(const std::vector<DiscriminationRow>& rows) {
    TextTable t{"A12 effect size of each quality level against failing runs",
                {"metric", "model", "task", "level", "n_quality", "n_fail", "a12", "p", "magnitude",
                 "direction", "significant"},
                {}};
    for (const auto& r : rows) {
        std::vector<std::string> cells{r.metric, r.model_id, std::string(trace::to_string(r.task)),
                                       std::string(to_string(r.level)), std::to_string(r.n_quality),
                                       std::to_string(r.n_fail)};
        if (!r.result) {
            cells.insert(cells.end(), {"-", "-", "-", "-", "-"});
        } else {
            cells.insert(cells.end(), {fixed(r.result->a12, 2), fixed(r.result->p_value, 4),
                                       std::string(stats::to_string(r.result->magnitude)),
                                       std::string(stats::to_string(r.result->direction)),
                                       r.significant() ? "yes" : "no"});
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline nlohmann::json discrimination_json(const std::vector<DiscriminationRow>& rows) {
    auto j = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row = {{"metric", r.metric},
                              {"model_id", r.model_id},
                              {"task", trace::to_string(r.task)},
                              {"level", to_string(r.level)},
                              {"n_quality", r.n_quality},
                              {"n_fail", r.n_fail}};
        if (r.result) {
            row["a12"] = r.result->a12;
            row["u_statistic"] = r.result->u_statistic;
            row["p_value"] = r.result->p_value;
            row["magnitude"] = stats::to_string(r.result->magnitude);
            row["direction"] = stats::to_string(r.result->direction);
            row["significant"] = r.significant();
        } else {
            row["a12"] = nullptr;
            row["reason"] = "insufficient samples";
        }
        j.push_back(std::move(row));
    }
    return j;
}

}  // namespace vlaj::report
