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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vlaj/core/quality_level.hpp"
#include "vlaj/metrics/summary.hpp"

namespace vlaj::report {

using metrics::RunSummary;

/// Column order of the correlation and discrimination tables.
inline const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> cols{"TB_TP", "TB_PCS", "TB_D",   "TB_E",   "A_PI",
                                               "A_VI",  "A_AI",   "EV",     "TCP_PI", "TCP_VI",
                                               "TCP_AI", "TI",    "OT"};
    return cols;
}

struct GroupKey {
    std::string model_id;
    trace::Task task;

    friend auto operator<=>(const GroupKey& a, const GroupKey& b) {
        if (auto c = a.model_id <=> b.model_id; c != 0) return c;
        return static_cast<int>(a.task) <=> static_cast<int>(b.task);
    }
    friend bool operator==(const GroupKey&, const GroupKey&) = default;
};

/// Run summaries plus the resolved human labels they are judged against.
struct StudyDataset {
    std::vector<RunSummary> runs;
    std::map<std::string, QualityLevel> labels;
    std::map<std::string, std::string> metadata;

    /// Copies resolved labels onto the runs and returns the ids of labels that
    /// match no run. Throws on duplicate run ids.
    std::vector<std::string> join_labels() {
        std::set<std::string> ids;
        for (auto& r : runs) {
            if (!ids.insert(r.run_id).second) throw error("duplicate run_id '" + r.run_id + "' in dataset");
            auto it = labels.find(r.run_id);
            r.quality_label = it == labels.end() ? std::nullopt : std::optional<QualityLevel>(it->second);
        }
        std::vector<std::string> orphans;
        for (const auto& [id, label] : labels) {
            if (!ids.contains(id)) orphans.push_back(id);
        }
        return orphans;
    }

    /// Runs grouped by (model, task), each group ordered by run_id.
    std::map<GroupKey, std::vector<const RunSummary*>> groups() const {
        std::map<GroupKey, std::vector<const RunSummary*>> out;
        for (const auto& r : runs) out[{r.model_id, r.task}].push_back(&r);
        for (auto& [key, v] : out) {
            std::sort(v.begin(), v.end(), [](const RunSummary* a, const RunSummary* b) { return a->run_id < b->run_id; });
        }
        return out;
    }
};

}  // namespace vlaj::report
