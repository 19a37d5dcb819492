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

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vlaj/core/error.hpp"

namespace vlaj::metrics {

enum class MetricId { A_PI, A_VI, A_AI, TB_TP, TB_PCS, TB_D, TB_E, EV, TCP_PI, TCP_VI, TCP_AI, OT };

inline constexpr std::array<MetricId, 12> all_step_metrics{
    MetricId::TB_TP, MetricId::TB_PCS, MetricId::TB_D,   MetricId::TB_E,
    MetricId::A_PI,  MetricId::A_VI,   MetricId::A_AI,   MetricId::EV,
    MetricId::TCP_PI, MetricId::TCP_VI, MetricId::TCP_AI, MetricId::OT};

inline std::string_view to_string(MetricId id) {
    switch (id) {
        case MetricId::A_PI: return "A_PI";
        case MetricId::A_VI: return "A_VI";
        case MetricId::A_AI: return "A_AI";
        case MetricId::TB_TP: return "TB_TP";
        case MetricId::TB_PCS: return "TB_PCS";
        case MetricId::TB_D: return "TB_D";
        case MetricId::TB_E: return "TB_E";
        case MetricId::EV: return "EV";
        case MetricId::TCP_PI: return "TCP_PI";
        case MetricId::TCP_VI: return "TCP_VI";
        case MetricId::TCP_AI: return "TCP_AI";
        case MetricId::OT: return "OT";
    }
    return "?";
}

inline std::optional<MetricId> parse_metric_id(std::string_view s) {
    for (MetricId id : all_step_metrics) {
        if (to_string(id) == s) return id;
    }
    return std::nullopt;
}

/// Per-step values of one metric. `values[i]` belongs to step `valid_from + i`;
/// steps before `valid_from` have no value.
struct MetricSeries {
    MetricId metric_id = MetricId::A_PI;
    std::int64_t valid_from = 0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }

    std::optional<double> at(std::int64_t t) const {
        if (t < valid_from || t - valid_from >= static_cast<std::int64_t>(values.size()))
            return std::nullopt;
        return values[static_cast<std::size_t>(t - valid_from)];
    }

    double mean() const {
        if (values.empty()) throw undefined_series(std::string(to_string(metric_id)) + ": empty series");
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }
};

/// Streaming buffer depth for the difference metrics.
inline constexpr std::size_t default_window = 8;
inline constexpr std::size_t min_window = 4;

struct MetricOptions {
    std::size_t window = default_window;
};

}  // namespace vlaj::metrics
