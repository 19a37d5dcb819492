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

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vlaj/metrics/difference.hpp"
#include "vlaj/metrics/series.hpp"
#include "vlaj/metrics/token.hpp"
#include "vlaj/trace/types.hpp"

namespace vlaj::metrics {

/// Mean absolute per-dimension difference of order `Order` over an action
/// sequence. Element i of the result belongs to sequence index Order + i.
template <std::size_t Order>
std::vector<double> action_instability(std::span<const std::vector<double>> actions,
                                       std::size_t window = default_window) {
    return windowed_differences<Order>(actions, window, [](const std::vector<double>& diff) {
        double sum = 0.0;
        for (double x : diff) sum += std::abs(x);
        return sum / static_cast<double>(diff.size());
    });
}

namespace detail {

inline std::vector<std::vector<double>> actions_of(const trace::RunTrace& trace) {
    std::vector<std::vector<double>> out;
    out.reserve(trace.steps.size());
    for (const auto& s : trace.steps) out.push_back(s.action);
    return out;
}

template <std::size_t Order>
MetricSeries action_series(const trace::RunTrace& trace, MetricId id, const MetricOptions& opt) {
    if (trace.steps.size() <= Order) {
        throw undefined_series(std::string(to_string(id)) + " needs at least " +
                               std::to_string(Order + 1) + " steps, trace has " +
                               std::to_string(trace.steps.size()));
    }
    const auto actions = actions_of(trace);
    return {id, trace.steps.front().t + static_cast<std::int64_t>(Order),
            action_instability<Order>(std::span<const std::vector<double>>(actions), opt.window)};
}

template <typename Kernel>
MetricSeries token_series(const trace::RunTrace& trace, MetricId id, Kernel per_token) {
    if (!trace.has_token_probs()) {
        throw metric_unavailable(std::string(to_string(id)) + ": trace carries no token_probs");
    }
    MetricSeries out{id, trace.steps.front().t, {}};
    out.values.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        const auto& tokens = *s.token_probs;
        double sum = 0.0;
        for (const auto& d : tokens) sum += per_token(d);
        out.values.push_back(sum / static_cast<double>(tokens.size()));
    }
    return out;
}

}  // namespace detail

/// Action Position Instability: (1/D) sum_d |a_t - a_{t-1}|.
inline MetricSeries a_pi(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    return detail::action_series<1>(trace, MetricId::A_PI, opt);
}

/// Action Velocity Instability: (1/D) sum_d |a_t - 2a_{t-1} + a_{t-2}|.
inline MetricSeries a_vi(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    return detail::action_series<2>(trace, MetricId::A_VI, opt);
}

/// Action Acceleration Instability: third backward difference.
inline MetricSeries a_ai(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    return detail::action_series<3>(trace, MetricId::A_AI, opt);
}

/// 1 - mean over tokens of the top probability.
inline MetricSeries tb_tp(const trace::RunTrace& trace) {
    auto s = detail::token_series(trace, MetricId::TB_TP,
                                  [](const trace::TokenDistribution& d) { return token::max_prob(d); });
    for (auto& v : s.values) v = 1.0 - v;
    return s;
}

/// 1 - mean over tokens of (top - second) probability.
inline MetricSeries tb_pcs(const trace::RunTrace& trace) {
    auto s = detail::token_series(trace, MetricId::TB_PCS,
                                  [](const trace::TokenDistribution& d) { return token::pcs(d); });
    for (auto& v : s.values) v = 1.0 - v;
    return s;
}

/// Mean DeepGini impurity over tokens.
inline MetricSeries tb_d(const trace::RunTrace& trace) {
    return detail::token_series(trace, MetricId::TB_D,
                                [](const trace::TokenDistribution& d) { return token::gini(d); });
}

/// Mean token entropy (nats).
inline MetricSeries tb_e(const trace::RunTrace& trace) {
    return detail::token_series(trace, MetricId::TB_E,
                                [](const trace::TokenDistribution& d) { return token::entropy(d); });
}

/// Mean over dimensions of the population (1/N) standard deviation across the
/// N repeated inferences of one step.
inline double execution_variability(const trace::SampleMatrix& samples) {
    const auto n = samples.size();
    const auto dims = samples.front().size();
    double total = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
        // Shifted two-pass variance about the first sample.
        const double origin = samples.front()[d];
        double shift = 0.0;
        for (const auto& row : samples) shift += row[d] - origin;
        shift /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& row : samples) {
            const double dev = (row[d] - origin) - shift;
            var += dev * dev;
        }
        total += std::sqrt(var / static_cast<double>(n));
    }
    return total / static_cast<double>(dims);
}

inline MetricSeries ev(const trace::RunTrace& trace) {
    if (!trace.has_ev_actions()) throw metric_unavailable("EV: trace carries no ev_actions");
    if (trace.header.ev_samples < 2) {
        throw metric_unavailable("EV: needs at least 2 inference samples, trace has " +
                                 std::to_string(trace.header.ev_samples));
    }
    MetricSeries out{MetricId::EV, trace.steps.front().t, {}};
    out.values.reserve(trace.steps.size());
    for (const auto& s : trace.steps) out.values.push_back(execution_variability(*s.ev_actions));
    return out;
}

}  // namespace vlaj::metrics
