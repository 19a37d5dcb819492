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
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vlaj/core/vec3.hpp"
#include "vlaj/metrics/difference.hpp"
#include "vlaj/metrics/series.hpp"
#include "vlaj/trace/oracle.hpp"
#include "vlaj/trace/types.hpp"

namespace vlaj::metrics {

/// Euclidean norm of the order-`Order` backward difference of a 3-D path.
template <std::size_t Order>
std::vector<double> tcp_instability(std::span<const vec3> path, std::size_t window = default_window) {
    return windowed_differences<Order>(path, window, [](const std::vector<double>& diff) {
        return std::sqrt(diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]);
    });
}

namespace detail {

inline std::vector<vec3> tcp_path(const trace::RunTrace& trace) {
    std::vector<vec3> out;
    out.reserve(trace.steps.size());
    for (const auto& s : trace.steps) out.push_back(s.tcp);
    return out;
}

template <std::size_t Order>
MetricSeries tcp_series(const trace::RunTrace& trace, MetricId id, const MetricOptions& opt) {
    if (trace.steps.size() <= Order) {
        throw undefined_series(std::string(to_string(id)) + " needs at least " +
                               std::to_string(Order + 1) + " steps, trace has " +
                               std::to_string(trace.steps.size()));
    }
    const auto path = tcp_path(trace);
    return {id, trace.steps.front().t + static_cast<std::int64_t>(Order),
            tcp_instability<Order>(std::span<const vec3>(path), opt.window)};
}

}  // namespace detail

inline MetricSeries tcp_pi(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    return detail::tcp_series<1>(trace, MetricId::TCP_PI, opt);
}

inline MetricSeries tcp_vi(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    return detail::tcp_series<2>(trace, MetricId::TCP_VI, opt);
}

inline MetricSeries tcp_ai(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    return detail::tcp_series<3>(trace, MetricId::TCP_AI, opt);
}

/// RMS jerk of a path sampled every `dt` seconds: the third backward
/// difference divided by dt^3, averaged in square over the T-3 samples.
inline double rms_jerk(std::span<const vec3> path, double dt, std::size_t window = default_window) {
    if (path.size() < 4) {
        throw undefined_series("TI needs at least 4 steps, trace has " + std::to_string(path.size()));
    }
    const double dt3 = dt * dt * dt;
    const auto third = windowed_differences<3>(path, window, [&](const std::vector<double>& diff) {
        const double jx = diff[0] / dt3;
        const double jy = diff[1] / dt3;
        const double jz = diff[2] / dt3;
        return jx * jx + jy * jy + jz * jz;
    });
    double sum = 0.0;
    for (double sq : third) sum += sq;
    return std::sqrt(sum / static_cast<double>(third.size()));
}

/// Trajectory Instability of the whole run.
inline double ti(const trace::RunTrace& trace, const MetricOptions& opt = {}) {
    const auto path = detail::tcp_path(trace);
    return rms_jerk(std::span<const vec3>(path), trace.header.dt, opt.window);
}

/// Task goal distance d_t per step, starting at the first step.
struct GoalDistance {
    std::int64_t first_step = 0;
    std::vector<double> d;
    /// Forwarded from derive_grasped when it fell back to all-false.
    std::optional<std::string> warning;
};

/// Fixed end point of the placement phase: the destination's initial center
/// for put_in/put_on, and for move_near the point 0.05 m from B's initial
/// center toward the target's initial center.
inline vec3 goal_point(const trace::RunTrace& trace) {
    const auto objects = trace::required_objects(trace.header);
    if (objects.size() < 2) throw oracle_error("task has no goal object");
    const auto other = trace::object_track(trace, *objects[1]);
    if (trace.header.task != trace::Task::move_near) return other.front();
    const auto target = trace::object_track(trace, *objects[0]);
    const vec3 toward = target.front() - other.front();
    const double len = norm(toward);
    if (len == 0.0) return other.front();
    return other.front() + (trace::near_threshold / len) * toward;
}

inline GoalDistance ot_distance(const trace::RunTrace& trace) {
    if (trace.steps.empty()) throw undefined_series("OT: empty trace");
    const auto objects = trace::required_objects(trace.header);
    const auto target = trace::object_track(trace, *objects[0]);

    GoalDistance out;
    out.first_step = trace.steps.front().t;
    out.d.reserve(trace.steps.size());
    if (trace.header.task == trace::Task::pick_up) {
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
            out.d.push_back(distance(trace.steps[i].tcp, target[i]));
        }
        return out;
    }

    const vec3 end = goal_point(trace);
    const auto grasp = trace::derive_grasped(trace);
    out.warning = grasp.warning;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& tcp = trace.steps[i].tcp;
        const double to_end = distance(tcp, end);
        out.d.push_back(grasp.grasped[i] ? to_end : distance(tcp, target[i]) + to_end);
    }
    return out;
}

/// Maps a step change in goal distance to [0, 1]; 0.5 means no progress.
inline double ot_score(double delta) { return 0.5 * (1.0 + std::clamp(delta, -1.0, 1.0)); }

inline MetricSeries ot_from_distance(const GoalDistance& g) {
    if (g.d.size() < 2) throw undefined_series("OT needs at least 2 steps");
    MetricSeries out{MetricId::OT, g.first_step + 1, {}};
    out.values.reserve(g.d.size() - 1);
    for (std::size_t i = 1; i < g.d.size(); ++i) out.values.push_back(ot_score(g.d[i] - g.d[i - 1]));
    return out;
}

inline MetricSeries ot(const trace::RunTrace& trace) { return ot_from_distance(ot_distance(trace)); }

}  // namespace vlaj::metrics
