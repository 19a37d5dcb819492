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
#include <cstddef>
#include <optional>
#include <set>
#include <string>

#include "vlaj/trace/types.hpp"

namespace vlaj::trace {

inline constexpr double probability_tolerance = 1e-6;
inline constexpr double quaternion_tolerance = 1e-6;

namespace detail {

inline void require(bool cond, const std::string& what, std::optional<std::size_t> line) {
    if (!cond) throw trace_error(what, line);
}

inline std::string at_step(std::int64_t t) { return "step t=" + std::to_string(t) + ": "; }

}  // namespace detail

inline void validate_header(const TraceHeader& h, std::optional<std::size_t> line = std::nullopt) {
    using detail::require;
    require(!h.run_id.empty(), "header: run_id is empty", line);
    require(h.action_dims >= 1, "header: action_dims must be >= 1", line);
    require(h.action_horizon >= 1, "header: action_horizon must be >= 1", line);
    require(std::isfinite(h.dt) && h.dt > 0.0, "header: dt must be > 0", line);
    require(h.token_count >= 0, "header: token_count must be >= 0", line);
    require(h.vocab_size >= 0, "header: vocab_size must be >= 0", line);
    require(h.ev_samples >= 0, "header: ev_samples must be >= 0", line);
    require(h.token_count == 0 || h.vocab_size >= 2,
            "header: vocab_size must be >= 2 when token_count > 0", line);

    std::set<std::string> ids;
    for (const auto& o : h.objects) {
        require(!o.object_id.empty(), "header: empty object_id", line);
        require(ids.insert(o.object_id).second, "header: duplicate object_id '" + o.object_id + "'",
                line);
        for (double e : o.half_extents) {
            require(std::isfinite(e) && e >= 0.0,
                    "header: half_extents of '" + o.object_id + "' must be >= 0", line);
        }
    }
    require(h.find_role(ObjectRole::target) != nullptr, "header: task requires a target object",
            line);
    if (h.task == Task::put_in || h.task == Task::put_on) {
        require(h.find_role(ObjectRole::destination) != nullptr,
                "header: task " + std::string(to_string(h.task)) + " requires a destination object",
                line);
    }
}

inline void validate_distribution(const TokenDistribution& d, std::int64_t t, std::size_t index,
                                  std::optional<std::size_t> line) {
    using detail::require;
    const std::string where = detail::at_step(t) + "token " + std::to_string(index) + ": ";
    require(d.vocab_size >= 2, where + "vocab_size must be >= 2", line);
    require(static_cast<std::int64_t>(d.entries.size()) <= d.vocab_size,
            where + "more entries than vocab_size", line);
    double sum = 0.0;
    for (const auto& [id, p] : d.entries) {
        require(id >= 0 && id < d.vocab_size, where + "token id " + std::to_string(id) + " out of range",
                line);
        require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
                where + "probability outside [0,1] for token " + std::to_string(id), line);
        sum += p;
    }
    require(std::isfinite(d.tail_mass) && d.tail_mass >= 0.0, where + "tail_mass must be >= 0", line);
    require(d.tail_mass == 0.0 || d.unlisted() > 0,
            where + "tail_mass > 0 but every vocabulary token is listed", line);
    require(std::abs(sum + d.tail_mass - 1.0) <= probability_tolerance,
            where + "distribution is not normalized (entries + tail_mass = " +
                std::to_string(sum + d.tail_mass) + ")",
            line);
}

inline void validate_pose(const Pose& p, const std::string& where, std::optional<std::size_t> line) {
    using detail::require;
    for (double x : p.position) require(std::isfinite(x), where + "non-finite position", line);
    double n2 = 0.0;
    for (double q : p.orientation) {
        require(std::isfinite(q), where + "non-finite orientation", line);
        n2 += q * q;
    }
    require(std::abs(std::sqrt(n2) - 1.0) <= quaternion_tolerance,
            where + "orientation quaternion is not unit norm", line);
}

/// Checks one step against the header and its predecessor's index.
inline void validate_step(const TraceHeader& h, const StepRecord& s,
                          std::optional<std::int64_t> previous_t,
                          std::optional<std::size_t> line = std::nullopt) {
    using detail::require;
    const std::string where = detail::at_step(s.t);
    require(s.t >= 0, where + "t must be >= 0", line);
    if (previous_t) {
        require(s.t == *previous_t + 1,
                where + "t must increase by exactly 1 (previous t=" + std::to_string(*previous_t) + ")",
                line);
    }
    require(static_cast<int>(s.action.size()) == h.action_dims,
            where + "action has " + std::to_string(s.action.size()) + " dims, expected " +
                std::to_string(h.action_dims),
            line);
    for (double a : s.action) require(std::isfinite(a), where + "non-finite action value", line);
    for (double x : s.tcp) require(std::isfinite(x), where + "non-finite tcp", line);
    if (s.gripper_open) {
        require(*s.gripper_open >= 0.0 && *s.gripper_open <= 1.0,
                where + "gripper_open outside [0,1]", line);
    }
    if (s.ev_actions) {
        const auto& m = *s.ev_actions;
        bool ok = static_cast<int>(m.size()) == h.ev_samples;
        for (const auto& row : m) ok = ok && static_cast<int>(row.size()) == h.action_dims;
        require(ok,
                where + "ev_actions shape must be " + std::to_string(h.ev_samples) + "x" +
                    std::to_string(h.action_dims) + " (got " + std::to_string(m.size()) + " rows)",
                line);
        for (const auto& row : m) {
            for (double a : row) require(std::isfinite(a), where + "non-finite ev_actions value", line);
        }
    }
    if (s.token_probs) {
        require(static_cast<int>(s.token_probs->size()) == h.token_count,
                where + "token_probs has " + std::to_string(s.token_probs->size()) +
                    " tokens, expected " + std::to_string(h.token_count),
                line);
        for (std::size_t i = 0; i < s.token_probs->size(); ++i) {
            validate_distribution((*s.token_probs)[i], s.t, i, line);
        }
    }
    for (const auto& [id, pose] : s.object_poses) {
        require(h.find_object(id) != nullptr, where + "pose for undeclared object '" + id + "'", line);
        validate_pose(pose, where + "object '" + id + "': ", line);
    }
}

inline void validate(const RunTrace& trace) {
    validate_header(trace.header);
    std::optional<std::int64_t> prev;
    for (const auto& s : trace.steps) {
        validate_step(trace.header, s, prev);
        prev = s.t;
    }
}

}  // namespace vlaj::trace
