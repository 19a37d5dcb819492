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
#include <string>
#include <vector>

#include "vlaj/trace/types.hpp"

namespace vlaj::trace {

inline constexpr double lift_threshold = 0.02;      // m above the initial height
inline constexpr std::size_t stable_steps = 5;      // consecutive steps for lift / placement
inline constexpr double near_threshold = 0.05;      // m between object centers
inline constexpr double contact_tolerance = 0.01;   // m, put_on resting gap
inline constexpr double grasp_open_threshold = 0.5; // gripper_open below this is closed
inline constexpr double grasp_distance = 0.05;      // m between tcp and target

/// Object playing role "B" in move_near: the secondary target, else the destination.
inline const ObjectDecl* reference_object(const TraceHeader& h) {
    if (const auto* b = h.find_role(ObjectRole::secondary_target)) return b;
    return h.find_role(ObjectRole::destination);
}

/// The object roles the task's oracle and OT need: target first, then the
/// reference / destination object when the task has one.
inline std::vector<const ObjectDecl*> required_objects(const TraceHeader& h) {
    std::vector<const ObjectDecl*> out;
    const auto* target = h.find_role(ObjectRole::target);
    if (!target) throw oracle_error("task " + std::string(to_string(h.task)) + " requires a target object");
    out.push_back(target);
    switch (h.task) {
        case Task::pick_up: break;
        case Task::move_near: {
            const auto* b = reference_object(h);
            if (!b) throw oracle_error("move_near requires a secondary_target (object B)");
            out.push_back(b);
            break;
        }
        case Task::put_in:
        case Task::put_on: {
            const auto* d = h.find_role(ObjectRole::destination);
            if (!d) throw oracle_error(std::string(to_string(h.task)) + " requires a destination object");
            out.push_back(d);
            break;
        }
    }
    return out;
}

/// Position of `object` at every step; throws when a step lacks its pose.
inline std::vector<vec3> object_track(const RunTrace& trace, const ObjectDecl& object) {
    std::vector<vec3> out;
    out.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        auto it = s.object_poses.find(object.object_id);
        if (it == s.object_poses.end()) {
            throw oracle_error("missing pose for " + std::string(to_string(object.object_role)) +
                               " '" + object.object_id + "' at step t=" + std::to_string(s.t));
        }
        out.push_back(it->second.position);
    }
    return out;
}

struct Aabb {
    vec3 lo;
    vec3 hi;

    static Aabb around(const vec3& center, const vec3& half) { return {center - half, center + half}; }

    bool contains(const Aabb& inner) const {
        for (int i = 0; i < 3; ++i) {
            if (inner.lo[i] < lo[i] || inner.hi[i] > hi[i]) return false;
        }
        return true;
    }

    bool overlaps_xy(const Aabb& other) const {
        for (int i = 0; i < 2; ++i) {
            if (other.hi[i] < lo[i] || other.lo[i] > hi[i]) return false;
        }
        return true;
    }
};

namespace detail {

inline bool lifted(const std::vector<vec3>& target) {
    const double z0 = target.front()[2];
    std::size_t run = 0;
    for (const auto& p : target) {
        run = (p[2] - z0 >= lift_threshold) ? run + 1 : 0;
        if (run >= stable_steps) return true;
    }
    return false;
}

template <typename Pred>
bool holds_for_final_steps(std::size_t n, Pred pred) {
    for (std::size_t i = n - stable_steps; i < n; ++i) {
        if (!pred(i)) return false;
    }
    return true;
}

}  // namespace detail

/// Symbolic success predicate for the trace's task.
///
/// pick_up:   target z >= initial z + 0.02 m for 5 consecutive steps.
/// move_near: final distance between target and object B centers <= 0.05 m.
/// put_in:    target AABB inside the destination AABB over the final 5 steps.
/// put_on:    AABBs overlap in x/y and the target's bottom face sits within
///            0.01 m of the destination's top face over the final 5 steps.
inline bool success_oracle(const RunTrace& trace) {
    if (trace.steps.size() < stable_steps) {
        throw oracle_error("trace has " + std::to_string(trace.steps.size()) +
                           " steps; the oracle needs at least " + std::to_string(stable_steps));
    }
    const auto objects = required_objects(trace.header);
    const auto target = object_track(trace, *objects[0]);
    const std::size_t n = target.size();

    switch (trace.header.task) {
        case Task::pick_up: return detail::lifted(target);
        case Task::move_near: {
            const auto b = object_track(trace, *objects[1]);
            return distance(target.back(), b.back()) <= near_threshold;
        }
        case Task::put_in: {
            const auto dest = object_track(trace, *objects[1]);
            return detail::holds_for_final_steps(n, [&](std::size_t i) {
                return Aabb::around(dest[i], objects[1]->half_extents)
                    .contains(Aabb::around(target[i], objects[0]->half_extents));
            });
        }
        case Task::put_on: {
            const auto dest = object_track(trace, *objects[1]);
            return detail::holds_for_final_steps(n, [&](std::size_t i) {
                const auto a = Aabb::around(target[i], objects[0]->half_extents);
                const auto d = Aabb::around(dest[i], objects[1]->half_extents);
                return d.overlaps_xy(a) && std::abs(a.lo[2] - d.hi[2]) <= contact_tolerance;
            });
        }
    }
    return false;
}

struct GraspSeries {
    std::vector<bool> grasped;
    /// Set when the series fell back to all-false.
    std::optional<std::string> warning;
};

/// Per-step grasp state. Explicit `grasped` flags are passed through when
/// every step carries one; otherwise the gripper closing within 0.05 m of the
/// target latches the grasp until the gripper opens again.
inline GraspSeries derive_grasped(const RunTrace& trace) {
    GraspSeries out;
    const auto n = trace.steps.size();
    out.grasped.assign(n, false);

    bool explicit_flags = n > 0;
    for (const auto& s : trace.steps) explicit_flags = explicit_flags && s.grasped.has_value();
    if (explicit_flags) {
        for (std::size_t i = 0; i < n; ++i) out.grasped[i] = *trace.steps[i].grasped;
        return out;
    }

    for (const auto& s : trace.steps) {
        if (!s.gripper_open) {
            out.warning = "gripper_open missing at step t=" + std::to_string(s.t) +
                          "; grasp state defaults to false";
            return out;
        }
    }
    const auto* target = trace.header.find_role(ObjectRole::target);
    if (!target) {
        out.warning = "no target object declared; grasp state defaults to false";
        return out;
    }

    bool latched = false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = trace.steps[i];
        const bool closed = *s.gripper_open < grasp_open_threshold;
        if (!closed) {
            latched = false;
        } else if (!latched) {
            auto it = s.object_poses.find(target->object_id);
            latched = it != s.object_poses.end() && distance(s.tcp, it->second.position) < grasp_distance;
        }
        out.grasped[i] = latched;
    }
    return out;
}

}  // namespace vlaj::trace
