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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vlaj/core/error.hpp"
#include "vlaj/core/vec3.hpp"

namespace vlaj::trace {

enum class Task { pick_up, move_near, put_in, put_on };

enum class ObjectRole { target, secondary_target, destination, confounder };

inline constexpr std::array<Task, 4> all_tasks{Task::pick_up, Task::move_near, Task::put_in,
                                               Task::put_on};

inline std::string_view to_string(Task task) {
    switch (task) {
        case Task::pick_up: return "pick_up";
        case Task::move_near: return "move_near";
        case Task::put_in: return "put_in";
        case Task::put_on: return "put_on";
    }
    return "?";
}

inline Task parse_task(std::string_view s) {
    for (Task t : all_tasks) {
        if (to_string(t) == s) return t;
    }
    throw trace_error("unknown task '" + std::string(s) + "'");
}

inline std::string_view to_string(ObjectRole role) {
    switch (role) {
        case ObjectRole::target: return "target";
        case ObjectRole::secondary_target: return "secondary_target";
        case ObjectRole::destination: return "destination";
        case ObjectRole::confounder: return "confounder";
    }
    return "?";
}

inline ObjectRole parse_object_role(std::string_view s) {
    for (ObjectRole r : {ObjectRole::target, ObjectRole::secondary_target, ObjectRole::destination,
                         ObjectRole::confounder}) {
        if (to_string(r) == s) return r;
    }
    throw trace_error("unknown object_role '" + std::string(s) + "'");
}

/// Half-extent used for oracle geometry when an object declaration carries none.
inline constexpr double default_half_extent = 0.02;

struct ObjectDecl {
    std::string object_id;
    ObjectRole object_role = ObjectRole::confounder;
    /// Axis-aligned half-size in meters; only the put_in/put_on oracles read it.
    vec3 half_extents{default_half_extent, default_half_extent, default_half_extent};

    friend bool operator==(const ObjectDecl&, const ObjectDecl&) = default;
};

struct TraceHeader {
    std::string run_id;
    Task task = Task::pick_up;
    std::string instruction;
    std::string robot;
    /// Which policy produced the run; report tables group on (model_id, task).
    std::string model_id = "unknown";
    int action_dims = 7;
    int action_horizon = 1;
    double dt = 1.0;
    int token_count = 0;
    int vocab_size = 0;
    int ev_samples = 0;
    std::vector<ObjectDecl> objects;

    const ObjectDecl* find_role(ObjectRole role) const {
        for (const auto& o : objects) {
            if (o.object_role == role) return &o;
        }
        return nullptr;
    }

    const ObjectDecl* find_object(std::string_view id) const {
        for (const auto& o : objects) {
            if (o.object_id == id) return &o;
        }
        return nullptr;
    }

    friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct Pose {
    vec3 position{};
    /// (qx, qy, qz, qw)
    std::array<double, 4> orientation{0.0, 0.0, 0.0, 1.0};

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Sparse per-token distribution. Probability mass not listed in `entries`
/// is `tail_mass`, assumed spread uniformly over the `vocab_size - entries.size()`
/// unlisted tokens.
struct TokenDistribution {
    std::map<std::int64_t, double> entries;
    double tail_mass = 0.0;
    std::int64_t vocab_size = 0;

    std::int64_t unlisted() const noexcept {
        return vocab_size - static_cast<std::int64_t>(entries.size());
    }

    /// Probability of each unlisted token under the uniform-tail assumption.
    double tail_per_token() const noexcept {
        const auto k = unlisted();
        return k > 0 ? tail_mass / static_cast<double>(k) : 0.0;
    }

    friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;
};

/// One row per repeated inference, each of length D.
using SampleMatrix = std::vector<std::vector<double>>;

struct StepRecord {
    std::int64_t t = 0;
    std::vector<double> action;
    vec3 tcp{};
    std::optional<double> gripper_open;
    std::optional<bool> grasped;
    std::optional<SampleMatrix> ev_actions;
    std::optional<std::vector<TokenDistribution>> token_probs;
    std::map<std::string, Pose> object_poses;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct Outcome {
    std::optional<bool> oracle_success;
    std::optional<std::string> notes;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct RunTrace {
    TraceHeader header;
    std::vector<StepRecord> steps;
    Outcome outcome;

    std::size_t size() const noexcept { return steps.size(); }

    /// True when every step carries token distributions.
    bool has_token_probs() const {
        if (steps.empty() || header.token_count == 0) return false;
        for (const auto& s : steps) {
            if (!s.token_probs) return false;
        }
        return true;
    }

    /// True when every step carries an N x D repeated-inference matrix.
    bool has_ev_actions() const {
        if (steps.empty()) return false;
        for (const auto& s : steps) {
            if (!s.ev_actions) return false;
        }
        return true;
    }

    friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

}  // namespace vlaj::trace
