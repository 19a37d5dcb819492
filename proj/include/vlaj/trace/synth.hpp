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
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vlaj/trace/oracle.hpp"
#include "vlaj/trace/types.hpp"

namespace vlaj::trace {

enum class Profile { smooth, jittery, stalled, failing };

inline std::string_view to_string(Profile p) {
    switch (p) {
        case Profile::smooth: return "smooth";
        case Profile::jittery: return "jittery";
        case Profile::stalled: return "stalled";
        case Profile::failing: return "failing";
    }
    return "?";
}

inline Profile parse_profile(std::string_view s) {
    for (Profile p : {Profile::smooth, Profile::jittery, Profile::stalled, Profile::failing}) {
        if (to_string(p) == s) return p;
    }
    throw error("unknown profile '" + std::string(s) + "'");
}

struct SynthOptions {
    std::size_t steps = 60;
    double dt = 0.2;
    /// Per-axis standard deviation (m) of the jittery profile's TCP noise.
    double jitter = 0.004;
    /// Noise multiplier for the failing profile relative to `jitter`.
    double failing_jitter_scale = 3.0;
    int token_count = 7;
    int vocab_size = 256;
    int token_entries = 8;
    int ev_samples = 4;
    std::string model_id = "synthetic";
};

namespace detail {

struct Keyframe {
    std::size_t step;
    vec3 tcp;
    double gripper;
};

inline double min_jerk(double tau) {
    tau = std::clamp(tau, 0.0, 1.0);
    return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

/// Minimum-jerk interpolation between keyframes; gripper switches at keyframes.
inline void interpolate(const std::vector<Keyframe>& keys, std::size_t n, std::vector<vec3>& tcp,
                        std::vector<double>& gripper) {
    tcp.assign(n, keys.back().tcp);
    gripper.assign(n, keys.back().gripper);
    for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
        const auto& a = keys[k];
        const auto& b = keys[k + 1];
        for (std::size_t i = a.step; i < b.step && i < n; ++i) {
            const double s = min_jerk(static_cast<double>(i - a.step) / static_cast<double>(b.step - a.step));
            tcp[i] = a.tcp + s * (b.tcp - a.tcp);
            gripper[i] = a.gripper;
        }
    }
}

inline std::string instruction_for(Task task) {
    switch (task) {
        case Task::pick_up: return "pick up the coke can";
        case Task::move_near: return "move the coke can near the apple";
        case Task::put_in: return "put the eggplant into the basket";
        case Task::put_on: return "put the spoon on the towel";
    }
    return "";
}

}  // namespace detail

/// Deterministic synthetic run for tests, fixtures and the `synth` command.
///
/// smooth:  minimum-jerk pick/transport/place plan that satisfies the oracle.
/// jittery: the smooth plan with Gaussian TCP noise on every step before the
///          release (pick_up: before the final hold), so endpoints match.
/// stalled: the robot never moves.
/// failing: an erratic plan that closes the gripper beside the target, so no
///          object ever moves and the oracle fails.
inline RunTrace generate_synthetic(Profile profile, Task task, std::uint64_t seed,
                                   const SynthOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = std::max<std::size_t>(opt.steps, 40);

    RunTrace trace;
    auto& h = trace.header;
    h.run_id = std::string(to_string(profile)) + "-" + std::string(to_string(task)) + "-" +
               std::to_string(seed);
    h.task = task;
    h.instruction = detail::instruction_for(task);
    h.robot = (task == Task::pick_up || task == Task::move_near) ? "google_robot" : "widowx";
    h.model_id = opt.model_id;
    h.action_dims = 7;
    h.action_horizon = 1;
    h.dt = opt.dt;
    h.token_count = opt.token_count;
    h.vocab_size = opt.vocab_size;
    h.ev_samples = opt.ev_samples;

    // Scene layout on a table at z = 0.
    const vec3 target_half{0.02, 0.02, 0.02};
    const vec3 target0{0.35 + 0.15 * unif(rng), -0.15 + 0.3 * unif(rng), target_half[2]};
    const double angle = 2.0 * std::numbers::pi * unif(rng);
    const double radius = 0.2 + 0.1 * unif(rng);
    const vec3 dir{std::cos(angle), std::sin(angle), 0.0};

    h.objects.push_back({"target", ObjectRole::target, target_half});
    vec3 other0{};
    vec3 place{};  // where the target ends up on success
    switch (task) {
        case Task::pick_up: {
            other0 = target0 + radius * dir;
            h.objects.push_back({"confounder", ObjectRole::confounder, target_half});
            break;
        }
        case Task::move_near: {
            other0 = target0 + radius * dir;
            h.objects.push_back({"object_b", ObjectRole::secondary_target, target_half});
            // 0.03 m from B, on B's side facing the target's start.
            place = other0 + (-0.03) * dir;
            place[2] = target_half[2];
            break;
        }
        case Task::put_in: {
            const vec3 half{0.06, 0.06, 0.04};
            other0 = target0 + radius * dir;
            other0[2] = half[2];
            h.objects.push_back({"basket", ObjectRole::destination, half});
            place = {other0[0], other0[1], 0.001 + target_half[2]};
            break;
        }
        case Task::put_on: {
            const vec3 half{0.05, 0.05, 0.01};
            other0 = target0 + radius * dir;
            other0[2] = half[2];
            h.objects.push_back({"towel", ObjectRole::destination, half});
            place = {other0[0], other0[1], 2.0 * half[2] + target_half[2]};
            break;
        }
    }
    const std::string other_id = h.objects.back().object_id;

    const vec3 home{0.25 + 0.05 * unif(rng), -0.05 + 0.1 * unif(rng), 0.30};
    const vec3 up{0.0, 0.0, 0.08};
    const auto at = [&](double frac) { return static_cast<std::size_t>(frac * static_cast<double>(n - 1)); };

    // Failing runs reach for a point beside the target, outside the grasp radius.
    vec3 reach = target0;
    if (profile == Profile::failing) {
        const double a = 2.0 * std::numbers::pi * unif(rng);
        reach = target0 + vec3{0.12 * std::cos(a), 0.12 * std::sin(a), 0.0};
    }

    std::vector<detail::Keyframe> keys;
    std::size_t release_step = n;  // first step after which the object is left alone
    if (profile == Profile::stalled) {
        keys = {{0, home, 1.0}, {n - 1, home, 1.0}};
    } else if (task == Task::pick_up) {
        keys = {{0, home, 1.0},
                {at(0.25), reach + up, 1.0},
                {at(0.40), reach, 1.0},
                {at(0.47), reach, 0.0},
                {at(0.75), reach + vec3{0.0, 0.0, 0.12}, 0.0},
                {n - 1, reach + vec3{0.0, 0.0, 0.12}, 0.0}};
        release_step = at(0.75);
    } else {
        const vec3 drop = profile == Profile::failing ? place + vec3{0.0, 0.0, 0.05} : place;
        keys = {{0, home, 1.0},
                {at(0.20), reach + up, 1.0},
                {at(0.32), reach, 1.0},
                {at(0.38), reach, 0.0},
                {at(0.58), drop + up, 0.0},
                {at(0.70), drop, 0.0},
                {at(0.76), drop, 1.0},
                {at(0.88), drop + up, 1.0},
                {n - 1, drop + up, 1.0}};
        release_step = at(0.70);
    }

    std::vector<vec3> tcp;
    std::vector<double> gripper;
    detail::interpolate(keys, n, tcp, gripper);

    double noise = 0.0;
    if (profile == Profile::jittery) noise = opt.jitter;
    if (profile == Profile::failing) noise = opt.jitter * opt.failing_jitter_scale;
    for (std::size_t i = 0; i < n; ++i) {
        const bool frozen = profile == Profile::jittery && i >= release_step;
        if (noise > 0.0 && !frozen) {
            tcp[i] = tcp[i] + vec3{noise * gauss(rng), noise * gauss(rng), noise * gauss(rng)};
        }
    }

    // Token confidence and repeated-inference spread per profile.
    double confidence = 0.9;
    double ev_spread = 0.001;
    switch (profile) {
        case Profile::smooth: confidence = 0.9; ev_spread = 0.001; break;
        case Profile::jittery: confidence = 0.7; ev_spread = 0.004; break;
        case Profile::stalled: confidence = 0.95; ev_spread = 0.0; break;
        case Profile::failing: confidence = 0.5; ev_spread = 0.01; break;
    }

    const vec3 orientation0{0.0, std::numbers::pi / 2.0, 0.0};
    vec3 target = target0;
    bool held = false;
    bool was_closed = false;
    for (std::size_t i = 0; i < n; ++i) {
        StepRecord s;
        s.t = static_cast<std::int64_t>(i);
        s.tcp = tcp[i];
        s.gripper_open = gripper[i];

        // The object is taken only at the moment the gripper closes on it.
        const bool closed = gripper[i] < grasp_open_threshold;
        if (!closed) {
            held = false;
        } else if (!was_closed) {
            held = distance(tcp[i], target) < grasp_distance;
        }
        was_closed = closed;
        if (held) target = tcp[i];

        vec3 rpy = orientation0;
        if (noise > 0.0 && !(profile == Profile::jittery && i >= release_step)) {
            rpy = rpy + vec3{noise * gauss(rng), noise * gauss(rng), noise * gauss(rng)};
        }
        s.action = {tcp[i][0], tcp[i][1], tcp[i][2], rpy[0], rpy[1], rpy[2], gripper[i]};

        if (opt.ev_samples > 0) {
            SampleMatrix m(static_cast<std::size_t>(opt.ev_samples), s.action);
            for (auto& row : m) {
                for (auto& a : row) a += ev_spread * gauss(rng);
            }
            s.ev_actions = std::move(m);
        }

        if (opt.token_count > 0) {
            std::vector<TokenDistribution> tokens;
            for (int k = 0; k < opt.token_count; ++k) {
                TokenDistribution d;
                d.vocab_size = opt.vocab_size;
                const double top = std::clamp(confidence + 0.05 * gauss(rng), 0.2, 0.99);
                const int listed = std::min(opt.token_entries, opt.vocab_size);
                std::set<std::int64_t> ids;
                while (static_cast<int>(ids.size()) < listed) {
                    ids.insert(static_cast<std::int64_t>(unif(rng) * opt.vocab_size) % opt.vocab_size);
                }
                // Top entry, then a geometric split of the rest; 10% of it
                // stays in the tail when the vocabulary has unlisted tokens.
                const bool has_tail = listed < opt.vocab_size;
                double share = (1.0 - top) * (has_tail ? 0.9 : 1.0);
                auto it = ids.begin();
                d.entries[*it++] = top;
                for (; it != ids.end(); ++it) {
                    const double p = (std::next(it) == ids.end() && !has_tail) ? share : share * 0.5;
                    d.entries[*it] = p;
                    share -= p;
                }
                double sum = 0.0;
                for (const auto& [id, p] : d.entries) sum += p;
                d.tail_mass = has_tail ? std::max(0.0, 1.0 - sum) : 0.0;
                tokens.push_back(std::move(d));
            }
            s.token_probs = std::move(tokens);
        }

        s.object_poses["target"] = Pose{target, {0.0, 0.0, 0.0, 1.0}};
        s.object_poses[other_id] = Pose{other0, {0.0, 0.0, 0.0, 1.0}};
        trace.steps.push_back(std::move(s));
    }
    trace.outcome.oracle_success = success_oracle(trace);
    return trace;
}

}  // namespace vlaj::trace
