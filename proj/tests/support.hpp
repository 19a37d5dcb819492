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

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vlaj/trace/types.hpp"

namespace vlaj::testing {

using trace::ObjectRole;
using trace::Pose;
using trace::RunTrace;
using trace::StepRecord;
using trace::Task;

/// Minimal valid trace: one target object, TCP following `tcp`, actions
/// equal to the TCP position padded with zeros to `dims`.
inline RunTrace make_trace(const std::vector<vec3>& tcp, int dims = 7, double dt = 1.0,
                           Task task = Task::pick_up) {
    RunTrace t;
    t.header.run_id = "fixture";
    t.header.task = task;
    t.header.action_dims = dims;
    t.header.dt = dt;
    t.header.objects.push_back({"cube", ObjectRole::target, {0.02, 0.02, 0.02}});
    if (task == Task::move_near) t.header.objects.push_back({"can", ObjectRole::secondary_target, {0.02, 0.02, 0.02}});
    if (task == Task::put_in || task == Task::put_on)
        t.header.objects.push_back({"plate", ObjectRole::destination, {0.05, 0.05, 0.01}});
    for (std::size_t i = 0; i < tcp.size(); ++i) {
        StepRecord s;
        s.t = static_cast<std::int64_t>(i);
        s.tcp = tcp[i];
        s.action.assign(static_cast<std::size_t>(dims), 0.0);
        for (int d = 0; d < dims && d < 3; ++d) s.action[static_cast<std::size_t>(d)] = tcp[i][static_cast<std::size_t>(d)];
        s.gripper_open = 1.0;
        for (const auto& o : t.header.objects) s.object_poses[o.object_id] = Pose{{0.4, 0.0, o.half_extents[2]}, {0, 0, 0, 1}};
        t.steps.push_back(std::move(s));
    }
    return t;
}

/// Sets every step's action to the given rows (dims follow the rows).
inline void set_actions(RunTrace& t, const std::vector<std::vector<double>>& actions) {
    t.header.action_dims = static_cast<int>(actions.front().size());
    for (std::size_t i = 0; i < t.steps.size(); ++i) t.steps[i].action = actions[i];
}

inline void set_object_track(RunTrace& t, const std::string& id, const std::vector<vec3>& positions) {
    for (std::size_t i = 0; i < t.steps.size(); ++i) t.steps[i].object_poses[id].position = positions[i];
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("vlaj-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }

    vec3 point(double scale = 1.0) { return {normal(scale), normal(scale), normal(scale)}; }

    std::vector<vec3> path(std::size_t n, double scale = 1.0) {
        std::vector<vec3> out(n);
        for (auto& p : out) p = point(scale);
        return out;
    }

    std::vector<std::vector<double>> matrix(std::size_t rows, std::size_t cols, double scale = 1.0) {
        std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
        for (auto& r : m)
            for (auto& x : r) x = normal(scale);
        return m;
    }

    /// Random probability vector of length n with some exact zeros.
    std::vector<double> simplex(std::size_t n, double zero_fraction = 0.3) {
        std::vector<double> p(n);
        double s = 0.0;
        for (auto& x : p) {
            x = uniform(0.0, 1.0) < zero_fraction ? 0.0 : -std::log(uniform(1e-12, 1.0));
            s += x;
        }
        if (s == 0.0) {
            p[0] = 1.0;
            return p;
        }
        for (auto& x : p) x /= s;
        return p;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace vlaj::testing
