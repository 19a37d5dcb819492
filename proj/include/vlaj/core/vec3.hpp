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

namespace vlaj {

using vec3 = std::array<double, 3>;

constexpr vec3 operator+(const vec3& a, const vec3& b) noexcept {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

constexpr vec3 operator-(const vec3& a, const vec3& b) noexcept {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

constexpr vec3 operator*(double k, const vec3& a) noexcept { return {k * a[0], k * a[1], k * a[2]}; }

constexpr double dot(const vec3& a, const vec3& b) noexcept {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const vec3& a) noexcept { return std::sqrt(dot(a, a)); }

inline double distance(const vec3& a, const vec3& b) noexcept { return norm(a - b); }

}  // namespace vlaj
