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
#include <optional>
#include <string>
#include <string_view>

#include "vlaj/core/error.hpp"

namespace vlaj {

/// Human quality judgement of an oracle-successful run. false_negative marks
/// a run the oracle accepted that should not count as a success.
enum class QualityLevel { high, medium, low, false_negative };

inline constexpr std::array<QualityLevel, 4> all_quality_levels{
    QualityLevel::high, QualityLevel::medium, QualityLevel::low, QualityLevel::false_negative};

inline constexpr std::array<QualityLevel, 3> graded_quality_levels{
    QualityLevel::high, QualityLevel::medium, QualityLevel::low};

inline std::string_view to_string(QualityLevel q) {
    switch (q) {
        case QualityLevel::high: return "high";
        case QualityLevel::medium: return "medium";
        case QualityLevel::low: return "low";
        case QualityLevel::false_negative: return "false_negative";
    }
    return "?";
}

inline std::optional<QualityLevel> try_parse_quality(std::string_view s) {
    for (auto q : all_quality_levels) {
        if (to_string(q) == s) return q;
    }
    return std::nullopt;
}

inline QualityLevel parse_quality(std::string_view s) {
    if (auto q = try_parse_quality(s)) return *q;
    throw label_error("unknown quality label '" + std::string(s) + "'");
}

/// Ordinal used for correlation: high=1, medium=2, low=3, so a positive rho
/// means lower metric values go with better quality.
inline std::optional<int> quality_rank(QualityLevel q) {
    switch (q) {
        case QualityLevel::high: return 1;
        case QualityLevel::medium: return 2;
        case QualityLevel::low: return 3;
        case QualityLevel::false_negative: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace vlaj
