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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vlaj/core/error.hpp"
#include "vlaj/stats/rank.hpp"

namespace vlaj::stats {

enum class EffectMagnitude { negligible, small, medium, large };

/// Which group tends to hold the lower values.
enum class EffectDirection { group1_lower, group2_lower, none };

inline std::string_view to_string(EffectMagnitude m) {
    switch (m) {
        case EffectMagnitude::negligible: return "negligible";
        case EffectMagnitude::small: return "small";
        case EffectMagnitude::medium: return "medium";
        case EffectMagnitude::large: return "large";
    }
    return "?";
}

inline std::string_view to_string(EffectDirection d) {
    switch (d) {
        case EffectDirection::group1_lower: return "group1_lower";
        case EffectDirection::group2_lower: return "group2_lower";
        case EffectDirection::none: return "none";
    }
    return "?";
}

/// Romano bands on d = 2|A12 - 0.5|.
inline EffectMagnitude magnitude_from_d(double d) {
    if (d < 0.147) return EffectMagnitude::negligible;
    if (d < 0.33) return EffectMagnitude::small;
    if (d < 0.474) return EffectMagnitude::medium;
    return EffectMagnitude::large;
}

inline EffectMagnitude magnitude_from_a12(double a12) { return magnitude_from_d(2.0 * std::abs(a12 - 0.5)); }

inline EffectDirection direction_from_a12(double a12) {
    if (a12 < 0.5) return EffectDirection::group1_lower;
    if (a12 > 0.5) return EffectDirection::group2_lower;
    return EffectDirection::none;
}

struct EffectResult {
    double a12 = 0.5;
    double u_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    EffectMagnitude magnitude = EffectMagnitude::negligible;
    EffectDirection direction = EffectDirection::none;
    /// Set when n1 + n2 is too small for the normal approximation.
    std::optional<std::string> warning;
};

inline constexpr std::size_t min_normal_approx_samples = 8;
inline constexpr double max_exact_pairs = 10'000;

struct MannWhitneyOptions {
    /// Exact permutation p-value (with ties) instead of the normal
    /// approximation; only honored when n1 * n2 <= 10,000.
    bool exact = false;
};

namespace detail {

inline void require_groups(std::span<const double> g1, std::span<const double> g2, const char* who) {
    if (g1.empty() || g2.empty()) throw stats_error(std::string(who) + ": empty group");
}

/// Two-sided exact p-value of the rank sum of group 1 under random
/// assignment of the pooled (tied) ranks, by dynamic programming over
/// doubled ranks so every sum is an integer.
inline double exact_rank_sum_p(const std::vector<double>& pooled_ranks, std::size_t n1, double observed_r1) {
    const std::size_t n = pooled_ranks.size();
    std::vector<std::int64_t> w(n);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::llround(2.0 * pooled_ranks[i]);
        total += w[i];
    }
    // ways[k][s]: number of k-subsets of the items seen so far with doubled sum s.
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = std::min(n1, i + 1); k >= 1; --k) {
            auto& dst = ways[k];
            const auto& src = ways[k - 1];
            for (std::int64_t s = total; s >= w[i]; --s) {
                dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - w[i])];
            }
        }
    }
    // Expected doubled sum is n1 (n + 1); compare doubled deviations exactly.
    const std::int64_t expected2 = static_cast<std::int64_t>(n1) * static_cast<std::int64_t>(n + 1);
    const std::int64_t obs_dev = std::llabs(std::llround(2.0 * observed_r1) - expected2);
    double hit = 0.0;
    double all = 0.0;
    for (std::int64_t s = 0; s <= total; ++s) {
        const double c = ways[n1][static_cast<std::size_t>(s)];
        all += c;
        if (std::llabs(s - expected2) >= obs_dev) hit += c;
    }
    return std::min(1.0, hit / all);
}

}  // namespace detail

/// Vargha-Delaney A12 by exhaustive pair counting:
/// (#{g1 > g2} + 0.5 #{g1 = g2}) / (n1 n2).
inline double vargha_delaney(std::span<const double> g1, std::span<const double> g2) {
    detail::require_groups(g1, g2, "vargha_delaney");
    double wins = 0.0;
    for (double a : g1) {
        for (double b : g2) {
            if (a > b) {
                wins += 1.0;
            } else if (a == b) {
                wins += 0.5;
            }
        }
    }
    return wins / (static_cast<double>(g1.size()) * static_cast<double>(g2.size()));
}

/// Mann-Whitney U for group 1 from pooled average ranks. The two-sided
/// p-value uses the normal approximation with tie and continuity correction
/// unless an exact test is requested. A12 is U1 / (n1 n2).
inline EffectResult mann_whitney_u(std::span<const double> g1, std::span<const double> g2,
                                   const MannWhitneyOptions& opt = {}) {
    detail::require_groups(g1, g2, "mann_whitney_u");
    const double n1 = static_cast<double>(g1.size());
    const double n2 = static_cast<double>(g2.size());
    std::vector<double> pooled(g1.begin(), g1.end());
    pooled.insert(pooled.end(), g2.begin(), g2.end());
    const auto ranks = average_ranks(pooled);
    double r1 = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i) r1 += ranks[i];

    EffectResult r;
    r.n1 = g1.size();
    r.n2 = g2.size();
    r.u_statistic = r1 - n1 * (n1 + 1.0) / 2.0;
    r.a12 = r.u_statistic / (n1 * n2);
    r.magnitude = magnitude_from_a12(r.a12);
    r.direction = direction_from_a12(r.a12);
    if (r.n1 + r.n2 < min_normal_approx_samples) {
        r.warning = "n1 + n2 < " + std::to_string(min_normal_approx_samples) +
                    ": normal-approximation p-value is unreliable";
    }

    if (opt.exact && n1 * n2 <= max_exact_pairs) {
        r.p_value = detail::exact_rank_sum_p(ranks, r.n1, r1);
        r.warning.reset();
        return r;
    }
    const double n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term(pooled) / (n * (n - 1.0)));
    if (!(var > 0.0)) {
        r.p_value = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::abs(r.u_statistic - mu) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

}  // namespace vlaj::stats
