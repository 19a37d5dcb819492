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
#include <span>
#include <string>
#include <string_view>

#include <boost/math/distributions/students_t.hpp>

#include "vlaj/core/error.hpp"
#include "vlaj/stats/rank.hpp"

namespace vlaj::stats {

enum class CorrelationCategory { none, weak, moderate, strong };

inline std::string_view to_string(CorrelationCategory c) {
    switch (c) {
        case CorrelationCategory::none: return "none";
        case CorrelationCategory::weak: return "weak";
        case CorrelationCategory::moderate: return "moderate";
        case CorrelationCategory::strong: return "strong";
    }
    return "?";
}

/// Cohen's bands on the signed coefficient: none < 0.10 <= weak <= 0.29 <
/// moderate <= 0.49 < strong. Negative coefficients land in `none`.
inline CorrelationCategory categorize_correlation(double rho) {
    if (rho < 0.10) return CorrelationCategory::none;
    if (rho <= 0.29) return CorrelationCategory::weak;
    if (rho <= 0.49) return CorrelationCategory::moderate;
    return CorrelationCategory::strong;
}

struct CorrelationResult {
    double rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    CorrelationCategory category = CorrelationCategory::none;
};

inline constexpr std::size_t min_correlation_samples = 4;

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw stats_error("correlation undefined: constant series");
    return sxy / std::sqrt(sxx * syy);
}

/// Spearman's rho (Pearson over average ranks) with a two-sided p-value from
/// the t approximation with n-2 degrees of freedom.
inline CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw stats_error("spearman: series lengths differ");
    if (x.size() < min_correlation_samples) {
        throw stats_error("spearman: needs at least " + std::to_string(min_correlation_samples) +
                          " pairs, got " + std::to_string(x.size()));
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    CorrelationResult r;
    r.n = x.size();
    r.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);
    r.category = categorize_correlation(r.rho);
    const double df = static_cast<double>(r.n) - 2.0;
    if (std::abs(r.rho) >= 1.0) {
        r.p_value = 0.0;
    } else {
        const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
        boost::math::students_t dist(df);
        r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
    }
    return r;
}

}  // namespace vlaj::stats
