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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"
#include "vlaj/core/quality_level.hpp"
#include "vlaj/stats/correlation.hpp"
#include "vlaj/stats/effect.hpp"
#include "vlaj/stats/kappa.hpp"
#include "vlaj/stats/rank.hpp"

using namespace vlaj;
using namespace vlaj::stats;
using vlaj::testing::Gen;

namespace {

// Independent rank oracle: rank = 1 + #{less} + (#{equal} - 1) / 2.
std::vector<double> rank_oracle(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double less = 0, equal = 0;
        for (double y : x) {
            less += y < x[i];
            equal += y == x[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    long double mx = 0, my = 0;
    const auto n = static_cast<long double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

std::vector<double> tied_sample(Gen& g, std::size_t n, int levels) {
    std::vector<double> v(n);
    for (auto& x : v) x = levels > 0 ? std::floor(g.uniform(0, levels)) : g.normal();
    return v;
}

}  // namespace

TEST(Ranks, AverageTies) {
    EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
    EXPECT_EQ(tie_term(std::vector<double>{1, 1, 2, 3, 3, 3}), 6.0 + 24.0);
    Gen g(4);
    for (int i = 0; i < 100; ++i) {
        const auto x = tied_sample(g, g.index(1, 40), i % 3 == 0 ? 0 : 5);
        EXPECT_EQ(average_ranks(x), rank_oracle(x));
    }
}

TEST(Spearman, MatchesRankThenPearsonOracle) {
    Gen g(5);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = g.index(4, 80);
        auto x = tied_sample(g, n, i % 2 ? 6 : 0);
        auto y = tied_sample(g, n, i % 3 ? 4 : 0);
        for (std::size_t k = 0; k < n; ++k) y[k] += (i % 5) * 0.3 * x[k];
        const auto rx = rank_oracle(x), ry = rank_oracle(y);
        if (std::all_of(rx.begin(), rx.end(), [&](double r) { return r == rx[0]; }) ||
            std::all_of(ry.begin(), ry.end(), [&](double r) { return r == ry[0]; })) {
            EXPECT_THROW(spearman(x, y), stats_error);
            continue;
        }
        EXPECT_NEAR(spearman(x, y).rho, pearson_oracle(rx, ry), 1e-10);
    }
}

TEST(Spearman, ReferenceValues) {
    // Reference values from an independent statistics package (t approximation).
    const std::vector<double> x{1, 2, 2, 3, 4, 5, 5, 5, 6, 7}, y{2, 1, 3, 3, 5, 4, 6, 5, 7, 8};
    const auto r = spearman(x, y);
    EXPECT_NEAR(r.rho, 0.9257365248800182, 1e-12);
    EXPECT_NEAR(r.p_value, 0.00012157407536297871, 1e-12);
    EXPECT_EQ(r.category, CorrelationCategory::strong);
    EXPECT_EQ(r.n, 10u);

    const std::vector<double> a{0.3, 1.2, -0.5, 2.2, 0.9, 1.1, -1.0, 0.0}, b{1.0, 0.2, 0.5, -0.3, 0.1, 0.4, 0.9, 0.6};
    const auto s = spearman(a, b);
    EXPECT_NEAR(s.rho, -0.7619047619047621, 1e-12);
    EXPECT_NEAR(s.p_value, 0.028004939153071794, 1e-12);
    EXPECT_EQ(s.category, CorrelationCategory::none);
}

TEST(Spearman, PerfectAndDegenerateInputs) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const auto r = spearman(x, std::vector<double>{2, 4, 8, 16, 32});
    EXPECT_EQ(r.rho, 1.0);
    EXPECT_EQ(r.p_value, 0.0);
    EXPECT_THROW(spearman(x, std::vector<double>{1, 1, 1, 1, 1}), stats_error);
    EXPECT_THROW(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), stats_error);
    EXPECT_THROW(spearman(x, std::vector<double>{1, 2}), stats_error);
}

TEST(CorrelationCategories, Thresholds) {
    EXPECT_EQ(categorize_correlation(0.0999), CorrelationCategory::none);
    EXPECT_EQ(categorize_correlation(0.10), CorrelationCategory::weak);
    EXPECT_EQ(categorize_correlation(0.29), CorrelationCategory::weak);
    EXPECT_EQ(categorize_correlation(0.30), CorrelationCategory::moderate);
    EXPECT_EQ(categorize_correlation(0.49), CorrelationCategory::moderate);
    EXPECT_EQ(categorize_correlation(0.4901), CorrelationCategory::strong);
    EXPECT_EQ(categorize_correlation(-0.8), CorrelationCategory::none);
}

// ---------------------------------------------------------------------------
// Effect size and Mann-Whitney U

TEST(VarghaDelaney, PairCountEqualsRankSum) {
    Gen g(6);
    for (int i = 0; i < 1000; ++i) {
        const auto a = tied_sample(g, g.index(1, 30), i % 2 ? 5 : 0);
        const auto b = tied_sample(g, g.index(1, 30), i % 2 ? 5 : 0);
        std::vector<double> pooled = a;
        pooled.insert(pooled.end(), b.begin(), b.end());
        const auto r = rank_oracle(pooled);
        double r1 = 0;
        for (std::size_t k = 0; k < a.size(); ++k) r1 += r[k];
        const double m = static_cast<double>(a.size()), n = static_cast<double>(b.size());
        const double rank_sum_a12 = (r1 / m - (m + 1.0) / 2.0) / n;
        EXPECT_NEAR(vargha_delaney(a, b), rank_sum_a12, 1e-12);
        EXPECT_NEAR(mann_whitney_u(a, b).a12, rank_sum_a12, 1e-12);
    }
}

TEST(VarghaDelaney, MagnitudeBands) {
    EXPECT_EQ(magnitude_from_d(0.1469), EffectMagnitude::negligible);
    EXPECT_EQ(magnitude_from_d(0.147), EffectMagnitude::small);
    EXPECT_EQ(magnitude_from_d(0.3299), EffectMagnitude::small);
    EXPECT_EQ(magnitude_from_d(0.33), EffectMagnitude::medium);
    EXPECT_EQ(magnitude_from_d(0.4739), EffectMagnitude::medium);
    EXPECT_EQ(magnitude_from_d(0.474), EffectMagnitude::large);
    EXPECT_EQ(magnitude_from_a12(0.2), EffectMagnitude::large);
    EXPECT_EQ(magnitude_from_a12(0.55), EffectMagnitude::negligible);
    EXPECT_EQ(direction_from_a12(0.3), EffectDirection::group1_lower);
    EXPECT_EQ(direction_from_a12(0.7), EffectDirection::group2_lower);
    EXPECT_EQ(direction_from_a12(0.5), EffectDirection::none);
}

TEST(MannWhitney, AsymptoticReferenceWithTies) {
    const std::vector<double> a{1.1, 2.2, 2.2, 3.5, 4.0, 4.0, 5.1, 6.3};
    const std::vector<double> b{3.0, 4.0, 4.9, 5.5, 6.0, 7.2, 7.2, 8.0, 9.1};
    const auto r = mann_whitney_u(a, b);
    EXPECT_EQ(r.u_statistic, 12.0);
    EXPECT_NEAR(r.p_value, 0.023228933934293625, 1e-12);
    EXPECT_NEAR(r.a12, 12.0 / 72.0, 1e-15);
    EXPECT_EQ(r.direction, EffectDirection::group1_lower);
    EXPECT_EQ(r.magnitude, EffectMagnitude::large);
    EXPECT_FALSE(r.warning);
}

TEST(MannWhitney, ExactReference) {
    const std::vector<double> a{1, 3, 5, 7}, b{2, 4, 6, 8, 9, 10};
    const auto r = mann_whitney_u(a, b, {true});
    EXPECT_EQ(r.u_statistic, 6.0);
    EXPECT_NEAR(r.p_value, 0.2571428571428571, 1e-12);
    // With ties: 14 of the 126 rank assignments are at least as extreme.
    const auto t = mann_whitney_u(std::vector<double>{1, 2, 2, 3}, std::vector<double>{2, 3, 3, 4, 5}, {true});
    EXPECT_EQ(t.u_statistic, 3.0);
    EXPECT_NEAR(t.p_value, 14.0 / 126.0, 1e-12);
}

TEST(MannWhitney, SymmetryAndSmallSampleWarning) {
    Gen g(10);
    for (int i = 0; i < 100; ++i) {
        const auto a = tied_sample(g, g.index(1, 20), 4);
        const auto b = tied_sample(g, g.index(1, 20), 4);
        const auto ab = mann_whitney_u(a, b), ba = mann_whitney_u(b, a);
        EXPECT_NEAR(ab.a12 + ba.a12, 1.0, 1e-12);
        EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
        EXPECT_GE(ab.p_value, 0.0);
        EXPECT_LE(ab.p_value, 1.0);
    }
    const auto r = mann_whitney_u(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
    ASSERT_TRUE(r.warning);
    const auto same = mann_whitney_u(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 1, 1, 1});
    EXPECT_EQ(same.p_value, 1.0);
    EXPECT_EQ(same.a12, 0.5);
    EXPECT_THROW(mann_whitney_u(std::vector<double>{}, std::vector<double>{1}), stats_error);
}

TEST(MannWhitney, ExactAgreesWithNormalForLargerSamples) {
    Gen g(14);
    std::vector<double> a(40), b(45);
    for (auto& x : a) x = g.normal();
    for (auto& x : b) x = g.normal() + 0.5;
    const auto approx = mann_whitney_u(a, b), exact = mann_whitney_u(a, b, {true});
    EXPECT_NEAR(approx.p_value, exact.p_value, 0.01);
}

// ---------------------------------------------------------------------------
// Cohen's kappa

TEST(Kappa, TwoByTwoFixture) {
    const auto r = cohen_kappa({{20.0, 5.0}, {5.0, 20.0}});
    EXPECT_EQ(r.kappa, 0.6);
    EXPECT_EQ(r.observed_agreement, 0.8);
    EXPECT_EQ(r.n_items, 50u);
    std::vector<int> a, b;
    auto add = [&](int x, int y, int n) {
        for (int i = 0; i < n; ++i) {
            a.push_back(x);
            b.push_back(y);
        }
    };
    add(0, 0, 20);
    add(0, 1, 5);
    add(1, 0, 5);
    add(1, 1, 20);
    EXPECT_EQ(cohen_kappa(a, b).kappa, 0.6);
}

TEST(Kappa, IdenticalLabelsAndFourCategories) {
    const std::vector<QualityLevel> a{QualityLevel::high, QualityLevel::low, QualityLevel::false_negative,
                                      QualityLevel::medium};
    EXPECT_EQ(cohen_kappa(a, a).kappa, 1.0);
    auto b = a;
    b[2] = QualityLevel::low;
    // p_o = 3/4; p_e = (1/4)(1/4) * 2 + (1/4)(2/4) = 1/4; kappa = (3/4 - 1/4) / (3/4) = 2/3.
    EXPECT_NEAR(cohen_kappa(a, b).kappa, 2.0 / 3.0, 1e-15);
}

TEST(Kappa, IndependentRatersAverageNearZero) {
    Gen g(15);
    double sum = 0.0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        std::vector<int> a(400), b(400);
        for (auto& x : a) x = static_cast<int>(g.index(0, 3));
        for (auto& x : b) x = static_cast<int>(g.index(0, 3));
        sum += cohen_kappa(a, b).kappa;
    }
    EXPECT_NEAR(sum / trials, 0.0, 0.01);
}

TEST(Kappa, Errors) {
    EXPECT_THROW(cohen_kappa(std::vector<int>{1, 1}, std::vector<int>{1, 1}), stats_error);
    EXPECT_THROW(cohen_kappa(std::vector<int>{1, 2}, std::vector<int>{1}), stats_error);
    EXPECT_THROW(cohen_kappa(std::vector<int>{}, std::vector<int>{}), stats_error);
}
