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
#include <cstddef>
#include <span>
#include <utility>

#include "vlaj/trace/types.hpp"

#if defined(VLAJ_HAVE_LIBMVEC) && defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>
#define VLAJ_VECTOR_LOG 1
extern "C" __m256d _ZGVdN4v_log(__m256d);  // glibc libmvec, AVX2 variant
#endif

/// Per-token confidence kernels over one output distribution.
///
/// Sparse distributions spread `tail_mass` uniformly over the unlisted
/// tokens, so each unlisted token is a candidate with probability
/// tail_mass / (V - |entries|). With tail_mass = 0 every kernel equals its
/// dense counterpart over a length-V vector with zeros at unlisted ids.
namespace vlaj::metrics::token {

/// Highest and second-highest candidate probability.
inline std::pair<double, double> top_two(const trace::TokenDistribution& d) {
    double first = 0.0;
    double second = 0.0;
    auto offer = [&](double p) {
        if (p > first) {
            second = first;
            first = p;
        } else if (p > second) {
            second = p;
        }
    };
    for (const auto& [id, p] : d.entries) offer(p);
    const auto unlisted = d.unlisted();
    const double tail_p = d.tail_per_token();
    for (std::int64_t k = 0; k < std::min<std::int64_t>(unlisted, 2); ++k) offer(tail_p);
    return {first, second};
}

inline double max_prob(const trace::TokenDistribution& d) { return top_two(d).first; }

inline double pcs(const trace::TokenDistribution& d) {
    const auto [first, second] = top_two(d);
    return first - second;
}

inline double gini(const trace::TokenDistribution& d) {
    double sq = 0.0;
    for (const auto& [id, p] : d.entries) sq += p * p;
    if (d.tail_mass > 0.0) sq += d.tail_mass * d.tail_per_token();
    return 1.0 - sq;
}

/// Shannon entropy in nats, 0 ln 0 := 0.
inline double entropy(const trace::TokenDistribution& d) {
    double h = 0.0;
    for (const auto& [id, p] : d.entries) {
        if (p > 0.0) h -= p * std::log(p);
    }
    if (d.tail_mass > 0.0) h -= d.tail_mass * std::log(d.tail_per_token());
    return h;
}

// Dense variants over a full probability vector.

inline std::pair<double, double> top_two(std::span<const double> p) {
    double first = 0.0;
    double second = 0.0;
    for (double x : p) {
        if (x > first) {
            second = first;
            first = x;
        } else if (x > second) {
            second = x;
        }
    }
    return {first, second};
}

inline double max_prob(std::span<const double> p) { return top_two(p).first; }

inline double pcs(std::span<const double> p) {
    const auto [first, second] = top_two(p);
    return first - second;
}

inline double gini(std::span<const double> p) {
    double sq = 0.0;
    for (double x : p) sq += x * x;
    return 1.0 - sq;
}

namespace detail {

inline double entropy_scalar(const double* p, std::size_t n) {
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    }
    return h;
}

#ifdef VLAJ_VECTOR_LOG
__attribute__((target("avx2,fma"))) inline double entropy_avx2(const double* p, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(p + i);
        const __m256d pos = _mm256_cmp_pd(x, zero, _CMP_GT_OQ);
        const __m256d lx = _ZGVdN4v_log(_mm256_blendv_pd(one, x, pos));
        acc = _mm256_fmadd_pd(_mm256_and_pd(x, pos), lx, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    return entropy_scalar(p + i, n - i) - ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
}

inline bool has_avx2() {
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
}
#endif

}  // namespace detail

/// Shannon entropy in nats. Full-vocabulary vectors take the AVX2 path when
/// the build links glibc's vector math library and the CPU supports it.
inline double entropy(std::span<const double> p) {
#ifdef VLAJ_VECTOR_LOG
    if (p.size() >= 64 && detail::has_avx2()) return detail::entropy_avx2(p.data(), p.size());
#endif
    return detail::entropy_scalar(p.data(), p.size());
}

}  // namespace vlaj::metrics::token
