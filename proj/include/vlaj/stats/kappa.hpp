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

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vlaj/core/error.hpp"

namespace vlaj::stats {

struct AgreementResult {
    double kappa = 0.0;
    double observed_agreement = 0.0;
    std::size_t n_items = 0;
};

namespace detail {

/// Kappa from agreement and marginal counts in the count form
/// (n*diag - sum r_i c_i) / (n^2 - sum r_i c_i).
inline AgreementResult kappa_from_counts(double n, double diag, const std::vector<double>& rows,
                                         const std::vector<double>& cols) {
    if (n <= 0.0) throw stats_error("cohen_kappa: no items");
    double chance = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) chance += rows[i] * cols[i];
    const double denom = n * n - chance;
    if (denom <= 0.0) throw stats_error("cohen_kappa: degenerate agreement (both raters constant and equal)");
    AgreementResult r;
    r.n_items = static_cast<std::size_t>(n);
    r.observed_agreement = diag / n;
    r.kappa = (n * diag - chance) / denom;
    return r;
}

}  // namespace detail

/// Cohen's kappa, (p_o - p_e) / (1 - p_e) with p_e from the two raters'
/// marginal frequencies.
template <typename Label>
AgreementResult cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() != b.size()) throw stats_error("cohen_kappa: label series lengths differ");
    if (a.empty()) throw stats_error("cohen_kappa: no items");
    std::map<Label, std::pair<double, double>> marginals;
    double agree = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        marginals[a[i]].first += 1.0;
        marginals[b[i]].second += 1.0;
        if (a[i] == b[i]) agree += 1.0;
    }
    std::vector<double> rows, cols;
    for (const auto& [label, m] : marginals) {
        rows.push_back(m.first);
        cols.push_back(m.second);
    }
    return detail::kappa_from_counts(static_cast<double>(a.size()), agree, rows, cols);
}

template <typename Label>
AgreementResult cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
    return cohen_kappa(std::span<const Label>(a), std::span<const Label>(b));
}

/// Kappa from a square confusion matrix (rows rater A, columns rater B).
inline AgreementResult cohen_kappa(const std::vector<std::vector<double>>& confusion) {
    const std::size_t k = confusion.size();
    double n = 0.0, diag = 0.0;
    std::vector<double> rows(k, 0.0), cols(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        if (confusion[i].size() != k) throw stats_error("cohen_kappa: confusion matrix is not square");
        for (std::size_t j = 0; j < k; ++j) {
            n += confusion[i][j];
            rows[i] += confusion[i][j];
            cols[j] += confusion[i][j];
        }
        diag += confusion[i][i];
    }
    return detail::kappa_from_counts(n, diag, rows, cols);
}

}  // namespace vlaj::stats
