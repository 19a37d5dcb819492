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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vlaj/core/error.hpp"
#include "vlaj/metrics/series.hpp"

namespace vlaj::metrics {

/// Ring buffer holding the most recent `capacity` samples of a run, from which
/// backward differences up to order capacity-1 can be read.
template <typename Sample>
class SampleWindow {
public:
    explicit SampleWindow(std::size_t capacity) : buf_(capacity) {
        if (capacity < min_window) {
            throw error("window must hold at least " + std::to_string(min_window) + " samples");
        }
    }

    void push(const Sample& s) {
        head_ = (head_ + 1) % buf_.size();
        buf_[head_] = s;
        if (count_ < buf_.size()) ++count_;
    }

    std::size_t size() const noexcept { return count_; }
    std::size_t capacity() const noexcept { return buf_.size(); }

    /// Sample pushed `lag` pushes ago (0 = latest).
    const Sample& back(std::size_t lag) const {
        return buf_[(head_ + buf_.size() - lag) % buf_.size()];
    }

    /// Writes the order-`Order` backward difference of the latest samples into
    /// `out`. Requires size() > Order. Differences are taken by repeated
    /// first differencing, so a constant input yields exactly zero.
    template <std::size_t Order>
    void difference(std::vector<double>& out) const {
        const std::size_t dims = back(0).size();
        scratch_.resize((Order + 1) * dims);
        for (std::size_t k = 0; k <= Order; ++k) {
            const auto& x = back(k);
            for (std::size_t d = 0; d < dims; ++d) scratch_[k * dims + d] = x[d];
        }
        for (std::size_t level = 1; level <= Order; ++level) {
            for (std::size_t k = 0; k + level <= Order; ++k) {
                for (std::size_t d = 0; d < dims; ++d) {
                    scratch_[k * dims + d] -= scratch_[(k + 1) * dims + d];
                }
            }
        }
        out.assign(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(dims));
    }

private:
    std::vector<Sample> buf_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    mutable std::vector<double> scratch_;
};

/// Runs `reduce(diff)` over every step where the order-`Order` difference of
/// `seq` is defined. Result i belongs to sequence index Order + i.
template <std::size_t Order, typename Sample, typename Reduce>
std::vector<double> windowed_differences(std::span<const Sample> seq, std::size_t window,
                                         Reduce reduce) {
    static_assert(Order >= 1 && Order < min_window);
    std::vector<double> out;
    if (seq.size() <= Order) return out;
    out.reserve(seq.size() - Order);
    SampleWindow<Sample> win(window);
    std::vector<double> diff;
    for (const auto& s : seq) {
        win.push(s);
        if (win.size() > Order) {
            win.template difference<Order>(diff);
            out.push_back(reduce(diff));
        }
    }
    return out;
}

}  // namespace vlaj::metrics
