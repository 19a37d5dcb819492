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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaj/core/error.hpp"
#include "vlaj/metrics/quality.hpp"
#include "vlaj/metrics/token.hpp"
#include "vlaj/metrics/uncertainty.hpp"
#include "vlaj/report/render.hpp"
#include "vlaj/trace/types.hpp"

namespace vlaj::report {

/// Timing groups. A-PI/A-VI/A-AI time together as AI, the three TCP metrics
/// as TCP, the four token metrics as TB.
enum class MetricGroup { inference_placeholder, TB, AI, EV, TCP, TI, OT };

inline std::string_view to_string(MetricGroup g) {
    switch (g) {
        case MetricGroup::inference_placeholder: return "inference_placeholder";
        case MetricGroup::TB: return "TB";
        case MetricGroup::AI: return "AI";
        case MetricGroup::EV: return "EV";
        case MetricGroup::TCP: return "TCP";
        case MetricGroup::TI: return "TI";
        case MetricGroup::OT: return "OT";
    }
    return "?";
}

struct OverheadSample {
    std::string group;
    double mean_seconds = 0.0;  // per step
    double std_seconds = 0.0;   // across repetitions
    std::size_t n = 0;          // repetitions
    std::string note;
};

/// Vocabulary size of the dense token benchmark.
inline constexpr std::int64_t bench_vocab = 32'064;

struct BenchOptions {
    std::size_t repetitions = 5;
    /// Vocabulary the sparse token distributions are expanded to before the
    /// TB kernels run; 0 times the sparse kernels on the logged data instead.
    std::int64_t dense_vocab = bench_vocab;
    /// Inference replays per step for EV; 0 uses the trace's ev_samples (or 4).
    int ev_replays = 0;
    metrics::MetricOptions metric;
};

/// Stand-in for the final decoding stage of a token-based policy: softmax
/// over a fixed logit table for each action token, then argmax into a bin.
/// Model inference itself is not reproduced; this bounds the replay cost
/// EV adds on top of its own arithmetic.
class SurrogateDecoder {
public:
    SurrogateDecoder(int tokens, std::int64_t vocab, std::uint64_t seed = 7)
        : tokens_(tokens), vocab_(vocab), logits_(static_cast<std::size_t>(tokens * vocab)),
          probs_(static_cast<std::size_t>(vocab)) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 2.0);
        for (auto& l : logits_) l = g(rng);
    }

    std::vector<double> decode() {
        std::vector<double> action(static_cast<std::size_t>(tokens_));
        for (int k = 0; k < tokens_; ++k) {
            const double* row = logits_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(vocab_);
            double hi = row[0];
            for (std::int64_t i = 1; i < vocab_; ++i) hi = std::max(hi, row[i]);
            double sum = 0.0;
            for (std::int64_t i = 0; i < vocab_; ++i) sum += probs_[static_cast<std::size_t>(i)] = std::exp(row[i] - hi);
            std::int64_t best = 0;
            for (std::int64_t i = 0; i < vocab_; ++i) {
                probs_[static_cast<std::size_t>(i)] /= sum;
                if (probs_[static_cast<std::size_t>(i)] > probs_[static_cast<std::size_t>(best)]) best = i;
            }
            action[static_cast<std::size_t>(k)] = static_cast<double>(best) / static_cast<double>(vocab_);
        }
        return action;
    }

private:
    int tokens_;
    std::int64_t vocab_;
    std::vector<double> logits_;
    std::vector<double> probs_;
};

namespace detail {

using bench_clock = std::chrono::steady_clock;

inline double seconds_since(bench_clock::time_point start) {
    return std::chrono::duration<double>(bench_clock::now() - start).count();
}

/// Sink that keeps results observable so timed work is not elided.
inline volatile double bench_sink = 0.0;

inline void consume(double v) { bench_sink = bench_sink + v; }

inline void consume(const metrics::MetricSeries& s) {
    if (!s.values.empty()) consume(s.values.back());
}

/// Spreads a sparse distribution over `vocab` slots: entries at id % vocab,
/// tail mass uniform over the remaining slots.
inline void expand_dense(const trace::TokenDistribution& d, std::int64_t vocab, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(vocab), 0.0);
    std::int64_t placed = 0;
    for (const auto& [id, p] : d.entries) {
        auto& slot = out[static_cast<std::size_t>(id % vocab)];
        if (slot == 0.0) ++placed;
        slot += p;
    }
    const auto rest = vocab - placed;
    if (d.tail_mass > 0.0 && rest > 0) {
        const double each = d.tail_mass / static_cast<double>(rest);
        for (auto& x : out) {
            if (x == 0.0) x = each;
        }
    }
}

inline OverheadSample summarize_reps(std::string group, const std::vector<double>& per_step, std::string note) {
    OverheadSample s{std::move(group), 0.0, 0.0, per_step.size(), std::move(note)};
    for (double v : per_step) s.mean_seconds += v;
    s.mean_seconds /= static_cast<double>(per_step.size());
    if (per_step.size() > 1) {
        double var = 0.0;
        for (double v : per_step) var += (v - s.mean_seconds) * (v - s.mean_seconds);
        s.std_seconds = std::sqrt(var / static_cast<double>(per_step.size() - 1));
    }
    return s;
}

inline int replay_count(const trace::RunTrace& t, const BenchOptions& opt) {
    if (opt.ev_replays > 0) return opt.ev_replays;
    return t.header.ev_samples >= 2 ? t.header.ev_samples : 4;
}

inline int token_count(const trace::RunTrace& t) {
    return t.header.token_count > 0 ? t.header.token_count : t.header.action_dims;
}

/// Wall time of `per_step(trace, step_index)` summed over all steps.
template <typename Fn>
double time_steps(const std::vector<trace::RunTrace>& traces, Fn per_step) {
    double total = 0.0;
    for (const auto& t : traces) total += per_step(t);
    return total;
}

}  // namespace detail

/// Per-step cost of one named unit of work, repeated `opt.repetitions` times.
/// `run_trace` returns the seconds it spent on one trace.
template <typename Fn>
OverheadSample time_per_step(const std::vector<trace::RunTrace>& traces, const BenchOptions& opt,
                             std::string name, std::string note, Fn run_trace) {
    std::size_t steps = 0;
    for (const auto& t : traces) steps += t.steps.size();
    if (steps == 0) throw error("overhead bench: nothing to time (no steps)");
    const std::size_t reps = std::max<std::size_t>(opt.repetitions, 1);
    std::vector<double> per_step;
    per_step.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        per_step.push_back(detail::time_steps(traces, run_trace) / static_cast<double>(steps));
    }
    return detail::summarize_reps(std::move(name), per_step, std::move(note));
}

namespace detail {

/// Times a whole-trace computation and returns elapsed seconds.
template <typename Fn>
auto whole_trace(Fn fn) {
    return [fn](const trace::RunTrace& t) {
        const auto start = bench_clock::now();
        consume(fn(t));
        return seconds_since(start);
    };
}

/// Times `kernel(dense_vectors_of_step)` per step; expansion is untimed.
template <typename Kernel>
auto dense_token_steps(const BenchOptions& opt, Kernel kernel) {
    return [&opt, kernel](const trace::RunTrace& t) {
        if (!t.has_token_probs()) return 0.0;
        std::vector<std::vector<double>> dense;
        double elapsed = 0.0;
        for (const auto& s : t.steps) {
            const auto& tokens = *s.token_probs;
            dense.resize(tokens.size());
            const std::int64_t vocab = opt.dense_vocab > 0 ? opt.dense_vocab : 0;
            if (vocab > 0) {
                for (std::size_t k = 0; k < tokens.size(); ++k) expand_dense(tokens[k], vocab, dense[k]);
            }
            const auto start = bench_clock::now();
            double acc = 0.0;
            for (std::size_t k = 0; k < tokens.size(); ++k) {
                acc += vocab > 0 ? kernel(std::span<const double>(dense[k])) : kernel(tokens[k]);
            }
            consume(acc);
            elapsed += seconds_since(start);
        }
        return elapsed;
    };
}

inline auto ev_replay_steps(const BenchOptions& opt, std::int64_t vocab) {
    return [&opt, vocab](const trace::RunTrace& t) {
        SurrogateDecoder decoder(token_count(t), vocab);
        const int n = replay_count(t, opt);
        trace::SampleMatrix samples(static_cast<std::size_t>(n));
        const auto start = bench_clock::now();
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
            for (auto& row : samples) row = decoder.decode();
            consume(metrics::execution_variability(samples));
        }
        return seconds_since(start);
    };
}

}  // namespace detail

/// Per-step wall-clock cost of each metric group over logged traces.
inline std::vector<OverheadSample> overhead_bench(const std::vector<trace::RunTrace>& traces,
                                                  const BenchOptions& opt = {}) {
    using namespace detail;
    const auto& mo = opt.metric;
    const std::int64_t vocab = opt.dense_vocab > 0 ? opt.dense_vocab : bench_vocab;
    std::vector<OverheadSample> out;

    out.push_back(time_per_step(
        traces, opt, std::string(to_string(MetricGroup::inference_placeholder)),
        "surrogate softmax+argmax decode over V=" + std::to_string(vocab) + "; not a model forward pass",
        [vocab](const trace::RunTrace& t) {
            SurrogateDecoder decoder(token_count(t), vocab);
            const auto start = bench_clock::now();
            for (std::size_t i = 0; i < t.steps.size(); ++i) consume(decoder.decode()[0]);
            return seconds_since(start);
        }));

    out.push_back(time_per_step(
        traces, opt, std::string(to_string(MetricGroup::TB)),
        opt.dense_vocab > 0 ? "TB_TP+TB_PCS+TB_D+TB_E over dense V=" + std::to_string(opt.dense_vocab)
                            : "TB_TP+TB_PCS+TB_D+TB_E over sparse logged distributions",
        dense_token_steps(opt, [](const auto& d) {
            return metrics::token::max_prob(d) + metrics::token::pcs(d) + metrics::token::gini(d) +
                   metrics::token::entropy(d);
        })));

    out.push_back(time_per_step(traces, opt, std::string(to_string(MetricGroup::AI)), "A_PI+A_VI+A_AI",
                                whole_trace([&mo](const trace::RunTrace& t) {
                                    double acc = 0.0;
                                    acc += metrics::a_pi(t, mo).values.back();
                                    acc += metrics::a_vi(t, mo).values.back();
                                    acc += metrics::a_ai(t, mo).values.back();
                                    return acc;
                                })));

    out.push_back(time_per_step(
        traces, opt, std::string(to_string(MetricGroup::EV)),
        "N surrogate decode replays per step plus the population-std computation; real model "
        "re-inference is not reproduced",
        ev_replay_steps(opt, vocab)));

    out.push_back(time_per_step(traces, opt, "EV_compute", "population-std computation over logged ev_actions only",
                                whole_trace([](const trace::RunTrace& t) {
                                    return t.has_ev_actions() && t.header.ev_samples >= 2
                                               ? metrics::ev(t).values.back()
                                               : 0.0;
                                })));

    out.push_back(time_per_step(traces, opt, std::string(to_string(MetricGroup::TCP)), "TCP_PI+TCP_VI+TCP_AI",
                                whole_trace([&mo](const trace::RunTrace& t) {
                                    double acc = 0.0;
                                    acc += metrics::tcp_pi(t, mo).values.back();
                                    acc += metrics::tcp_vi(t, mo).values.back();
                                    acc += metrics::tcp_ai(t, mo).values.back();
                                    return acc;
                                })));

    out.push_back(time_per_step(traces, opt, std::string(to_string(MetricGroup::TI)), "RMS jerk",
                                whole_trace([&mo](const trace::RunTrace& t) { return metrics::ti(t, mo); })));

    out.push_back(time_per_step(traces, opt, std::string(to_string(MetricGroup::OT)), "goal distance + OT",
                                whole_trace([](const trace::RunTrace& t) { return metrics::ot(t).values.back(); })));
    return out;
}

/// Per-step cost of every individual metric (TB metrics over dense vectors).
inline std::vector<OverheadSample> metric_step_costs(const std::vector<trace::RunTrace>& traces,
                                                     const BenchOptions& opt = {}) {
    using namespace detail;
    const auto& mo = opt.metric;
    std::vector<OverheadSample> out;
    auto series = [&](const char* name, auto fn) {
        out.push_back(time_per_step(traces, opt, name, "", whole_trace([fn](const trace::RunTrace& t) {
                                        return fn(t).values.back();
                                    })));
    };
    auto dense = [&](const char* name, auto kernel, bool complement) {
        out.push_back(time_per_step(traces, opt, name, "dense", dense_token_steps(opt, [kernel, complement](const auto& d) {
                                        const double v = kernel(d);
                                        return complement ? 1.0 - v : v;
                                    })));
    };
    dense("TB_TP", [](const auto& d) { return metrics::token::max_prob(d); }, true);
    dense("TB_PCS", [](const auto& d) { return metrics::token::pcs(d); }, true);
    dense("TB_D", [](const auto& d) { return metrics::token::gini(d); }, false);
    dense("TB_E", [](const auto& d) { return metrics::token::entropy(d); }, false);
    series("A_PI", [&mo](const trace::RunTrace& t) { return metrics::a_pi(t, mo); });
    series("A_VI", [&mo](const trace::RunTrace& t) { return metrics::a_vi(t, mo); });
    series("A_AI", [&mo](const trace::RunTrace& t) { return metrics::a_ai(t, mo); });
    series("TCP_PI", [&mo](const trace::RunTrace& t) { return metrics::tcp_pi(t, mo); });
    series("TCP_VI", [&mo](const trace::RunTrace& t) { return metrics::tcp_vi(t, mo); });
    series("TCP_AI", [&mo](const trace::RunTrace& t) { return metrics::tcp_ai(t, mo); });
    series("OT", [](const trace::RunTrace& t) { return metrics::ot(t); });
    out.push_back(time_per_step(traces, opt, "TI", "", whole_trace([&mo](const trace::RunTrace& t) {
                                    return metrics::ti(t, mo);
                                })));
    return out;
}

inline TextTable overhead_text(const std::vector<OverheadSample>& samples) {
    TextTable t{"Per-step execution overhead (seconds)", {"group", "mean_s", "std_s", "n", "note"}, {}};
    for (const auto& s : samples) {
        char m[32], sd[32];
        std::snprintf(m, sizeof m, "%.9f", s.mean_seconds);
        std::snprintf(sd, sizeof sd, "%.9f", s.std_seconds);
        t.rows.push_back({s.group, m, sd, std::to_string(s.n), s.note});
    }
    return t;
}

inline nlohmann::json overhead_json(const std::vector<OverheadSample>& samples) {
    auto j = nlohmann::json::array();
    for (const auto& s : samples) {
        j.push_back({{"group", s.group},
                     {"mean_seconds", s.mean_seconds},
                     {"std_seconds", s.std_seconds},
                     {"n", s.n},
                     {"note", s.note}});
    }
    return j;
}

}  // namespace vlaj::report
