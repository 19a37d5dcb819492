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
#include <optional>
#include <stdexcept>
#include <string>

namespace vlaj {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trace file or in-memory trace violates the data contract.
/// `line()` is the 1-based JSONL line when the error came from a file.
class trace_error : public error {
public:
    explicit trace_error(const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}

    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::optional<std::size_t> line_;
};

/// The series cannot be formed because the trace is too short for the
/// difference order (e.g. a third difference over three steps).
class undefined_series : public error {
public:
    using error::error;
};

/// The channel a metric needs (token_probs, ev_actions, tcp) is absent.
class metric_unavailable : public error {
public:
    using error::error;
};

/// Raised by success oracles and OT when the trace cannot be evaluated.
class oracle_error : public error {
public:
    using error::error;
};

/// Statistical routine called on degenerate input (constant series,
/// empty group, p_e = 1, ...).
class stats_error : public error {
public:
    using error::error;
};

/// Label-service request rejected (unknown run, failing run, bad label...).
class label_error : public error {
public:
    using error::error;
};

}  // namespace vlaj
