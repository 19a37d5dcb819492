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
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlaj/core/error.hpp"
#include "vlaj/core/quality_level.hpp"
#include "vlaj/report/render.hpp"
#include "vlaj/stats/kappa.hpp"

namespace vlaj::labels {

/// Default cap on labels per annotator session.
inline constexpr std::size_t default_batch_limit = 160;

struct QualityLabel {
    std::string run_id;
    std::string annotator_id;
    QualityLevel label = QualityLevel::high;
    std::string timestamp;  // ISO 8601, UTC
    std::string session_id;

    bool operator==(const QualityLabel&) const = default;
};

/// A resubmission that replaced an earlier label.
struct AuditEntry {
    std::size_t seq = 0;
    std::string run_id;
    std::string annotator_id;
    QualityLevel previous = QualityLevel::high;
    QualityLevel current = QualityLevel::high;
    std::string previous_timestamp;
    std::string timestamp;

    bool operator==(const AuditEntry&) const = default;
};

struct Resolution {
    QualityLevel label = QualityLevel::high;
    /// Set when a third annotator broke a disagreement.
    std::optional<std::string> resolver_id;

    bool operator==(const Resolution&) const = default;
};

struct LabelSet {
    /// Current labels ordered by (run_id, annotator_id).
    std::vector<QualityLabel> labels;
    std::map<std::string, Resolution> resolutions;
    /// Runs whose first two annotators disagree and no third label exists.
    std::vector<std::string> unresolved;

    bool operator==(const LabelSet&) const = default;
};

struct Disagreement {
    std::string run_id;
    QualityLevel a = QualityLevel::high;
    QualityLevel b = QualityLevel::high;
};

struct AnnotatorAgreement {
    stats::AgreementResult result;
    std::vector<Disagreement> disagreements;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::json label_to_json(const QualityLabel& l) {
    return {{"run_id", l.run_id},
            {"annotator_id", l.annotator_id},
            {"label", to_string(l.label)},
            {"timestamp", l.timestamp},
            {"session_id", l.session_id}};
}

/// Parses a submitted label. A missing timestamp is left empty for the
/// store to fill in.
inline QualityLabel label_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw label_error("label must be a JSON object");
    auto text = [&](const char* key, bool required) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) throw label_error(std::string("label is missing '") + key + "'");
            return {};
        }
        if (!it->is_string()) throw label_error(std::string("label field '") + key + "' must be a string");
        auto s = it->get<std::string>();
        if (required && s.empty()) throw label_error(std::string("label field '") + key + "' is empty");
        return s;
    };
    QualityLabel l;
    l.run_id = text("run_id", true);
    l.annotator_id = text("annotator_id", true);
    l.label = parse_quality(text("label", true));
    l.session_id = text("session_id", true);
    l.timestamp = text("timestamp", false);
    return l;
}

/// Event-sourced label state. Every mutation is one JSON line in the log;
/// replaying the log from the start yields the same state.
class LabelState {
public:
    /// Applies one label event and returns the audit entry if it overwrote.
    std::optional<AuditEntry> apply(const QualityLabel& l, std::size_t seq) {
        auto& per_run = runs_[l.run_id];
        auto it = std::find_if(per_run.begin(), per_run.end(),
                               [&](const Slot& s) { return s.label.annotator_id == l.annotator_id; });
        std::optional<AuditEntry> audit;
        if (it == per_run.end()) {
            per_run.push_back({l});
        } else {
            audit = AuditEntry{seq,         l.run_id, l.annotator_id, it->label.label, l.label,
                               it->label.timestamp, l.timestamp};
            it->label = l;
            audits_.push_back(*audit);
        }
        last_seq_ = std::max(last_seq_, seq);
        return audit;
    }

    std::size_t last_seq() const { return last_seq_; }
    const std::vector<AuditEntry>& audits() const { return audits_; }

    std::optional<QualityLabel> find(const std::string& run_id, const std::string& annotator_id) const {
        auto it = runs_.find(run_id);
        if (it == runs_.end()) return std::nullopt;
        for (const auto& s : it->second) {
            if (s.label.annotator_id == annotator_id) return s.label;
        }
        return std::nullopt;
    }

    bool has_labeled(const std::string& run_id, const std::string& annotator_id) const {
        return find(run_id, annotator_id).has_value();
    }

    /// Current labels this annotator holds in the given session.
    std::size_t session_count(const std::string& annotator_id, const std::string& session_id) const {
        std::size_t n = 0;
        for (const auto& [run, slots] : runs_) {
            for (const auto& s : slots) {
                if (s.label.annotator_id == annotator_id && s.label.session_id == session_id) ++n;
            }
        }
        return n;
    }

    /// Annotators for a run in order of their first submission.
    std::vector<QualityLabel> run_labels(const std::string& run_id) const {
        std::vector<QualityLabel> out;
        auto it = runs_.find(run_id);
        if (it == runs_.end()) return out;
        for (const auto& s : it->second) out.push_back(s.label);
        return out;
    }

    /// First two annotators agreeing resolve a run; otherwise the third
    /// annotator's label does. A run with a single label resolves to it.
    static std::optional<Resolution> resolve(const std::vector<QualityLabel>& ordered) {
        if (ordered.empty()) return std::nullopt;
        if (ordered.size() == 1 || ordered[0].label == ordered[1].label) return Resolution{ordered[0].label, {}};
        if (ordered.size() >= 3) return Resolution{ordered[2].label, ordered[2].annotator_id};
        return std::nullopt;
    }

    LabelSet label_set() const {
        LabelSet set;
        for (const auto& [run, slots] : runs_) {
            std::vector<QualityLabel> ordered;
            for (const auto& s : slots) ordered.push_back(s.label);
            auto sorted = ordered;
            std::sort(sorted.begin(), sorted.end(),
                      [](const QualityLabel& a, const QualityLabel& b) { return a.annotator_id < b.annotator_id; });
            set.labels.insert(set.labels.end(), sorted.begin(), sorted.end());
            if (auto r = resolve(ordered)) {
                set.resolutions.emplace(run, *r);
            } else {
                set.unresolved.push_back(run);
            }
        }
        return set;
    }

    AnnotatorAgreement agreement(const std::string& a, const std::string& b) const {
        std::vector<QualityLevel> la, lb;
        AnnotatorAgreement out;
        for (const auto& [run, slots] : runs_) {
            auto x = find(run, a);
            auto y = find(run, b);
            if (!x || !y) continue;
            la.push_back(x->label);
            lb.push_back(y->label);
            if (x->label != y->label) out.disagreements.push_back({run, x->label, y->label});
        }
        if (la.empty()) throw label_error("annotators '" + a + "' and '" + b + "' share no labeled runs");
        out.result = stats::cohen_kappa(la, lb);
        return out;
    }

private:
    struct Slot {
        QualityLabel label;
    };
    std::map<std::string, std::vector<Slot>> runs_;
    std::vector<AuditEntry> audits_;
    std::size_t last_seq_ = 0;
};

inline nlohmann::json event_to_json(const QualityLabel& l, std::size_t seq, const std::optional<AuditEntry>& audit) {
    auto j = label_to_json(l);
    j["event"] = "label";
    j["seq"] = seq;
    if (audit) {
        j["overwrites"] = {{"label", to_string(audit->previous)}, {"timestamp", audit->previous_timestamp}};
    }
    return j;
}

/// Rebuilds state from a log stream. Malformed lines are errors with line numbers.
inline LabelState replay(std::istream& in) {
    LabelState state;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.value("event", "") != "label") throw label_error("unknown event");
            const auto l = label_from_json(j);
            if (l.timestamp.empty()) throw label_error("label event without timestamp");
            state.apply(l, j.at("seq").get<std::size_t>());
        } catch (const nlohmann::json::exception& e) {
            throw label_error("label log line " + std::to_string(lineno) + ": " + e.what());
        } catch (const label_error& e) {
            throw label_error("label log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return state;
}

inline LabelState replay_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw label_error("cannot open label log " + path.string());
    return replay(in);
}

inline std::string labels_csv(const LabelSet& set) {
    report::TextTable t{"", {"run_id", "annotator_id", "label", "timestamp", "session_id"}, {}};
    for (const auto& l : set.labels) {
        t.rows.push_back({l.run_id, l.annotator_id, std::string(to_string(l.label)), l.timestamp, l.session_id});
    }
    return report::render_csv(t);
}

inline std::string resolved_csv(const LabelSet& set) {
    report::TextTable t{"", {"run_id", "label", "resolver_id"}, {}};
    for (const auto& [run, r] : set.resolutions) {
        t.rows.push_back({run, std::string(to_string(r.label)), r.resolver_id.value_or("")});
    }
    return report::render_csv(t);
}

/// Reads a resolved.csv back into run_id -> label.
inline std::map<std::string, QualityLevel> read_resolved_csv(std::istream& in) {
    std::map<std::string, QualityLevel> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (lineno == 1 && !cells.empty() && cells[0] == "run_id") continue;
        if (cells.size() < 2) throw label_error("resolved labels line " + std::to_string(lineno) + ": expected run_id,label");
        if (!out.emplace(cells[0], parse_quality(cells[1])).second) {
            throw label_error("resolved labels line " + std::to_string(lineno) + ": duplicate run '" + cells[0] + "'");
        }
    }
    return out;
}

struct ExportResult {
    LabelSet set;
    bool complete = true;
};

/// Thread-safe store over an append-only JSONL log. Submissions are
/// serialized and flushed one line at a time; reads share the lock.
class LabelStore {
public:
    /// `eligible` maps every known run_id to whether its oracle succeeded.
    LabelStore(std::filesystem::path log_path, std::map<std::string, bool> eligible)
        : path_(std::move(log_path)), eligible_(std::move(eligible)) {
        if (std::filesystem::exists(path_)) state_ = replay_file(path_);
        out_.open(path_, std::ios::app);
        if (!out_) throw label_error("cannot open label log " + path_.string() + " for append");
    }

    struct Ack {
        std::size_t seq = 0;
        QualityLabel stored;
        std::optional<AuditEntry> overwrote;
    };

    Ack submit(QualityLabel l) {
        auto it = eligible_.find(l.run_id);
        if (it == eligible_.end()) throw label_error("unknown run '" + l.run_id + "'");
        if (!it->second) throw label_error("run '" + l.run_id + "' did not succeed; only successful runs take labels");
        if (l.annotator_id.empty() || l.session_id.empty()) throw label_error("annotator_id and session_id are required");
        if (l.timestamp.empty()) l.timestamp = utc_timestamp();

        std::unique_lock lock(mutex_);
        const std::size_t seq = state_.last_seq() + 1;
        const auto line = event_to_json(l, seq, preview_audit(l, seq)).dump();
        out_ << line << '\n';
        out_.flush();
        if (!out_) throw label_error("failed to append to label log " + path_.string());
        auto audit = state_.apply(l, seq);
        return {seq, l, audit};
    }

    /// Successful runs this annotator has not labeled, in run_id order, capped
    /// at `limit` minus what the session already holds.
    std::vector<std::string> next_batch(const std::string& annotator_id, const std::string& session_id,
                                        std::size_t limit = default_batch_limit) const {
        std::shared_lock lock(mutex_);
        const std::size_t used = state_.session_count(annotator_id, session_id);
        std::vector<std::string> out;
        if (used >= limit) return out;
        for (const auto& [run, ok] : eligible_) {
            if (out.size() >= limit - used) break;
            if (ok && !state_.has_labeled(run, annotator_id)) out.push_back(run);
        }
        return out;
    }

    std::size_t session_count(const std::string& annotator_id, const std::string& session_id) const {
        std::shared_lock lock(mutex_);
        return state_.session_count(annotator_id, session_id);
    }

    AnnotatorAgreement agreement(const std::string& a, const std::string& b) const {
        std::shared_lock lock(mutex_);
        return state_.agreement(a, b);
    }

    LabelSet label_set() const {
        std::shared_lock lock(mutex_);
        return state_.label_set();
    }

    std::vector<AuditEntry> audits() const {
        std::shared_lock lock(mutex_);
        return state_.audits();
    }

    /// Full export refuses unresolved disagreements; partial export omits them.
    ExportResult export_labels(bool partial = false) const {
        ExportResult r{label_set(), true};
        r.complete = r.set.unresolved.empty();
        if (!r.complete && !partial) {
            std::string runs;
            for (const auto& id : r.set.unresolved) runs += (runs.empty() ? "" : ", ") + id;
            throw label_error("unresolved disagreements: " + runs);
        }
        return r;
    }

    /// Writes labels.csv and resolved.csv into `dir`.
    void export_to(const std::filesystem::path& dir, bool partial = false) const {
        const auto r = export_labels(partial);
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "labels.csv") << labels_csv(r.set);
        std::ofstream(dir / "resolved.csv") << resolved_csv(r.set);
    }

    bool is_known(const std::string& run_id) const { return eligible_.count(run_id) != 0; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::optional<AuditEntry> preview_audit(const QualityLabel& l, std::size_t seq) const {
        auto prev = state_.find(l.run_id, l.annotator_id);
        if (!prev) return std::nullopt;
        return AuditEntry{seq, l.run_id, l.annotator_id, prev->label, l.label, prev->timestamp, l.timestamp};
    }

    std::filesystem::path path_;
    std::map<std::string, bool> eligible_;
    mutable std::shared_mutex mutex_;
    LabelState state_;
    std::ofstream out_;
};

}  // namespace vlaj::labels
