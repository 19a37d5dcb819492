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

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "vlaj/trace/types.hpp"
#include "vlaj/trace/validate.hpp"

namespace vlaj::trace {

using nlohmann::json;

namespace detail {

template <typename T>
T get_field(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) throw trace_error(std::string("missing field '") + key + "'", line);
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw trace_error(std::string("bad field '") + key + "': " + e.what(), line);
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw trace_error(std::string("bad field '") + key + "': " + e.what(), line);
    }
}

inline vec3 get_vec3(const json& j, const char* key, std::size_t line) {
    auto v = get_field<std::vector<double>>(j, key, line);
    if (v.size() != 3) throw trace_error(std::string("field '") + key + "' must have 3 elements", line);
    return {v[0], v[1], v[2]};
}

inline json vec_json(const vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace detail

inline json header_to_json(const TraceHeader& h) {
    json objects = json::array();
    for (const auto& o : h.objects) {
        objects.push_back({{"object_id", o.object_id},
                           {"object_role", to_string(o.object_role)},
                           {"half_extents", detail::vec_json(o.half_extents)}});
    }
    return {{"type", "header"},
            {"run_id", h.run_id},
            {"task", to_string(h.task)},
            {"instruction", h.instruction},
            {"robot", h.robot},
            {"model_id", h.model_id},
            {"action_dims", h.action_dims},
            {"action_horizon", h.action_horizon},
            {"dt", h.dt},
            {"token_count", h.token_count},
            {"vocab_size", h.vocab_size},
            {"ev_samples", h.ev_samples},
            {"objects", objects}};
}

inline TraceHeader header_from_json(const json& j, std::size_t line) {
    using namespace detail;
    TraceHeader h;
    h.run_id = get_field<std::string>(j, "run_id", line);
    h.task = parse_task(get_field<std::string>(j, "task", line));
    h.instruction = get_or<std::string>(j, "instruction", "", line);
    h.robot = get_or<std::string>(j, "robot", "", line);
    h.model_id = get_or<std::string>(j, "model_id", "unknown", line);
    h.action_dims = get_field<int>(j, "action_dims", line);
    h.action_horizon = get_or<int>(j, "action_horizon", 1, line);
    h.dt = get_or<double>(j, "dt", 1.0, line);
    h.token_count = get_or<int>(j, "token_count", 0, line);
    h.vocab_size = get_or<int>(j, "vocab_size", 0, line);
    h.ev_samples = get_or<int>(j, "ev_samples", 0, line);
    if (auto it = j.find("objects"); it != j.end()) {
        if (!it->is_array()) throw trace_error("'objects' must be an array", line);
        for (const auto& jo : *it) {
            ObjectDecl o;
            o.object_id = get_field<std::string>(jo, "object_id", line);
            o.object_role = parse_object_role(get_field<std::string>(jo, "object_role", line));
            if (jo.contains("half_extents")) o.half_extents = get_vec3(jo, "half_extents", line);
            h.objects.push_back(std::move(o));
        }
    }
    return h;
}

inline json step_to_json(const StepRecord& s) {
    json j = {{"type", "step"}, {"t", s.t}, {"action", s.action}, {"tcp", detail::vec_json(s.tcp)}};
    if (s.gripper_open) j["gripper_open"] = *s.gripper_open;
    if (s.grasped) j["grasped"] = *s.grasped;
    if (s.ev_actions) j["ev_actions"] = *s.ev_actions;
    if (s.token_probs) {
        json tokens = json::array();
        for (const auto& d : *s.token_probs) {
            json entries = json::object();
            for (const auto& [id, p] : d.entries) entries[std::to_string(id)] = p;
            tokens.push_back(
                {{"entries", entries}, {"tail_mass", d.tail_mass}, {"vocab_size", d.vocab_size}});
        }
        j["token_probs"] = std::move(tokens);
    }
    json poses = json::object();
    for (const auto& [id, p] : s.object_poses) {
        poses[id] = {{"position", detail::vec_json(p.position)}, {"orientation", p.orientation}};
    }
    j["object_poses"] = std::move(poses);
    return j;
}

inline StepRecord step_from_json(const json& j, const TraceHeader& h, std::size_t line) {
    using namespace detail;
    StepRecord s;
    s.t = get_field<std::int64_t>(j, "t", line);
    s.action = get_field<std::vector<double>>(j, "action", line);
    s.tcp = get_vec3(j, "tcp", line);
    if (j.contains("gripper_open") && !j["gripper_open"].is_null())
        s.gripper_open = get_field<double>(j, "gripper_open", line);
    if (j.contains("grasped") && !j["grasped"].is_null())
        s.grasped = get_field<bool>(j, "grasped", line);
    if (j.contains("ev_actions") && !j["ev_actions"].is_null())
        s.ev_actions = get_field<SampleMatrix>(j, "ev_actions", line);
    if (j.contains("token_probs") && !j["token_probs"].is_null()) {
        const auto& jt = j["token_probs"];
        if (!jt.is_array()) throw trace_error("'token_probs' must be an array", line);
        std::vector<TokenDistribution> tokens;
        for (const auto& jd : jt) {
            TokenDistribution d;
            d.vocab_size = get_or<std::int64_t>(jd, "vocab_size", h.vocab_size, line);
            d.tail_mass = get_or<double>(jd, "tail_mass", 0.0, line);
            const auto& je = jd.at("entries");
            if (!je.is_object()) throw trace_error("'entries' must be an object", line);
            for (auto it = je.begin(); it != je.end(); ++it) {
                std::int64_t id = 0;
                try {
                    std::size_t used = 0;
                    id = std::stoll(it.key(), &used);
                    if (used != it.key().size()) throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    throw trace_error("token id '" + it.key() + "' is not an integer", line);
                }
                if (!it.value().is_number()) throw trace_error("token probability is not a number", line);
                d.entries[id] = it.value().get<double>();
            }
            tokens.push_back(std::move(d));
        }
        s.token_probs = std::move(tokens);
    }
    if (j.contains("object_poses")) {
        const auto& jp = j["object_poses"];
        if (!jp.is_object()) throw trace_error("'object_poses' must be an object", line);
        for (auto it = jp.begin(); it != jp.end(); ++it) {
            Pose p;
            p.position = get_vec3(it.value(), "position", line);
            if (it.value().contains("orientation"))
                p.orientation = get_field<std::array<double, 4>>(it.value(), "orientation", line);
            s.object_poses[it.key()] = p;
        }
    }
    return s;
}

inline json outcome_to_json(const Outcome& o) {
    json j = {{"type", "outcome"}};
    if (o.oracle_success) j["oracle_success"] = *o.oracle_success;
    if (o.notes) j["notes"] = *o.notes;
    return j;
}

/// Reads and validates a JSONL trace. Errors carry the 1-based line number.
inline RunTrace read_trace(std::istream& in) {
    RunTrace trace;
    bool have_header = false;
    bool have_outcome = false;
    std::optional<std::int64_t> prev_t;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw trace_error(std::string("malformed JSON: ") + e.what(), line);
        }
        if (!j.is_object()) throw trace_error("record is not a JSON object", line);
        const std::string type = j.value("type", "");
        if (!have_header) {
            if (type != "header") throw trace_error("first record must be the header", line);
            trace.header = header_from_json(j, line);
            validate_header(trace.header, line);
            have_header = true;
            continue;
        }
        if (have_outcome) throw trace_error("record after outcome", line);
        if (type == "step") {
            StepRecord s = step_from_json(j, trace.header, line);
            validate_step(trace.header, s, prev_t, line);
            prev_t = s.t;
            trace.steps.push_back(std::move(s));
        } else if (type == "outcome") {
            if (j.contains("oracle_success") && !j["oracle_success"].is_null())
                trace.outcome.oracle_success = detail::get_field<bool>(j, "oracle_success", line);
            if (j.contains("notes") && !j["notes"].is_null())
                trace.outcome.notes = detail::get_field<std::string>(j, "notes", line);
            have_outcome = true;
        } else if (type == "header") {
            throw trace_error("duplicate header", line);
        } else {
            throw trace_error("unknown record type '" + type + "'", line);
        }
    }
    if (!have_header) throw trace_error("header missing (empty trace file)");
    return trace;
}

inline RunTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw trace_error("cannot open trace file " + path.string());
    return read_trace(in);
}

inline void write_trace(std::ostream& out, const RunTrace& trace) {
    out << header_to_json(trace.header).dump() << '\n';
    for (const auto& s : trace.steps) out << step_to_json(s).dump() << '\n';
    out << outcome_to_json(trace.outcome).dump() << '\n';
}

inline void save_trace(const std::filesystem::path& path, const RunTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw trace_error("cannot write trace file " + path.string());
    write_trace(out, trace);
}

inline std::string to_jsonl(const RunTrace& trace) {
    std::ostringstream os;
    write_trace(os, trace);
    return os.str();
}

}  // namespace vlaj::trace
