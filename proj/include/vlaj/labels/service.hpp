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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vlaj/labels/store.hpp"
#include "vlaj/metrics/summary.hpp"
#include "vlaj/trace/io.hpp"

namespace vlaj::labels {

/// Traces the service can show, keyed by run_id.
struct RunCatalog {
    std::map<std::string, trace::RunTrace> runs;
    /// Files that failed to load, with the reason.
    std::vector<std::string> load_errors;

    std::map<std::string, bool> eligibility() const {
        std::map<std::string, bool> out;
        for (const auto& [id, t] : runs) out.emplace(id, metrics::run_success(t));
        return out;
    }

    /// Loads every *.jsonl file directly under `dir`.
    static RunCatalog load_dir(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir)) throw error("trace directory not readable: " + dir.string());
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        RunCatalog c;
        for (const auto& f : files) {
            try {
                auto t = trace::load_trace(f);
                const auto id = t.header.run_id;
                if (!c.runs.emplace(id, std::move(t)).second) {
                    c.load_errors.push_back(f.string() + ": duplicate run_id '" + id + "'");
                }
            } catch (const std::exception& e) {
                c.load_errors.push_back(f.string() + ": " + e.what());
            }
        }
        return c;
    }
};

struct ServiceOptions {
    std::size_t batch_limit = default_batch_limit;
    /// Where <run_id>.mp4 sidecar videos live; empty disables media.
    std::filesystem::path media_dir;
    /// Optional directory of static UI assets mounted at "/".
    std::filesystem::path static_dir;
};

/// Wire format shown to annotators. The oracle verdict is deliberately absent.
inline nlohmann::json run_descriptor(const trace::RunTrace& t, const std::optional<std::string>& media_url) {
    return {{"run_id", t.header.run_id},
            {"task", trace::to_string(t.header.task)},
            {"instruction", t.header.instruction},
            {"steps", t.steps.size()},
            {"media_url", media_url ? nlohmann::json(*media_url) : nlohmann::json(nullptr)}};
}

inline nlohmann::json run_detail(const trace::RunTrace& t, const std::optional<std::string>& media_url) {
    auto j = run_descriptor(t, media_url);
    j["robot"] = t.header.robot;
    j["dt"] = t.header.dt;
    auto path = nlohmann::json::array();
    auto gripper = nlohmann::json::array();
    for (const auto& s : t.steps) {
        path.push_back({s.tcp[0], s.tcp[1], s.tcp[2]});
        gripper.push_back(s.gripper_open ? nlohmann::json(*s.gripper_open) : nlohmann::json(nullptr));
    }
    j["tcp_path"] = std::move(path);
    j["gripper_open"] = std::move(gripper);
    auto objects = nlohmann::json::array();
    for (const auto& o : t.header.objects) {
        auto poses = nlohmann::json::array();
        for (const auto& s : t.steps) {
            auto it = s.object_poses.find(o.object_id);
            if (it == s.object_poses.end()) {
                poses.push_back(nullptr);
                continue;
            }
            const auto& p = it->second;
            poses.push_back({p.position[0], p.position[1], p.position[2], p.orientation[0], p.orientation[1],
                             p.orientation[2], p.orientation[3]});
        }
        objects.push_back({{"object_id", o.object_id},
                           {"object_role", trace::to_string(o.object_role)},
                           {"half_extents", {o.half_extents[0], o.half_extents[1], o.half_extents[2]}},
                           {"poses", std::move(poses)}});
    }
    j["objects"] = std::move(objects);
    return j;
}

inline nlohmann::json audit_to_json(const AuditEntry& a) {
    return {{"seq", a.seq},
            {"run_id", a.run_id},
            {"annotator_id", a.annotator_id},
            {"previous", to_string(a.previous)},
            {"current", to_string(a.current)},
            {"previous_timestamp", a.previous_timestamp},
            {"timestamp", a.timestamp}};
}

/// HTTP front end over a LabelStore. Routes:
///   GET  /runs/next?annotator=&session=&limit=
///   GET  /runs/{id}
///   POST /labels
///   GET  /agreement?a=&b=
///   GET  /export[?partial=true]
///   GET  /media/{run_id}.mp4
class LabelService {
public:
    LabelService(const RunCatalog& catalog, LabelStore& store, ServiceOptions opt = {})
        : catalog_(catalog), store_(store), opt_(std::move(opt)) {
        routes();
    }

    httplib::Server& server() { return server_; }

    /// Binds and serves until stop(); false if the address is unavailable.
    bool listen(const std::string& host, int port) { return server_.listen(host, port); }

    /// Binds to a free port and returns it (or -1); serve with listen_after_bind().
    int bind_any(const std::string& host) { return server_.bind_to_any_port(host); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }

    std::optional<std::string> media_url(const std::string& run_id) const {
        if (opt_.media_dir.empty()) return std::nullopt;
        if (!std::filesystem::is_regular_file(opt_.media_dir / (run_id + ".mp4"))) return std::nullopt;
        return "/media/" + run_id + ".mp4";
    }

private:
    static void send(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void fail(httplib::Response& res, int status, const std::string& message) {
        send(res, status, {{"error", message}});
    }

    void routes() {
        server_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server_.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        server_.Get("/runs/next", [this](const httplib::Request& req, httplib::Response& res) {
            const auto annotator = req.get_param_value("annotator");
            const auto session = req.get_param_value("session");
            if (annotator.empty() || session.empty()) return fail(res, 400, "annotator and session are required");
            std::size_t limit = opt_.batch_limit;
            if (req.has_param("limit")) {
                try {
                    std::size_t used = 0;
                    const auto& raw = req.get_param_value("limit");
                    const long long v = std::stoll(raw, &used);
                    if (used != raw.size() || v < 0) throw std::invalid_argument("limit");
                    limit = static_cast<std::size_t>(v);
                } catch (const std::exception&) {
                    return fail(res, 400, "limit must be a non-negative integer");
                }
            }
            auto runs = nlohmann::json::array();
            for (const auto& id : store_.next_batch(annotator, session, limit)) {
                runs.push_back(run_descriptor(catalog_.runs.at(id), media_url(id)));
            }
            send(res, 200,
                 {{"annotator", annotator},
                  {"session", session},
                  {"cap", limit},
                  {"session_count", store_.session_count(annotator, session)},
                  {"runs", std::move(runs)}});
        });

        server_.Get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            auto it = catalog_.runs.find(id);
            if (it == catalog_.runs.end()) return fail(res, 404, "unknown run '" + id + "'");
            send(res, 200, run_detail(it->second, media_url(id)));
        });

        server_.Post("/labels", [this](const httplib::Request& req, httplib::Response& res) {
            QualityLabel label;
            try {
                label = label_from_json(nlohmann::json::parse(req.body));
            } catch (const nlohmann::json::exception& e) {
                return fail(res, 400, std::string("malformed JSON: ") + e.what());
            } catch (const label_error& e) {
                return fail(res, 400, e.what());
            }
            if (!store_.is_known(label.run_id)) return fail(res, 404, "unknown run '" + label.run_id + "'");
            try {
                const auto ack = store_.submit(label);
                nlohmann::json body{{"status", "stored"}, {"seq", ack.seq}, {"label", label_to_json(ack.stored)}};
                body["overwrote"] = ack.overwrote ? audit_to_json(*ack.overwrote) : nlohmann::json(nullptr);
                send(res, 201, body);
            } catch (const label_error& e) {
                fail(res, 422, e.what());
            }
        });

        server_.Get("/agreement", [this](const httplib::Request& req, httplib::Response& res) {
            const auto a = req.get_param_value("a");
            const auto b = req.get_param_value("b");
            if (a.empty() || b.empty()) return fail(res, 400, "parameters a and b are required");
            try {
                const auto r = store_.agreement(a, b);
                auto dis = nlohmann::json::array();
                for (const auto& d : r.disagreements) {
                    dis.push_back({{"run_id", d.run_id}, {"a", to_string(d.a)}, {"b", to_string(d.b)}});
                }
                send(res, 200,
                     {{"a", a},
                      {"b", b},
                      {"kappa", r.result.kappa},
                      {"observed_agreement", r.result.observed_agreement},
                      {"n_items", r.result.n_items},
                      {"disagreements", std::move(dis)}});
            } catch (const label_error& e) {
                fail(res, 409, e.what());
            } catch (const stats_error& e) {
                fail(res, 422, e.what());
            }
        });

        server_.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
            const bool partial = req.get_param_value("partial") == "true";
            const auto r = store_.export_labels(true);
            if (!r.complete && !partial) {
                return send(res, 409, {{"error", "unresolved disagreements"}, {"unresolved", r.set.unresolved}});
            }
            send(res, 200,
                 {{"complete", r.complete},
                  {"unresolved", r.set.unresolved},
                  {"labels_csv", labels_csv(r.set)},
                  {"resolved_csv", resolved_csv(r.set)}});
        });

        server_.Get(R"(/media/([^/]+)\.mp4)", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto url = catalog_.runs.count(id) ? media_url(id) : std::nullopt;
            if (!url) return fail(res, 404, "no media for run '" + id + "'");
            std::ifstream in(opt_.media_dir / (id + ".mp4"), std::ios::binary);
            std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            res.set_content(std::move(bytes), "video/mp4");
        });

        if (!opt_.static_dir.empty()) server_.set_mount_point("/", opt_.static_dir.string());
    }

    const RunCatalog& catalog_;
    LabelStore& store_;
    ServiceOptions opt_;
    httplib::Server server_;
};

}  // namespace vlaj::labels
