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

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "support.hpp"
#include "vlaj/labels/service.hpp"
#include "vlaj/trace/io.hpp"
#include "vlaj/trace/synth.hpp"

using namespace vlaj;
using namespace vlaj::labels;
using vlaj::testing::TempDir;
using json = nlohmann::json;

namespace {

QualityLabel lab(std::string run, std::string who, QualityLevel level, std::string session = "s1") {
    return {std::move(run), std::move(who), level, "", std::move(session)};
}

std::map<std::string, bool> eligible(int ok, int failing = 0) {
    std::map<std::string, bool> m;
    for (int i = 0; i < ok; ++i) m["ok" + std::to_string(1000 + i)] = true;
    for (int i = 0; i < failing; ++i) m["bad" + std::to_string(i)] = false;
    return m;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(LabelJson, RoundTripAndErrors) {
    QualityLabel l{"r1", "ann", QualityLevel::false_negative, "2026-01-01T00:00:00Z", "s"};
    EXPECT_EQ(label_from_json(label_to_json(l)), l);
    EXPECT_THROW(label_from_json(json{{"run_id", "r"}, {"annotator_id", "a"}, {"session_id", "s"}}), label_error);
    EXPECT_THROW(label_from_json(json{{"run_id", "r"}, {"annotator_id", "a"}, {"session_id", "s"}, {"label", "great"}}),
                 error);
    EXPECT_THROW(label_from_json(json{{"run_id", 3}, {"annotator_id", "a"}, {"session_id", "s"}, {"label", "high"}}),
                 label_error);
    const auto ts = utc_timestamp();
    EXPECT_EQ(ts.size(), 20u);
    EXPECT_EQ(ts.back(), 'Z');
}

TEST(LabelStore, SubmitOverwriteAndAudit) {
    TempDir dir("store");
    LabelStore store(dir / "labels.jsonl", eligible(3, 1));
    const auto first = store.submit(lab("ok1000", "alice", QualityLevel::high));
    EXPECT_EQ(first.seq, 1u);
    EXPECT_FALSE(first.overwrote);
    EXPECT_FALSE(first.stored.timestamp.empty());
    const auto second = store.submit(lab("ok1000", "alice", QualityLevel::low));
    ASSERT_TRUE(second.overwrote);
    EXPECT_EQ(second.overwrote->previous, QualityLevel::high);
    EXPECT_EQ(second.overwrote->current, QualityLevel::low);
    EXPECT_EQ(second.overwrote->seq, 2u);
    ASSERT_EQ(store.audits().size(), 1u);

    const auto set = store.label_set();
    ASSERT_EQ(set.labels.size(), 1u);
    EXPECT_EQ(set.labels[0].label, QualityLevel::low);

    EXPECT_THROW(store.submit(lab("nope", "alice", QualityLevel::high)), label_error);
    EXPECT_THROW(store.submit(lab("bad0", "alice", QualityLevel::high)), label_error);
    EXPECT_THROW(store.submit(lab("ok1001", "", QualityLevel::high)), label_error);
    EXPECT_THROW(store.submit(lab("ok1001", "alice", QualityLevel::high, "")), label_error);

    // The log holds exactly the two accepted events, the second marked as an overwrite.
    std::istringstream log(slurp(dir / "labels.jsonl"));
    std::string line;
    std::vector<json> events;
    while (std::getline(log, line)) events.push_back(json::parse(line));
    ASSERT_EQ(events.size(), 2u);
    EXPECT_FALSE(events[0].contains("overwrites"));
    EXPECT_EQ(events[1]["overwrites"]["label"], "high");
}

TEST(LabelStore, ReplayRestoresState) {
    TempDir dir("replay");
    const auto path = dir / "labels.jsonl";
    LabelSet before;
    {
        LabelStore store(path, eligible(4));
        store.submit(lab("ok1000", "alice", QualityLevel::high));
        store.submit(lab("ok1000", "bob", QualityLevel::medium));
        store.submit(lab("ok1001", "alice", QualityLevel::low));
        store.submit(lab("ok1000", "bob", QualityLevel::high));
        store.submit(lab("ok1002", "carol", QualityLevel::medium));
        before = store.label_set();
    }
    LabelStore reopened(path, eligible(4));
    EXPECT_EQ(reopened.label_set(), before);
    EXPECT_EQ(reopened.audits().size(), 1u);
    const auto next = reopened.submit(lab("ok1003", "alice", QualityLevel::high));
    EXPECT_EQ(next.seq, 6u);

    std::istringstream bad("{\"event\":\"label\"}\nnot json\n");
    try {
        replay(bad);
        FAIL() << "expected a replay error";
    } catch (const error& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
    }
}

TEST(LabelStore, NextBatchOrderAndSessionCap) {
    TempDir dir("batch");
    LabelStore store(dir / "labels.jsonl", eligible(200, 5));
    auto batch = store.next_batch("alice", "s1");
    ASSERT_EQ(batch.size(), default_batch_limit);
    EXPECT_TRUE(std::is_sorted(batch.begin(), batch.end()));
    for (const auto& id : batch) EXPECT_EQ(id.rfind("ok", 0), 0u);

    for (int i = 0; i < 10; ++i) store.submit(lab(batch[static_cast<std::size_t>(i)], "alice", QualityLevel::high));
    auto after = store.next_batch("alice", "s1");
    EXPECT_EQ(after.size(), default_batch_limit - 10);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(std::count(after.begin(), after.end(), batch[static_cast<std::size_t>(i)]), 0);
    }
    EXPECT_EQ(after.front(), batch[10]);
    // A new session has a fresh cap but still skips labeled runs.
    auto fresh = store.next_batch("alice", "s2");
    EXPECT_EQ(fresh.size(), default_batch_limit);
    EXPECT_EQ(fresh.front(), batch[10]);
    // Another annotator is unaffected.
    EXPECT_EQ(store.next_batch("bob", "s1").front(), batch[0]);
    EXPECT_EQ(store.next_batch("alice", "s1", 5).size(), 0u);
    EXPECT_EQ(store.next_batch("alice", "s1", 12).size(), 2u);

    LabelStore small(dir / "small.jsonl", eligible(10, 3));
    EXPECT_EQ(small.next_batch("x", "s").size(), 10u);
}

TEST(LabelStore, ResolutionRules) {
    using L = QualityLabel;
    auto r = [](std::vector<L> v) { return LabelState::resolve(v); };
    EXPECT_FALSE(r({}));
    EXPECT_EQ(r({lab("a", "x", QualityLevel::low)})->label, QualityLevel::low);
    const auto agree = r({lab("a", "x", QualityLevel::high), lab("a", "y", QualityLevel::high)});
    EXPECT_EQ(agree->label, QualityLevel::high);
    EXPECT_FALSE(agree->resolver_id);
    EXPECT_FALSE(r({lab("a", "x", QualityLevel::high), lab("a", "y", QualityLevel::low)}));
    const auto third = r({lab("a", "x", QualityLevel::high), lab("a", "y", QualityLevel::low),
                          lab("a", "z", QualityLevel::medium)});
    EXPECT_EQ(third->label, QualityLevel::medium);
    EXPECT_EQ(third->resolver_id, "z");
}

TEST(LabelStore, ExportBlocksOnDisagreement) {
    TempDir dir("export");
    LabelStore store(dir / "labels.jsonl", eligible(3));
    store.submit(lab("ok1000", "alice", QualityLevel::high));
    store.submit(lab("ok1000", "bob", QualityLevel::low));
    store.submit(lab("ok1001", "alice", QualityLevel::medium));
    EXPECT_THROW(store.export_labels(), label_error);
    EXPECT_THROW(store.export_to(dir / "out"), label_error);
    const auto partial = store.export_labels(true);
    EXPECT_FALSE(partial.complete);
    EXPECT_EQ(partial.set.unresolved, std::vector<std::string>{"ok1000"});
    EXPECT_EQ(resolved_csv(partial.set), "run_id,label,resolver_id\nok1001,medium,\n");

    store.submit(lab("ok1000", "carol", QualityLevel::low));
    const auto full = store.export_labels();
    EXPECT_TRUE(full.complete);
    store.export_to(dir / "out");
    EXPECT_EQ(slurp(dir / "out/resolved.csv"), "run_id,label,resolver_id\nok1000,low,carol\nok1001,medium,\n");
    std::ifstream in(dir / "out/resolved.csv");
    const auto read = read_resolved_csv(in);
    EXPECT_EQ(read.at("ok1000"), QualityLevel::low);
    EXPECT_EQ(read.size(), 2u);
    const auto labels = slurp(dir / "out/labels.csv");
    EXPECT_EQ(std::count(labels.begin(), labels.end(), '\n'), 5);
}

TEST(LabelStore, AgreementKappa) {
    TempDir dir("kappa");
    LabelStore store(dir / "labels.jsonl", eligible(50));
    int i = 0;
    auto both = [&](QualityLevel a, QualityLevel b, int n) {
        for (int k = 0; k < n; ++k, ++i) {
            const auto id = "ok" + std::to_string(1000 + i);
            store.submit(lab(id, "alice", a));
            store.submit(lab(id, "bob", b));
        }
    };
    both(QualityLevel::high, QualityLevel::high, 20);
    both(QualityLevel::high, QualityLevel::low, 5);
    both(QualityLevel::low, QualityLevel::high, 5);
    both(QualityLevel::low, QualityLevel::low, 20);
    const auto r = store.agreement("alice", "bob");
    EXPECT_NEAR(r.result.kappa, 0.6, 1e-12);
    EXPECT_EQ(r.result.n_items, 50u);
    EXPECT_EQ(r.disagreements.size(), 10u);
    EXPECT_THROW(store.agreement("alice", "nobody"), label_error);
}

TEST(LabelStore, ConcurrentSubmitters) {
    TempDir dir("concurrent");
    const auto path = dir / "labels.jsonl";
    {
        LabelStore store(path, eligible(100));
        std::vector<std::jthread> workers;
        for (int w = 0; w < 4; ++w) {
            workers.emplace_back([&store, w] {
                for (int i = 0; i < 100; ++i) {
                    store.submit(lab("ok" + std::to_string(1000 + i), "ann" + std::to_string(w), QualityLevel::high));
                    (void)store.next_batch("ann" + std::to_string(w), "s1");
                }
            });
        }
    }
    LabelStore reopened(path, eligible(100));
    EXPECT_EQ(reopened.label_set().labels.size(), 400u);
    const auto next = reopened.submit(lab("ok1000", "ann0", QualityLevel::low));
    EXPECT_EQ(next.seq, 401u);
}

// ---------------------------------------------------------------------------
// HTTP service

namespace {

struct ServiceFixture {
    TempDir dir{"service"};
    RunCatalog catalog;
    std::unique_ptr<LabelStore> store;
    std::unique_ptr<LabelService> service;
    std::jthread thread;
    int port = -1;

    ServiceFixture() {
        trace::SynthOptions so;
        so.steps = 40;
        for (int i = 0; i < 6; ++i) {
            auto t = trace::generate_synthetic(trace::Profile::smooth, trace::Task::pick_up, static_cast<std::uint64_t>(i), so);
            t.header.run_id = "run" + std::to_string(i);
            catalog.runs.emplace(t.header.run_id, std::move(t));
        }
        auto f = trace::generate_synthetic(trace::Profile::failing, trace::Task::pick_up, 99, so);
        f.header.run_id = "zfail";
        catalog.runs.emplace(f.header.run_id, std::move(f));
        std::filesystem::create_directories(dir / "media");
        std::ofstream(dir / "media/run0.mp4", std::ios::binary) << "fakevideo";
        start();
    }

    void start() {
        store = std::make_unique<LabelStore>(dir / "labels.jsonl", catalog.eligibility());
        ServiceOptions opt;
        opt.media_dir = dir / "media";
        service = std::make_unique<LabelService>(catalog, *store, opt);
        port = service->bind_any("127.0.0.1");
        ASSERT_GT(port, 0);
        thread = std::jthread([this] { service->listen_after_bind(); });
        service->server().wait_until_ready();
    }

    void stop() {
        service->stop();
        thread = {};
        service.reset();
        store.reset();
    }

    ~ServiceFixture() {
        if (service) stop();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_connection_timeout(5);
        return c;
    }
};

json body(const httplib::Result& r) { return json::parse(r->body); }

httplib::Result post_label(httplib::Client& c, const std::string& run, const std::string& who, const std::string& level,
                           const std::string& session = "s1") {
    return c.Post("/labels",
                  json{{"run_id", run}, {"annotator_id", who}, {"label", level}, {"session_id", session}}.dump(),
                  "application/json");
}

}  // namespace

TEST(LabelService, NextBatchAndRunDetail) {
    ServiceFixture fx;
    auto c = fx.client();
    auto r = c.Get("/runs/next?annotator=alice&session=s1&limit=4");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
    const auto j = body(r);
    EXPECT_EQ(j["cap"], 4);
    ASSERT_EQ(j["runs"].size(), 4u);
    EXPECT_EQ(j["runs"][0]["run_id"], "run0");
    EXPECT_EQ(j["runs"][0]["media_url"], "/media/run0.mp4");
    EXPECT_TRUE(j["runs"][1]["media_url"].is_null());
    EXPECT_FALSE(j["runs"][0].contains("success"));
    EXPECT_EQ(j["runs"][0]["steps"], 40);

    EXPECT_EQ(body(c.Get("/runs/next?annotator=alice&session=s1"))["runs"].size(), 6u);
    EXPECT_EQ(c.Get("/runs/next?annotator=alice")->status, 400);
    EXPECT_EQ(c.Get("/runs/next?annotator=alice&session=s1&limit=-2")->status, 400);
    EXPECT_EQ(c.Get("/runs/next?annotator=alice&session=s1&limit=3x")->status, 400);

    auto d = c.Get("/runs/run2");
    ASSERT_EQ(d->status, 200);
    const auto detail = body(d);
    EXPECT_EQ(detail["tcp_path"].size(), 40u);
    EXPECT_EQ(detail["gripper_open"].size(), 40u);
    EXPECT_FALSE(detail["objects"].empty());
    EXPECT_EQ(c.Get("/runs/ghost")->status, 404);

    auto m = c.Get("/media/run0.mp4");
    EXPECT_EQ(m->status, 200);
    EXPECT_EQ(m->body, "fakevideo");
    EXPECT_EQ(m->get_header_value("Content-Type"), "video/mp4");
    EXPECT_EQ(c.Get("/media/run1.mp4")->status, 404);

    auto pre = c.Options("/labels");
    EXPECT_EQ(pre->status, 204);
}

TEST(LabelService, PostLabelStatusCodes) {
    ServiceFixture fx;
    auto c = fx.client();
    auto ok = post_label(c, "run1", "alice", "high");
    ASSERT_EQ(ok->status, 201);
    EXPECT_EQ(body(ok)["seq"], 1);
    EXPECT_TRUE(body(ok)["overwrote"].is_null());
    auto again = post_label(c, "run1", "alice", "medium");
    ASSERT_EQ(again->status, 201);
    EXPECT_EQ(body(again)["overwrote"]["previous"], "high");
    EXPECT_EQ(post_label(c, "ghost", "alice", "high")->status, 404);
    EXPECT_EQ(post_label(c, "zfail", "alice", "high")->status, 422);
    EXPECT_EQ(post_label(c, "run1", "alice", "superb")->status, 400);
    EXPECT_EQ(c.Post("/labels", "{not json", "application/json")->status, 400);
    EXPECT_EQ(c.Post("/labels", json{{"run_id", "run1"}}.dump(), "application/json")->status, 400);

    const auto next = body(c.Get("/runs/next?annotator=alice&session=s1"));
    EXPECT_EQ(next["session_count"], 1);
    for (const auto& run : next["runs"]) EXPECT_NE(run["run_id"], "run1");
}

TEST(LabelService, AgreementAndExport) {
    ServiceFixture fx;
    auto c = fx.client();
    EXPECT_EQ(c.Get("/agreement?a=alice")->status, 400);
    EXPECT_EQ(c.Get("/agreement?a=alice&b=bob")->status, 409);
    post_label(c, "run0", "alice", "high");
    post_label(c, "run0", "bob", "high");
    EXPECT_EQ(c.Get("/agreement?a=alice&b=bob")->status, 422);
    post_label(c, "run1", "alice", "low");
    post_label(c, "run1", "bob", "medium");
    auto a = c.Get("/agreement?a=alice&b=bob");
    ASSERT_EQ(a->status, 200);
    const auto aj = body(a);
    EXPECT_EQ(aj["n_items"], 2);
    EXPECT_EQ(aj["observed_agreement"], 0.5);
    ASSERT_EQ(aj["disagreements"].size(), 1u);
    EXPECT_EQ(aj["disagreements"][0]["run_id"], "run1");

    auto blocked = c.Get("/export");
    ASSERT_EQ(blocked->status, 409);
    EXPECT_EQ(body(blocked)["unresolved"], json::array({"run1"}));
    auto partial = c.Get("/export?partial=true");
    ASSERT_EQ(partial->status, 200);
    EXPECT_FALSE(body(partial)["complete"]);
    post_label(c, "run1", "carol", "low");
    auto full = c.Get("/export");
    ASSERT_EQ(full->status, 200);
    const auto fj = body(full);
    EXPECT_TRUE(fj["complete"]);
    EXPECT_EQ(fj["resolved_csv"], "run_id,label,resolver_id\nrun0,high,\nrun1,low,carol\n");
}

TEST(LabelService, ScriptedSessionSurvivesRestart) {
    ServiceFixture fx;
    std::string before;
    {
        auto c = fx.client();
        const auto batch = body(c.Get("/runs/next?annotator=alice&session=s1&limit=5"))["runs"];
        ASSERT_EQ(batch.size(), 5u);
        const char* levels[] = {"high", "medium", "low", "high", "false_negative"};
        for (std::size_t i = 0; i < batch.size(); ++i) {
            ASSERT_EQ(post_label(c, batch[i]["run_id"], "alice", levels[i])->status, 201);
        }
        auto e = c.Get("/export");
        ASSERT_EQ(e->status, 200);
        before = body(e)["resolved_csv"];
        EXPECT_EQ(std::count(before.begin(), before.end(), '\n'), 6);
    }
    fx.stop();
    fx.start();
    auto c = fx.client();
    const auto e = c.Get("/export");
    ASSERT_EQ(e->status, 200);
    EXPECT_EQ(body(e)["resolved_csv"], before);
    const auto next = body(c.Get("/runs/next?annotator=alice&session=s1&limit=160"));
    EXPECT_EQ(next["session_count"], 5);
    ASSERT_EQ(next["runs"].size(), 1u);
    EXPECT_EQ(next["runs"][0]["run_id"], "run5");
}

TEST(RunCatalog, LoadDirRecordsBadFiles) {
    TempDir dir("catalog");
    trace::SynthOptions so;
    so.steps = 20;
    for (int i = 0; i < 3; ++i) {
        auto t = trace::generate_synthetic(trace::Profile::smooth, trace::Task::pick_up, static_cast<std::uint64_t>(i), so);
        t.header.run_id = "r" + std::to_string(i);
        std::ofstream out(dir / ("r" + std::to_string(i) + ".jsonl"));
        trace::write_trace(out, t);
    }
    std::ofstream(dir / "broken.jsonl") << "{oops\n";
    std::ofstream(dir / "notes.txt") << "ignored";
    const auto c = RunCatalog::load_dir(dir.path());
    EXPECT_EQ(c.runs.size(), 3u);
    ASSERT_EQ(c.load_errors.size(), 1u);
    EXPECT_NE(c.load_errors[0].find("broken.jsonl"), std::string::npos);
    for (const auto& [id, ok] : c.eligibility()) EXPECT_TRUE(ok) << id;
    EXPECT_THROW(RunCatalog::load_dir(dir / "missing"), error);
}
