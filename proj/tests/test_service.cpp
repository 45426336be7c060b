#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <httplib.h>

#include "ctxfab/service.hpp"
#include "ctxfab/state_manager.hpp"
#include "support.hpp"

using namespace ctxfab;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "ctxfab_service_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string museum(const std::string& file) { return test::data_dir() + "/museum/" + file; }

json rec(Timestamp ts, const std::string& user, const std::string& dev, double x, double y, double px = 1.0) {
  return {{"ts", ts}, {"user", user}, {"device", dev}, {"tech", "WLAN"}, {"sys", "museum"},
          {"x", x},   {"y", y},       {"px", px},      {"py", px},     {"p", 0.9}};
}

std::shared_ptr<Framework> museum_framework() {
  ServiceConfig c;
  c.model_path = museum("model.json");
  c.catalogue_path = museum("catalogue.json");
  std::shared_ptr<Framework> fw = make_framework(c);
  for (const char* u : {"u1", "u2"}) fw->register_user(UserId(u));
  fw->register_device(test::device("d1", "u1", Technology::WLAN));
  fw->register_device(test::device("d2", "u2", Technology::WLAN));
  return fw;
}

struct CommandResult {
  int exit_code;
  std::string out;
};

CommandResult shell(const std::string& cmd) {
  std::string full = cmd + " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return {-1, ""};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string cli() { return CTXFAB_CLI; }

ApiRequest req(std::string method, std::string path, const json& body = nullptr,
               std::map<std::string, std::string> query = {}) {
  return {std::move(method), std::move(path), std::move(query), body.is_null() ? "" : body.dump()};
}

}  // namespace

TEST(Config, ParsesAndValidates) {
  auto path = scratch("cfg.json");
  write(path, R"({"port": 9000, "model": "m.json", "t_stale_ms": 1000, "alpha": 0.5})");
  auto c = load_config(path.string());
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.stale_ms, 1000);
  EXPECT_EQ(c.model_path, (path.parent_path() / "m.json").string());
  EXPECT_EQ(c.framework_config().recommender.alpha, 0.5);
  for (const char* bad : {R"({"t_stale_ms": 0})", R"({"v_drift_mps": -1})", R"({"alpha": 2})", R"({"port": "x"})",
                          R"([1])"}) {
    try {
      config_from_json(json::parse(bad));
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadConfig) << bad;
    }
  }
  EXPECT_THROW(load_config("/nonexistent.json"), Error);
}

TEST(Config, EnvironmentOverridesPath) {
  ::setenv("CTXFAB_CONFIG", "/from/env.json", 1);
  EXPECT_EQ(resolve_config_path("given.json"), "/from/env.json");
  ::unsetenv("CTXFAB_CONFIG");
  EXPECT_EQ(resolve_config_path("given.json"), "given.json");
}

TEST(Config, MissingModelFile) {
  ServiceConfig c;
  c.model_path = "/nonexistent/model.json";
  try {
    make_framework(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelLoadError);
  }
}

TEST(Replay, ThreeValidLines) {
  auto fw = museum_framework();
  std::stringstream trace;
  for (int i = 0; i < 3; ++i) trace << rec(1000 * (i + 1), "u1", "d1", 20 + i, 10).dump() << "\n";
  auto report = replay(*fw, parse_trace(trace));
  EXPECT_EQ(report.accepted, 3u);
  EXPECT_EQ(report.rejected, 0u);
  EXPECT_EQ(report_to_json(report)["accepted"], 3);
}

TEST(Replay, ZeroPrecisionLineRejected) {
  auto fw = museum_framework();
  std::stringstream trace;
  trace << rec(1000, "u1", "d1", 20, 10).dump() << "\n"
        << rec(2000, "u1", "d1", 21, 10, 0.0).dump() << "\n"
        << rec(3000, "u1", "d1", 22, 10).dump() << "\n";
  auto report = replay(*fw, parse_trace(trace));
  EXPECT_EQ(report.accepted, 2u);
  ASSERT_EQ(report.rejections.size(), 1u);
  EXPECT_EQ(report.rejections[0].line, 2u);
  EXPECT_EQ(report.rejections[0].code, ErrorCode::BadCoordinates);
}

TEST(Replay, StructuralProblemsRejectRecordSyntaxAborts) {
  auto fw = museum_framework();
  std::stringstream ok_json;
  ok_json << R"({"ts": 1, "user": "u1"})" << "\n" << rec(5, "u1", "d1", 1, 1).dump() << "\n";
  auto report = replay(*fw, parse_trace(ok_json));
  EXPECT_EQ(report.accepted, 1u);
  EXPECT_EQ(report.rejections.at(0).code, ErrorCode::BadRequest);

  std::stringstream broken;
  broken << rec(1, "u1", "d1", 1, 1).dump() << "\n\n{not json\n";
  try {
    parse_trace(broken);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_EQ(e.detail().rfind("line 3", 0), 0u);
  }
}

TEST(Replay, MissingTimestampReported) {
  auto fw = museum_framework();
  json r = rec(0, "u1", "d1", 1, 1);
  r.erase("ts");
  std::stringstream trace;
  trace << r.dump() << "\n";
  EXPECT_EQ(replay(*fw, parse_trace(trace)).rejections.at(0).code, ErrorCode::MissingTimestamp);
}

TEST(Replay, SpeedFactorDoesNotChangeState) {
  auto trace = read_trace(museum("trace.jsonl"));
  auto build = [&](double speed) {
    auto fw = std::make_unique<Framework>();
    fw->set_model(load_model(museum("model.json")));
    for (const char* u : {"u_visitor", "u_parent", "u_child"}) fw->register_user(UserId(u));
    fw->register_device(test::device("d_vis", "u_visitor", Technology::WLAN));
    fw->register_device(test::device("d_par_w", "u_parent", Technology::WLAN));
    fw->register_device(test::device("d_par_r", "u_parent", Technology::RFID));
    fw->register_device(test::device("d_kid", "u_child", Technology::WLAN));
    auto report = replay(*fw, trace, speed);
    std::string out = event_log_text(report.events);
    for (const char* u : {"u_visitor", "u_parent", "u_child"})
      out += fused_to_json(fw->location().fuse(UserId(u), 13'000)).dump() + "\n";
    return out;
  };
  EXPECT_EQ(build(0.0), build(200.0));  // 12 s of trace replayed in ~60 ms
}

TEST(Replay, TunnelGolden) {
  auto log = event_log_text(run_scenario(test::data_dir() + "/tunnel/scenario.json"));
  EXPECT_EQ(log, read(test::golden_dir() + "/tunnel_events.jsonl"));
  // Spot checks against hand-stepped values.
  std::istringstream lines(log);
  int triggers = 0;
  for (std::string line; std::getline(lines, line);) {
    auto e = json::parse(line);
    if (e["kind"] == "trigger") {
      ++triggers;
      EXPECT_EQ(e["timestamp"], 36'000);
    }
    if (e["kind"] == "fused" && e["t"] == 20'000) {
      double gps = std::sqrt(25.0 + 100.0);  // 5 m fix, 10 s old
      EXPECT_NEAR(e["sigma_x"].get<double>(), 1.0 / std::sqrt(1 / (gps * gps) + 1 / (150.0 * 150.0)), 1e-9);
      EXPECT_EQ(e["sources"], json({"GPS:car_gps", "GSM:phone_gsm"}));
    }
  }
  EXPECT_EQ(triggers, 1);
}

class ApiTest : public ::testing::Test {
 protected:
  ApiTest() : fw(museum_framework()), api(fw, ServiceConfig{}, [] { return Timestamp{5000}; }) {}
  std::shared_ptr<Framework> fw;
  Api api;
};

TEST_F(ApiTest, Health) {
  auto r = api.handle(req("GET", "/health"));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
  EXPECT_EQ(r.body["features"], 9);
}

TEST_F(ApiTest, FixThenPositionMatchesLibrary) {
  auto posted = api.handle(req("POST", "/fixes", rec(4000, "u1", "d1", 20, 10)));
  EXPECT_EQ(posted.status, 201);
  auto got = api.handle(req("GET", "/users/u1/position"));
  ASSERT_EQ(got.status, 200);
  EXPECT_EQ(got.body, position_to_json(StateManager(*fw).answer_position(UserId("u1"), 5000)));
  auto at = api.handle(req("GET", "/users/u1/position", nullptr, {{"now", "4500"}}));
  EXPECT_EQ(at.body["timestamp"], 4500);
}

TEST_F(ApiTest, QueriesMatchLibrary) {
  api.handle(req("POST", "/fixes", rec(4000, "u1", "d1", 20, 10)));
  api.handle(req("POST", "/fixes", rec(4000, "u2", "d2", 30, 10)));
  api.handle(req("POST", "/contexts", {{"user", "u1"}, {"type", "visit"}, {"timestamp", 1}, {"value", "dino"}}));
  StateManager sm(*fw);
  auto vis = api.handle(req("POST", "/queries/visibility", {{"userA", "u1"}, {"userB", "u2"}}));
  EXPECT_EQ(vis.body, visibility_to_json(sm.answer_visibility(UserId("u1"), UserId("u2"), 5000)));
  auto route = api.handle(req("POST", "/queries/route", {{"user", "u1"}, {"goal", "kids_corner"}}));
  EXPECT_EQ(route.body,
            route_to_json(sm.answer_route(UserId("u1"), Target::id(FeatureId("kids_corner")), 5000)));
  auto d = api.handle(req("POST", "/queries/distance", {{"user", "u1"}, {"target", "lectern"}}));
  EXPECT_DOUBLE_EQ(d.body["distance_m"].get<double>(),
                   sm.answer_distance(UserId("u1"), Target::id(FeatureId("lectern")), 5000));
  auto c = api.handle(req("POST", "/queries/containment", {{"shape", "museum"}, {"point", {{"x", 1}, {"y", 1}}}}));
  EXPECT_EQ(c.body["contained"], true);
  auto rec2 = api.handle(req("GET", "/recommendations/u2", nullptr, {{"k", "2"}}));
  auto lib = sm.answer_recommendations(UserId("u2"), 2);
  ASSERT_EQ(rec2.body.size(), lib.size());
  for (std::size_t i = 0; i < lib.size(); ++i) EXPECT_EQ(rec2.body[i]["item"], lib[i].item.str());
  auto latest = api.handle(req("GET", "/contexts/u1/visit"));
  EXPECT_EQ(latest.body["fact"]["value"], "dino");
  auto hist = api.handle(req("GET", "/contexts/u1/visit", nullptr, {{"t0", "0"}, {"t1", "10"}}));
  EXPECT_EQ(hist.body["facts"].size(), 1u);
  auto track = api.handle(req("GET", "/users/u1/track", nullptr, {{"t0", "3000"}, {"t1", "5000"}, {"step", "1000"}}));
  ASSERT_EQ(track.body.size(), 3u);
  EXPECT_TRUE(track.body[0]["position"].is_null());
  EXPECT_FALSE(track.body[1]["position"].is_null());
}

TEST_F(ApiTest, ErrorMapping) {
  EXPECT_EQ(api.handle(req("GET", "/users/u1/position")).status, 422);
  auto silent = api.handle(req("GET", "/users/u1/position"));
  EXPECT_EQ(silent.body["error"], "NoRecentFix");
  EXPECT_EQ(silent.body["detail"], "u1");
  EXPECT_EQ(api.handle(req("POST", "/users", {{"id", "u1"}})).status, 409);
  EXPECT_EQ(api.handle(req("DELETE", "/triggers/none")).status, 404);
  EXPECT_EQ(api.handle(req("GET", "/nowhere")).status, 404);
  EXPECT_EQ(api.handle({"POST", "/fixes", {}, "{broken"}).status, 400);
  EXPECT_EQ(api.handle(req("GET", "/users/u1/track", nullptr, {{"t0", "5"}, {"t1", "1"}})).status, 400);
  auto zpos = rec(1, "u1", "d1", 1, 1);
  zpos["z"] = 2.0;
  EXPECT_EQ(api.handle(req("POST", "/fixes", zpos)).status, 422);
}

TEST_F(ApiTest, MalformedBodiesDoNotMutate) {
  auto before = snapshot_dump(fw->snapshot());
  api.handle({"POST", "/contexts", {}, R"({"user": "u1", "type": "visit", "timestamp": 1})"});
  api.handle({"POST", "/contexts", {}, R"({"user": "u1", "type": "visit", "timestamp": "x", "value": "dino"})"});
  api.handle({"POST", "/devices", {}, R"({"device": "d9"})"});
  api.handle({"POST", "/devices", {}, R"({"device": "d9", "owner": "ghost"})"});
  api.handle({"POST", "/fixes", {}, rec(1, "u1", "d2", 1, 1).dump()});
  api.handle({"POST", "/triggers", {}, R"({"id": "t", "user": "u1", "target": "nope", "threshold_m": 1})"});
  api.handle({"POST", "/triggers", {}, R"({"id": "t", "user": "u1"})"});
  EXPECT_EQ(snapshot_dump(fw->snapshot()), before);
  EXPECT_TRUE(fw->triggers().rules().empty());
  EXPECT_FALSE(fw->location().buffer(UserId("u1")));
}

TEST_F(ApiTest, TriggerLifecycleAndOutbox) {
  json rule{{"id", "near"}, {"user", "u1"}, {"target", "lectern"}, {"threshold_m", 2}};
  EXPECT_EQ(api.handle(req("POST", "/triggers", rule)).status, 201);
  EXPECT_EQ(api.handle(req("POST", "/triggers", rule)).status, 409);
  auto fired = api.handle(req("POST", "/fixes", rec(4000, "u1", "d1", 31, 10)));
  EXPECT_EQ(fired.body["events"].size(), 1u);
  auto outbox = api.handle(req("GET", "/outbox", nullptr, {{"since", "0"}}));
  ASSERT_EQ(outbox.body.size(), 1u);
  EXPECT_EQ(outbox.body[0]["rule_id"], "near");
  EXPECT_EQ(api.handle(req("DELETE", "/triggers/near")).status, 200);
}

TEST_F(ApiTest, SnapshotSaveAndLoad) {
  api.handle(req("POST", "/contexts", {{"user", "u1"}, {"type", "activity"}, {"timestamp", 3}, {"value", "x"}}));
  auto path = scratch("api_snap.json").string();
  EXPECT_EQ(api.handle(req("POST", "/snapshot", {{"action", "save"}, {"path", path}})).status, 200);
  api.handle(req("POST", "/contexts", {{"user", "u1"}, {"type", "activity"}, {"timestamp", 4}, {"value", "y"}}));
  EXPECT_EQ(api.handle(req("POST", "/snapshot", {{"action", "load"}, {"path", path}})).status, 200);
  EXPECT_EQ(api.handle(req("GET", "/contexts/u1/activity")).body["fact"]["value"], "x");
  EXPECT_EQ(api.handle(req("GET", "/health")).body["features"], 9);
}

TEST(HttpServer, ServesOverTheWire) {
  auto fw = museum_framework();
  Api api(fw, ServiceConfig{});
  Server server(api);
  int port = server.start_background("127.0.0.1");
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["features"], 9);
  auto post = client.Post("/fixes", rec(1000, "u1", "d1", 5, 5).dump(), "application/json");
  ASSERT_TRUE(post);
  EXPECT_EQ(post->status, 201);
  auto pos = client.Get("/users/u1/position?now=1000");
  ASSERT_TRUE(pos);
  EXPECT_EQ(json::parse(pos->body)["x"], 5.0);
  server.stop();
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(shell(cli()).exit_code, 2);
  EXPECT_EQ(shell(cli() + " frobnicate").exit_code, 2);
  EXPECT_EQ(shell(cli() + " query visibility onlyone --model " + museum("model.json")).exit_code, 2);
  EXPECT_EQ(shell(cli() + " --help").exit_code, 0);
}

TEST(Cli, ServeWithMissingModelFails) {
  auto cfg = scratch("bad_serve.json");
  write(cfg, R"({"model": "/nonexistent/model.json", "port": 1})");
  auto r = shell(cli() + " serve --config " + cfg.string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("ModelLoadError"), std::string::npos);
}

TEST(Cli, ReplayReport) {
  auto r = shell(cli() + " replay " + museum("trace.jsonl") + " --model " + museum("model.json"));
  // No devices are registered in a bare framework, so every record is rejected.
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out)["accepted"], 0);
}

class CliState : public ::testing::Test {
 protected:
  void SetUp() override {
    Framework fw;
    for (const char* u : {"u1", "u2", "u3"}) fw.register_user(UserId(u));
    fw.register_device(test::device("d1", "u1", Technology::WLAN));
    fw.register_device(test::device("d2", "u2", Technology::WLAN));
    fw.put_fact(test::fact("u1", "visit", 1, "dino"));
    fw.put_fact(test::fact("u1", "visit", 2, "robot"));
    fw.put_fact(test::fact("u2", "visit", 1, "dino"));
    fw.put_fact(test::fact("u3", "visit", 1, "monet"));
    snapshot = scratch("cli_snap.json").string();
    snapshot_save(snapshot, fw.snapshot());
    trace = scratch("cli_trace.jsonl").string();
    write(trace, rec(1000, "u1", "d1", 20, 10).dump() + "\n");
    common = " --model " + museum("model.json") + " --catalogue " + museum("catalogue.json") + " --snapshot " + snapshot;
  }
  std::string snapshot, trace, common;
};

TEST_F(CliState, CheckValidSnapshot) {
  auto r = shell(cli() + " check" + common);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out), json::array());
}

TEST_F(CliState, CheckReportsViolations) {
  auto r = shell(cli() + " check --snapshot " + snapshot);  // no catalogue: every visit is unknown
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.out).size(), 4u);
}

TEST_F(CliState, SilentUserVisibility) {
  auto r = shell(cli() + " query visibility u1 u2" + common + " --trace " + trace);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("NoRecentFix: u2"), std::string::npos);
}

TEST_F(CliState, RecommendMatchesLibrary) {
  auto r = shell(cli() + " query recommend u2 3" + common);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  ServiceConfig c;
  c.model_path = museum("model.json");
  c.catalogue_path = museum("catalogue.json");
  c.snapshot_path = snapshot;
  auto fw = make_framework(c);
  EXPECT_EQ(json::parse(r.out), run_query(*fw, "recommend", {{"user", "u2"}, {"k", 3}}, 0));
}

TEST_F(CliState, SnapshotOfflineRoundTrip) {
  auto out = scratch("cli_snap_copy.json").string();
  EXPECT_EQ(shell(cli() + " snapshot save --out " + out + " --snapshot " + snapshot).exit_code, 0);
  EXPECT_EQ(read(out), read(snapshot));
  auto r = shell(cli() + " snapshot load --file " + out);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out)["facts"], 4);
}

TEST(Cli, LiveServiceQuery) {
  auto fw = museum_framework();
  fw->ingest_fix(trace_record_from_json(rec(1000, "u1", "d1", 20, 10)));
  Api api(fw, ServiceConfig{});
  Server server(api);
  int port = server.start_background("127.0.0.1");
  std::string url = " --url http://127.0.0.1:" + std::to_string(port);
  auto ok = shell(cli() + " query position u1 --now 1000" + url);
  EXPECT_EQ(ok.exit_code, 0) << ok.out;
  EXPECT_EQ(json::parse(ok.out)["x"], 20.0);
  auto silent = shell(cli() + " query visibility u1 u2 --now 1000" + url);
  EXPECT_EQ(silent.exit_code, 1);
  EXPECT_NE(silent.out.find("NoRecentFix: u2"), std::string::npos);
  server.stop();
}
