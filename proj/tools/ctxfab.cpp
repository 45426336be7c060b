#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ctxfab/service.hpp"

using namespace ctxfab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct Sources {
  std::string config;
  std::string url;
  std::string model;
  std::string catalogue;
  std::string snapshot;
  std::string trace;

  void attach(CLI::App* app, bool with_trace = true) {
    app->add_option("--config", config, "Config file (CTXFAB_CONFIG overrides)");
    app->add_option("--url", url, "Base URL of a running service");
    app->add_option("--model", model, "Spatial model file");
    app->add_option("--catalogue", catalogue, "Item catalogue file");
    app->add_option("--snapshot", snapshot, "Snapshot file");
    if (with_trace) app->add_option("--trace", trace, "Trace replayed before answering");
  }

  ServiceConfig service_config() const {
    std::string path = resolve_config_path(config);
    ServiceConfig c = path.empty() ? ServiceConfig{} : load_config(path);
    if (!model.empty()) c.model_path = model;
    if (!catalogue.empty()) c.catalogue_path = catalogue;
    if (!snapshot.empty()) c.snapshot_path = snapshot;
    return c;
  }

  std::unique_ptr<Framework> framework(Timestamp* latest = nullptr) const {
    auto fw = make_framework(service_config());
    if (!trace.empty()) {
      auto lines = read_trace(trace);
      replay(*fw, lines);
      if (latest)
        for (const auto& l : lines)
          if (l.record.contains("ts") && l.record.at("ts").is_number_integer())
            *latest = std::max(*latest, l.record.at("ts").get<Timestamp>());
    }
    return fw;
  }
};

/// Sends a request to a live service. Non-2xx responses become Error.
json call(const std::string& url, const std::string& method, const std::string& path, const json& body = nullptr) {
  httplib::Client client(url);
  client.set_connection_timeout(5);
  httplib::Result res = method == "GET"      ? client.Get(path)
                        : method == "DELETE" ? client.Delete(path)
                                             : client.Post(path, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::IoError, "cannot reach " + url + ": " + httplib::to_string(res.error()));
  json out = json::parse(res->body, nullptr, false);
  if (res->status >= 400) {
    std::string code = out.is_object() ? out.value("error", std::string("HttpError")) : "HttpError";
    std::string detail = out.is_object() ? out.value("detail", std::string{}) : res->body;
    auto parsed = error_code_from_string(code);
    throw Error(parsed.value_or(ErrorCode::BadRequest), detail);
  }
  return out;
}

/// "x,y" becomes a point; anything else is a feature id.
json target_arg(const std::string& s) {
  auto comma = s.find(',');
  if (comma != std::string::npos) {
    try {
      return {{"x", std::stod(s.substr(0, comma))}, {"y", std::stod(s.substr(comma + 1))}};
    } catch (const std::exception&) {
    }
  }
  return s;
}

json query_args(const std::string& kind, const std::vector<std::string>& a) {
  auto need = [&](std::size_t n) {
    if (a.size() != n)
      throw CLI::ValidationError("query " + kind, "expects " + std::to_string(n) + " argument(s)");
  };
  if (kind == "visibility") return need(2), json{{"userA", a[0]}, {"userB", a[1]}};
  if (kind == "position") return need(1), json{{"user", a[0]}};
  if (kind == "route") return need(2), json{{"user", a[0]}, {"goal", target_arg(a[1])}};
  if (kind == "distance") return need(2), json{{"user", a[0]}, {"target", target_arg(a[1])}};
  if (kind == "recommend") {
    need(2);
    int k = 0;
    try {
      k = std::stoi(a[1]);
    } catch (const std::exception&) {
      throw CLI::ValidationError("query recommend", "k must be an integer");
    }
    return {{"user", a[0]}, {"k", k}};
  }
  if (kind == "containment") {
    need(2);
    json t = target_arg(a[1]);
    return t.is_object() ? json{{"shape", a[0]}, {"point", t}} : json{{"shape", a[0]}, {"inner", a[1]}};
  }
  if (kind == "presentation") return need(2), json{{"user", a[0]}, {"content", target_arg(a[1])}};
  throw CLI::ValidationError("query", "unknown query kind '" + kind + "'");
}

json live_query(const std::string& url, const std::string& kind, json args, std::optional<Timestamp> now) {
  std::string suffix = now ? "?now=" + std::to_string(*now) : "";
  if (kind == "position") return call(url, "GET", "/users/" + args.at("user").get<std::string>() + "/position" + suffix);
  if (kind == "recommend")
    return call(url, "GET",
                "/recommendations/" + args.at("user").get<std::string>() + "?k=" + std::to_string(args.at("k").get<int>()));
  if (now) args["now"] = *now;
  return call(url, "POST", "/queries/" + kind, args);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
}

int serve(const std::string& config_path, int port_override) {
  ServiceConfig config = load_config(resolve_config_path(config_path));
  if (port_override > 0) config.port = port_override;
  if (config.model_path.empty()) throw Error(ErrorCode::ModelLoadError, "no model configured");
  std::shared_ptr<Framework> fw = make_framework(config);
  Api api(fw, config);
  Server server(api);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread watcher([&server] {
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  std::cerr << "listening on " << config.host << ":" << config.port << "\n";
  try {
    server.run(config.host, config.port);
  } catch (...) {
    g_stop = true;
    watcher.join();
    throw;
  }
  g_stop = true;
  watcher.join();
  if (!config.snapshot_path.empty()) snapshot_save(config.snapshot_path, api.framework()->snapshot());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctxfab: context-aware framework service and tools"};
  app.require_subcommand(1);

  std::string config_path = "ctxfab.json";
  int port = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", config_path, "Config file (CTXFAB_CONFIG overrides)");
  serve_cmd->add_option("--port", port, "Override the configured port");

  std::string trace_path, events_out, snapshot_out;
  double speed = 0.0;
  Sources replay_src;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a JSON-Lines trace");
  replay_cmd->add_option("trace", trace_path, "Trace file")->required();
  replay_cmd->add_option("--speed", speed, "Speed factor; 0 runs as fast as possible")->check(CLI::NonNegativeNumber);
  replay_cmd->add_option("--events", events_out, "Write the event log here");
  replay_cmd->add_option("--save-snapshot", snapshot_out, "Write the final state here");
  replay_src.attach(replay_cmd, false);

  std::string kind;
  std::vector<std::string> query_rest;
  std::optional<Timestamp> now;
  Sources query_src;
  auto* query_cmd = app.add_subcommand("query", "Ask a question of a live service or loaded state");
  query_cmd->add_option("kind", kind, "visibility|position|route|recommend|distance|containment|presentation")
      ->required();
  query_cmd->add_option("args", query_rest, "Query arguments");
  query_cmd->add_option("--now", now, "Query time in ms (defaults to the newest trace time or the clock)");
  query_src.attach(query_cmd);

  Sources check_src;
  auto* check_cmd = app.add_subcommand("check", "Report consistency violations");
  check_src.attach(check_cmd);

  std::string snap_action, snap_file;
  Sources snap_src;
  auto* snap_cmd = app.add_subcommand("snapshot", "Save or load a snapshot");
  snap_cmd->add_option("action", snap_action, "save|load")->required()->check(CLI::IsMember({"save", "load"}));
  snap_cmd->add_option("--file,--out", snap_file, "Snapshot file to write or read");
  snap_src.attach(snap_cmd);

  std::string scenario_path, scenario_out;
  auto* scenario_cmd = app.add_subcommand("scenario", "Run a scripted scenario and print its event log");
  scenario_cmd->add_option("file", scenario_path, "Scenario file")->required();
  scenario_cmd->add_option("--out", scenario_out, "Write the event log here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*serve_cmd) return serve(config_path, port);

    if (*replay_cmd) {
      auto fw = replay_src.framework();
      ReplayReport report = replay_file(*fw, trace_path, speed);
      if (!events_out.empty()) write_text(events_out, event_log_text(report.events));
      if (!snapshot_out.empty()) snapshot_save(snapshot_out, fw->snapshot());
      std::cout << report_to_json(report).dump(2) << "\n";
      return kExitOk;
    }

    if (*query_cmd) {
      json args = query_args(kind, query_rest);
      json result;
      if (!query_src.url.empty()) {
        result = live_query(query_src.url, kind, args, now);
      } else {
        Timestamp latest = std::numeric_limits<Timestamp>::min();
        auto fw = query_src.framework(&latest);
        Timestamp t = now ? *now : latest != std::numeric_limits<Timestamp>::min() ? latest : wall_clock_ms();
        result = run_query(*fw, kind, args, t);
      }
      std::cout << result.dump(2) << "\n";
      return kExitOk;
    }

    if (*check_cmd) {
      json report = json::array();
      if (!check_src.url.empty()) {
        report = call(check_src.url, "GET", "/consistency");
      } else {
        for (const auto& v : check_src.framework()->check_consistency()) report.push_back(violation_to_json(v));
      }
      std::cout << report.dump(2) << "\n";
      return report.empty() ? kExitOk : kExitError;
    }

    if (*snap_cmd) {
      if (!snap_src.url.empty()) {
        json body{{"action", snap_action}};
        if (!snap_file.empty()) body["path"] = snap_file;
        std::cout << call(snap_src.url, "POST", "/snapshot", body).dump(2) << "\n";
        return kExitOk;
      }
      if (snap_action == "save") {
        if (snap_file.empty()) throw CLI::ValidationError("snapshot save", "--out is required offline");
        snapshot_save(snap_file, snap_src.framework()->snapshot());
        std::cout << json{{"saved", snap_file}}.dump(2) << "\n";
      } else {
        if (snap_file.empty()) throw CLI::ValidationError("snapshot load", "--file is required offline");
        SnapshotState s = snapshot_load(snap_file);
        std::cout << json{{"loaded", snap_file},
                          {"users", s.users.size()},
                          {"devices", s.devices.size()},
                          {"facts", s.facts.size()}}
                         .dump(2)
                  << "\n";
      }
      return kExitOk;
    }

    if (*scenario_cmd) {
      write_text(scenario_out, event_log_text(run_scenario(scenario_path)));
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
