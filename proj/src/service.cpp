#include "ctxfab/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ctxfab/state_manager.hpp"

namespace ctxfab {
namespace {

namespace fs = std::filesystem;

std::string resolve_relative(const std::string& path, const fs::path& base) {
  if (path.empty()) return path;
  fs::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::BadRequest, std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double number_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

Vec2 point_from_json(const nlohmann::json& j) { return {number_field(j, "x"), number_field(j, "y")}; }

nlohmann::json fused_event(const FusedPosition& f) {
  auto sources = nlohmann::json::array();
  for (const auto& s : f.sources) sources.push_back(std::string(to_string(s.technology)) + ":" + s.device.str());
  return {{"kind", "fused"},      {"t", f.timestamp},         {"user", f.user.str()},
          {"x", f.x},             {"y", f.y},                 {"sigma_x", f.sigma_x},
          {"sigma_y", f.sigma_y}, {"probability", f.probability}, {"sources", sources}};
}

nlohmann::json trigger_event(const FiredEvent& e) {
  auto j = event_to_json(e);
  j["kind"] = "trigger";
  return j;
}

Timestamp record_time(const nlohmann::json& record) {
  if (record.is_object() && record.contains("ts") && record.at("ts").is_number_integer())
    return record.at("ts").get<Timestamp>();
  return std::numeric_limits<Timestamp>::min();
}

/// Ingests one trace record, appending events or a rejection to the report.
void ingest_line(Framework& fw, const TraceLine& line, ReplayReport& report) {
  try {
    PositionFix fix = trace_record_from_json(line.record);
    IngestResult r = fw.ingest_fix(fix);
    ++report.accepted;
    if (!r.fused.user.empty()) report.events.push_back(fused_event(r.fused));
    for (const auto& e : r.events) report.events.push_back(trigger_event(e));
  } catch (const Error& e) {
    ++report.rejected;
    report.rejections.push_back({line.line, e.code(), e.detail()});
    report.events.push_back(
        {{"kind", "rejected"}, {"line", line.line}, {"code", to_string(e.code())}, {"detail", e.detail()}});
  }
}

std::vector<TraceLine> sorted_by_time(std::vector<TraceLine> trace) {
  std::stable_sort(trace.begin(), trace.end(),
                   [](const TraceLine& a, const TraceLine& b) { return record_time(a.record) < record_time(b.record); });
  return trace;
}

}  // namespace

FrameworkConfig ServiceConfig::framework_config() const {
  FrameworkConfig c;
  c.fusion.stale_ms = stale_ms;
  c.fusion.drift_mps = drift_mps;
  c.recommender.alpha = alpha;
  c.blear_eyed_threshold_m = blear_eyed_threshold_m;
  return c;
}

ServiceConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadConfig, "config must be a JSON object");
  ServiceConfig c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.model_path = j.value("model", std::string{});
    c.catalogue_path = j.value("catalogue", std::string{});
    c.snapshot_path = j.value("snapshot", std::string{});
    c.stale_ms = j.value("t_stale_ms", c.stale_ms);
    c.drift_mps = j.value("v_drift_mps", c.drift_mps);
    c.alpha = j.value("alpha", c.alpha);
    c.blear_eyed_threshold_m = j.value("blear_eyed_threshold_m", c.blear_eyed_threshold_m);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, e.what());
  }
  if (c.port <= 0 || c.port > 65535) throw Error(ErrorCode::BadConfig, "port out of range");
  if (c.stale_ms <= 0 || !(c.drift_mps > 0.0) || !(c.blear_eyed_threshold_m > 0.0))
    throw Error(ErrorCode::BadConfig, "numeric parameters must be positive");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw Error(ErrorCode::BadConfig, "alpha must be in (0, 1]");
  return c;
}

ServiceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadConfig, "cannot read config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, e.what());
  }
  ServiceConfig c = config_from_json(j);
  fs::path base = fs::path(path).parent_path();
  c.model_path = resolve_relative(c.model_path, base);
  c.catalogue_path = resolve_relative(c.catalogue_path, base);
  c.snapshot_path = resolve_relative(c.snapshot_path, base);
  return c;
}

std::string resolve_config_path(const std::string& fallback) {
  if (const char* env = std::getenv("CTXFAB_CONFIG"); env && *env) return env;
  return fallback;
}

std::unique_ptr<Framework> make_framework(const ServiceConfig& config) {
  auto fw = std::make_unique<Framework>(config.framework_config());
  if (!config.model_path.empty()) fw->set_model(load_model(config.model_path));
  if (!config.catalogue_path.empty()) fw->set_catalogue(load_catalogue(config.catalogue_path));
  if (!config.snapshot_path.empty() && fs::exists(config.snapshot_path))
    fw->restore(snapshot_load(config.snapshot_path));
  return fw;
}

nlohmann::json trace_record_to_json(const PositionFix& fix) {
  nlohmann::json j{{"user", fix.user.str()},
                   {"device", fix.device.str()},
                   {"tech", to_string(fix.technology)},
                   {"sys", fix.coords.system.label()},
                   {"x", fix.coords.x},
                   {"y", fix.coords.y},
                   {"px", fix.coords.precision_x},
                   {"py", fix.coords.precision_y},
                   {"p", fix.coords.probability}};
  if (fix.timestamp) j["ts"] = *fix.timestamp;
  if (fix.coords.z) j["z"] = *fix.coords.z;
  return j;
}

PositionFix trace_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "trace record must be an object");
  PositionFix fix;
  if (j.contains("ts") && !j.at("ts").is_null()) {
    if (!j.at("ts").is_number_integer()) throw Error(ErrorCode::BadRequest, "field 'ts' must be an integer");
    fix.timestamp = j.at("ts").get<Timestamp>();
  }
  fix.user = UserId(j.contains("user") ? string_field(j, "user") : std::string{});
  fix.device = DeviceId(string_field(j, "device"));
  auto tech = technology_from_string(string_field(j, "tech"));
  if (!tech) throw Error(ErrorCode::BadRequest, "unknown technology '" + j.at("tech").get<std::string>() + "'");
  fix.technology = *tech;
  fix.coords.system = CoordinateSystem::from_label(string_field(j, "sys"));
  fix.coords.x = number_field(j, "x");
  fix.coords.y = number_field(j, "y");
  fix.coords.precision_x = number_field(j, "px");
  fix.coords.precision_y = number_field(j, "py");
  fix.coords.probability = number_field(j, "p");
  if (j.contains("z")) fix.coords.z = j.at("z").is_number() ? j.at("z").get<double>() : 0.0;
  return fix;
}

std::vector<TraceLine> parse_trace(std::istream& in) {
  std::vector<TraceLine> out;
  std::string text;
  for (std::size_t n = 1; std::getline(in, text); ++n) {
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back({n, nlohmann::json::parse(text)});
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TraceLine> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read trace '" + path + "'");
  return parse_trace(in);
}

nlohmann::json report_to_json(const ReplayReport& r) {
  auto rejections = nlohmann::json::array();
  for (const auto& x : r.rejections)
    rejections.push_back({{"line", x.line}, {"code", to_string(x.code)}, {"detail", x.detail}});
  return {{"accepted", r.accepted}, {"rejected", r.rejected}, {"rejections", rejections}};
}

std::string event_log_text(const std::vector<nlohmann::json>& events) {
  std::string out;
  for (const auto& e : events) out += e.dump() + "\n";
  return out;
}

ReplayReport replay(Framework& fw, const std::vector<TraceLine>& trace, double speed_factor) {
  if (speed_factor < 0.0) throw Error(ErrorCode::BadRequest, "speed factor must be >= 0");
  ReplayReport report;
  std::optional<Timestamp> previous;
  for (const auto& line : sorted_by_time(trace)) {
    Timestamp t = record_time(line.record);
    if (speed_factor > 0.0 && previous && t > *previous) {
      auto wait = std::chrono::duration<double, std::milli>(static_cast<double>(t - *previous) / speed_factor);
      std::this_thread::sleep_for(wait);
    }
    if (t != std::numeric_limits<Timestamp>::min()) previous = t;
    ingest_line(fw, line, report);
  }
  return report;
}

ReplayReport replay_file(Framework& fw, const std::string& path, double speed_factor) {
  return replay(fw, read_trace(path), speed_factor);
}

Target target_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Target::id(FeatureId(j.get<std::string>()));
  if (j.is_object()) return Target::point(point_from_json(j));
  throw Error(ErrorCode::BadRequest, "target must be an id or {x, y}");
}

nlohmann::json run_query(const Framework& fw, const std::string& kind, const nlohmann::json& args, Timestamp now) {
  StateManager sm(fw);
  if (kind == "visibility") {
    return visibility_to_json(
        sm.answer_visibility(UserId(string_field(args, "userA")), UserId(string_field(args, "userB")), now));
  }
  if (kind == "route") {
    return route_to_json(sm.answer_route(UserId(string_field(args, "user")), target_from_json(field(args, "goal")), now));
  }
  if (kind == "position") return position_to_json(sm.answer_position(UserId(string_field(args, "user")), now));
  if (kind == "distance") {
    double d = sm.answer_distance(UserId(string_field(args, "user")), target_from_json(field(args, "target")), now);
    return {{"distance_m", d}};
  }
  if (kind == "containment") {
    FeatureId shape(string_field(args, "shape"));
    bool inside = args.contains("point") ? sm.answer_containment(shape, point_from_json(args.at("point")))
                                         : sm.answer_containment(shape, FeatureId(string_field(args, "inner")));
    return {{"contained", inside}};
  }
  if (kind == "recommend") {
    auto k = args.value("k", 3);
    if (k < 1) throw Error(ErrorCode::BadRequest, "k must be >= 1");
    auto list = sm.answer_recommendations(UserId(string_field(args, "user")), static_cast<std::size_t>(k));
    auto out = nlohmann::json::array();
    for (const auto& r : list) out.push_back({{"item", r.item.str()}, {"score", r.score}});
    return out;
  }
  if (kind == "presentation") {
    return presentation_to_json(
        sm.presentation_for(UserId(string_field(args, "user")), point_from_json(field(args, "content")), now));
  }
  throw Error(ErrorCode::BadRequest, "unknown query '" + kind + "'");
}

std::vector<nlohmann::json> run_scenario(const std::string& scenario_path) {
  std::ifstream in(scenario_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read scenario '" + scenario_path + "'");
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  fs::path base = fs::path(scenario_path).parent_path();
  auto path_of = [&](const char* key) { return resolve_relative(spec.value(key, std::string{}), base); };

  ServiceConfig config = spec.contains("config") ? config_from_json(spec.at("config")) : ServiceConfig{};
  config.model_path = path_of("model");
  config.catalogue_path = path_of("catalogue");
  config.snapshot_path = path_of("snapshot");
  auto fw = make_framework(config);
  for (const auto& u : spec.value("users", nlohmann::json::array())) fw->register_user(UserId(u.get<std::string>()));
  for (const auto& d : spec.value("devices", nlohmann::json::array())) fw->register_device(device_from_json(d));
  for (const auto& f : spec.value("facts", nlohmann::json::array())) fw->put_fact(fact_from_json(f));
  for (const auto& rule : spec.value("triggers", nlohmann::json::array())) fw->add_rule(rule_from_json(rule));

  auto trace = sorted_by_time(read_trace(path_of("trace")));
  auto queries = spec.value("queries", nlohmann::json::array());
  std::vector<nlohmann::json> ordered(queries.begin(), queries.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.at("at").template get<Timestamp>() < b.at("at").template get<Timestamp>(); });

  std::vector<nlohmann::json> log;
  auto flush = [&](ReplayReport& r) {
    for (auto& e : r.events) log.push_back(std::move(e));
    r = ReplayReport{};
  };
  std::size_t next = 0;
  ReplayReport pending;
  for (const auto& q : ordered) {
    Timestamp at = q.at("at").get<Timestamp>();
    while (next < trace.size() && record_time(trace[next].record) <= at) ingest_line(*fw, trace[next++], pending);
    flush(pending);
    nlohmann::json entry{{"kind", "query"}, {"at", at}, {"query", q.at("query")}};
    auto args = q.value("args", nlohmann::json::object());
    entry["args"] = args;
    try {
      entry["result"] = run_query(*fw, q.at("query").get<std::string>(), args, at);
    } catch (const Error& e) {
      entry["error"] = {{"code", to_string(e.code())}, {"detail", e.detail()}};
    }
    log.push_back(std::move(entry));
  }
  while (next < trace.size()) ingest_line(*fw, trace[next++], pending);
  flush(pending);
  return log;
}

}  // namespace ctxfab
