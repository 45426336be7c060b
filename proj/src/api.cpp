#include "ctxfab/service.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace ctxfab {
namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '/');)
    if (!part.empty()) parts.push_back(part);
  return parts;
}

Timestamp parse_integer(const std::string& name, const std::string& text) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, "query parameter '" + name + "' must be an integer");
  }
}

std::optional<Timestamp> query_int(const ApiRequest& r, const std::string& name) {
  auto it = r.query.find(name);
  if (it == r.query.end()) return std::nullopt;
  return parse_integer(name, it->second);
}

Timestamp required_int(const ApiRequest& r, const std::string& name) {
  auto v = query_int(r, name);
  if (!v) throw Error(ErrorCode::BadRequest, "missing query parameter '" + name + "'");
  return *v;
}

nlohmann::json parse_body(const ApiRequest& r) {
  if (r.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(r.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("malformed JSON body: ") + e.what());
  }
}

ApiResponse ok(nlohmann::json body, int status = 200) { return {status, std::move(body)}; }

nlohmann::json events_json(const std::vector<FiredEvent>& events) {
  auto out = nlohmann::json::array();
  for (const auto& e : events) out.push_back(event_to_json(e));
  return out;
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::BadRequest:
    case ErrorCode::BadRange:
    case ErrorCode::BadConfig:
      return 400;
    case ErrorCode::UnknownType:
    case ErrorCode::UnknownDevice:
    case ErrorCode::UnknownOwner:
    case ErrorCode::UnknownUser:
    case ErrorCode::UnknownRule:
    case ErrorCode::UnknownTarget:
      return 404;
    case ErrorCode::DuplicateTypeName:
    case ErrorCode::DuplicateDevice:
    case ErrorCode::DuplicateUser:
    case ErrorCode::DuplicateRule:
      return 409;
    case ErrorCode::IoError:
    case ErrorCode::CorruptSnapshot:
    case ErrorCode::ModelLoadError:
    case ErrorCode::BindError:
      return 500;
    default:
      return 422;
  }
}

nlohmann::json error_body(const Error& e) { return {{"error", to_string(e.code())}, {"detail", e.detail()}}; }

Timestamp wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Api::Api(std::shared_ptr<Framework> fw, ServiceConfig config, Clock clock)
    : fw_(std::move(fw)), config_(std::move(config)), clock_(clock ? std::move(clock) : Clock(wall_clock_ms)) {}

std::shared_ptr<Framework> Api::framework() const {
  std::lock_guard lock(fw_mutex_);
  return fw_;
}

Timestamp Api::now(const ApiRequest& request, const nlohmann::json* body) const {
  if (auto t = query_int(request, "now")) return *t;
  if (body && body->is_object() && body->contains("now")) {
    const auto& v = body->at("now");
    if (!v.is_number_integer()) throw Error(ErrorCode::BadRequest, "field 'now' must be an integer");
    return v.get<Timestamp>();
  }
  return clock_();
}

ApiResponse Api::handle(const ApiRequest& request) {
  try {
    auto fw = framework();
    return dispatch(request, *fw);
  } catch (const Error& e) {
    return {http_status(e.code()), error_body(e)};
  } catch (const nlohmann::json::exception& e) {
    return {400, error_body(Error(ErrorCode::BadRequest, e.what()))};
  }
}

ApiResponse Api::snapshot_action(const nlohmann::json& body) {
  std::string action = body.value("action", std::string{});
  std::string path = body.value("path", config_.snapshot_path);
  if (path.empty()) throw Error(ErrorCode::BadRequest, "no snapshot path given or configured");
  if (action == "save") {
    snapshot_save(path, framework()->snapshot());
    return ok({{"saved", path}});
  }
  if (action == "load") {
    SnapshotState state = snapshot_load(path);
    auto current = framework();
    auto fresh = std::make_shared<Framework>(current->config());
    fresh->set_model(*current->model());
    fresh->set_catalogue(*current->catalogue());
    fresh->restore(state);
    std::lock_guard lock(fw_mutex_);
    fw_ = std::move(fresh);
    return ok({{"loaded", path}, {"facts", state.facts.size()}});
  }
  throw Error(ErrorCode::BadRequest, "snapshot action must be 'save' or 'load'");
}

ApiResponse Api::dispatch(const ApiRequest& request, Framework& fw) {
  const auto parts = split_path(request.path);
  const std::string& m = request.method;
  auto is = [&](std::initializer_list<const char*> pattern) {
    if (pattern.size() != parts.size()) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
      if (std::string_view(p) != "*" && parts[i] != p) return false;
      ++i;
    }
    return true;
  };

  if (m == "GET" && is({"health"}))
    return ok({{"status", "ok"}, {"features", fw.model()->features().size()}});

  if (m == "POST" && is({"users"})) {
    auto body = parse_body(request);
    std::string id = body.value("id", std::string{});
    if (id.empty()) throw Error(ErrorCode::BadRequest, "missing field 'id'");
    fw.register_user(UserId(id));
    return ok({{"user", id}}, 201);
  }
  if (m == "POST" && is({"devices"})) {
    auto record = device_from_json(parse_body(request));
    fw.register_device(record);
    return ok(device_to_json(record), 201);
  }
  if (m == "POST" && is({"context-types"})) {
    auto d = descriptor_from_json(parse_body(request));
    fw.types().register_type(d);
    return ok(descriptor_to_json(d), 201);
  }
  if (m == "POST" && is({"fixes"})) {
    auto fix = trace_record_from_json(parse_body(request));
    auto r = fw.ingest_fix(fix);
    nlohmann::json body{{"accepted", true}, {"events", events_json(r.events)}};
    body["fused"] = r.fused.user.empty() ? nlohmann::json(nullptr) : fused_to_json(r.fused);
    return ok(body, 201);
  }
  if (m == "POST" && is({"contexts"})) {
    auto fact = fact_from_json(parse_body(request));
    fw.put_fact(fact);
    return ok(fact_to_json(fact), 201);
  }
  if (m == "GET" && is({"contexts", "*", "*"})) {
    UserId user(parts[1]);
    auto t0 = query_int(request, "t0");
    auto t1 = query_int(request, "t1");
    if (t0 || t1) {
      auto out = nlohmann::json::array();
      for (const auto& f : fw.facts().query_history(user, parts[2], t0.value_or(std::numeric_limits<Timestamp>::min()),
                                                    t1.value_or(std::numeric_limits<Timestamp>::max())))
        out.push_back(fact_to_json(f));
      return ok({{"facts", out}});
    }
    auto latest = fw.facts().get_latest(user, parts[2]);
    return ok({{"fact", latest ? fact_to_json(*latest) : nlohmann::json(nullptr)}});
  }
  if (m == "GET" && is({"users", "*", "position"}))
    return ok(run_query(fw, "position", {{"user", parts[1]}}, now(request)));
  if (m == "GET" && is({"users", "*", "track"})) {
    auto samples = fw.location().track(UserId(parts[1]), required_int(request, "t0"), required_int(request, "t1"),
                                       query_int(request, "step").value_or(1000));
    auto out = nlohmann::json::array();
    for (const auto& s : samples)
      out.push_back({{"t", s.t}, {"position", s.position ? fused_to_json(*s.position) : nlohmann::json(nullptr)}});
    return ok(out);
  }
  if (m == "POST" && is({"queries", "*"})) {
    auto body = parse_body(request);
    return ok(run_query(fw, parts[1], body, now(request, &body)));
  }
  if (m == "GET" && is({"recommendations", "*"})) {
    nlohmann::json args{{"user", parts[1]}, {"k", query_int(request, "k").value_or(3)}};
    return ok(run_query(fw, "recommend", args, now(request)));
  }
  if (m == "POST" && is({"triggers"})) {
    auto rule = rule_from_json(parse_body(request));
    fw.add_rule(rule);
    return ok(rule_to_json(rule), 201);
  }
  if (m == "DELETE" && is({"triggers", "*"})) {
    fw.triggers().remove_rule(RuleId(parts[1]));
    return ok({{"removed", parts[1]}});
  }
  if (m == "GET" && is({"triggers"})) {
    auto out = nlohmann::json::array();
    for (const auto& r : fw.triggers().rules()) out.push_back(rule_to_json(r));
    return ok(out);
  }
  if (m == "GET" && is({"outbox"}))
    return ok(events_json(fw.triggers().outbox(query_int(request, "since").value_or(0))));
  if (m == "GET" && is({"consistency"})) {
    auto out = nlohmann::json::array();
    for (const auto& v : fw.check_consistency()) out.push_back(violation_to_json(v));
    return ok(out);
  }
  if (m == "POST" && is({"snapshot"})) return snapshot_action(parse_body(request));

  return {404, {{"error", "NotFound"}, {"detail", m + " " + request.path}}};
}

struct Server::Impl {
  Api& api;
  httplib::Server http;
  std::thread worker;
  explicit Impl(Api& a) : api(a) {}
};

Server::Server(Api& api) : impl_(std::make_unique<Impl>(api)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    ApiResponse out = impl_->api.handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  impl_->http.Get(".*", handler);
  impl_->http.Post(".*", handler);
  impl_->http.Delete(".*", handler);
}

Server::~Server() { stop(); }

void Server::run(const std::string& host, int port) {
  if (!impl_->http.bind_to_port(host, port))
    throw Error(ErrorCode::BindError, host + ":" + std::to_string(port));
  impl_->http.listen_after_bind();
}

int Server::start_background(const std::string& host) {
  int port = impl_->http.bind_to_any_port(host);
  if (port <= 0) throw Error(ErrorCode::BindError, host);
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::stop() {
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace ctxfab
