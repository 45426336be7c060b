#pragma once

#include <atomic>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/framework.hpp"

namespace ctxfab {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_path;
  std::string catalogue_path;
  std::string snapshot_path;
  Timestamp stale_ms = 30'000;
  double drift_mps = 1.0;
  double alpha = 0.7;
  double blear_eyed_threshold_m = 1.0;

  FrameworkConfig framework_config() const;
};

/// Throws BadConfig.
ServiceConfig config_from_json(const nlohmann::json& j);
ServiceConfig load_config(const std::string& path);
/// CTXFAB_CONFIG, when set, wins over the given path.
std::string resolve_config_path(const std::string& fallback);

/// Loads model, catalogue and (when the file exists) snapshot.
/// Throws ModelLoadError, IoError or CorruptSnapshot.
std::unique_ptr<Framework> make_framework(const ServiceConfig& config);

/// Flat wire form of a position fix: ts, user, device, tech, sys, x, y, px, py, p.
nlohmann::json trace_record_to_json(const PositionFix& fix);
/// Throws BadRequest when a field is missing or of the wrong type. A missing
/// "ts" is kept absent for the validator.
PositionFix trace_record_from_json(const nlohmann::json& j);

struct TraceLine {
  std::size_t line = 0;
  nlohmann::json record;
};

/// JSON-Lines; blank lines are skipped. Throws ParseError("line N: ...").
std::vector<TraceLine> parse_trace(std::istream& in);
std::vector<TraceLine> read_trace(const std::string& path);

struct Rejection {
  std::size_t line = 0;
  ErrorCode code = ErrorCode::BadRequest;
  std::string detail;
};

struct ReplayReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<Rejection> rejections;
  /// In processing order: a "fused" entry per accepted record that produced a
  /// position, a "trigger" entry per firing and a "rejected" entry per rejection.
  std::vector<nlohmann::json> events;
};

nlohmann::json report_to_json(const ReplayReport& r);
std::string event_log_text(const std::vector<nlohmann::json>& events);

/// Feeds records in timestamp order (stable for ties). speed_factor 0 runs as
/// fast as possible; a positive factor sleeps the scaled event-time gaps.
/// Event time drives all semantics either way.
ReplayReport replay(Framework& fw, const std::vector<TraceLine>& trace, double speed_factor = 0.0);
ReplayReport replay_file(Framework& fw, const std::string& path, double speed_factor = 0.0);

/// Scripted run. The JSON file names a model, catalogue, optional snapshot and
/// trace (paths relative to the file), lists users, devices, facts and trigger
/// rules inline, and schedules queries [{at, query, args}]. A query at time T
/// runs after every trace record with ts <= T. Returns the event log. Throws
/// on setup errors.
std::vector<nlohmann::json> run_scenario(const std::string& scenario_path);

/// Target from the wire: a feature/shape id string or {"x", "y"}.
Target target_from_json(const nlohmann::json& j);

/// Runs one named query (visibility, route, position, distance, containment,
/// recommend, presentation) through the state manager. Shared by the HTTP
/// API, scenarios and the CLI. Throws Error.
nlohmann::json run_query(const Framework& fw, const std::string& kind, const nlohmann::json& args, Timestamp now);

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// HTTP status for an error category.
int http_status(ErrorCode code) noexcept;
nlohmann::json error_body(const Error& e);

/// Transport-independent request handling for every endpoint. The HTTP server
/// is a thin adapter over this.
class Api {
 public:
  using Clock = std::function<Timestamp()>;

  Api(std::shared_ptr<Framework> fw, ServiceConfig config, Clock clock = {});

  ApiResponse handle(const ApiRequest& request);
  std::shared_ptr<Framework> framework() const;

 private:
  ApiResponse dispatch(const ApiRequest& request, Framework& fw);
  Timestamp now(const ApiRequest& request, const nlohmann::json* body = nullptr) const;
  ApiResponse snapshot_action(const nlohmann::json& body);

  mutable std::mutex fw_mutex_;
  std::shared_ptr<Framework> fw_;
  ServiceConfig config_;
  Clock clock_;
};

Timestamp wall_clock_ms();

/// Blocking HTTP server. stop() may be called from another thread.
class Server {
 public:
  explicit Server(Api& api);
  ~Server();

  /// Binds and serves until stop(). Throws BindError.
  void run(const std::string& host, int port);
  /// Binds an ephemeral port and serves on a background thread; returns the port.
  int start_background(const std::string& host);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctxfab
