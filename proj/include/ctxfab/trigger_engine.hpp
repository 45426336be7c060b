#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/location_middleware.hpp"
#include "ctxfab/spatial_ops.hpp"

namespace ctxfab {

struct LogAction {
  std::string message;
};
struct WebhookAction {
  std::string url;
  std::string payload;
};
enum class Channel { Email, Im, Sms };
struct MessageAction {
  Channel channel = Channel::Email;
  std::string recipient;
  std::string message;
};

/// Templates may reference {user}, {distance}, {target} and {time}.
using ActionSpec = std::variant<LogAction, WebhookAction, MessageAction>;

enum class RuleState { Armed, Fired };

struct TriggerRule {
  RuleId id;
  UserId user;
  Target target;
  double threshold_m = 1.0;
  /// Defaults to max(0.1 * threshold, 1 m).
  std::optional<double> hysteresis_m;
  ActionSpec action = LogAction{"{user} within {distance} m of {target}"};

  double hysteresis() const;
};

struct FiredEvent {
  RuleId rule;
  UserId user;
  Timestamp timestamp = 0;
  double distance_m = 0.0;
  std::string target;
  std::string action;   // log | webhook | email | im | sms
  std::string message;  // rendered template
  std::string outcome;  // logged | queued | delivered | delivery_failed
};

nlohmann::json event_to_json(const FiredEvent& e);
nlohmann::json rule_to_json(const TriggerRule& r);
/// Throws BadRequest on malformed input.
TriggerRule rule_from_json(const nlohmann::json& j);

std::string render_template(const std::string& tmpl, const UserId& user, double distance,
                            const std::string& target, Timestamp time);

/// Delivers one webhook POST. Returns true on a 2xx answer.
using WebhookSender = std::function<bool(const std::string& url, const nlohmann::json& body)>;

/// HTTP POST with a 2 s timeout.
WebhookSender http_webhook_sender();

/// Proximity rules with a hysteresis re-arm band, fired once per crossing.
class TriggerEngine {
 public:
  explicit TriggerEngine(WebhookSender sender = http_webhook_sender());

  void set_sender(WebhookSender sender);

  /// Throws DuplicateRule, UnknownTarget or BadRequest (threshold <= 0,
  /// negative hysteresis).
  void add_rule(TriggerRule rule, const SpatialModel& model);
  /// Throws UnknownRule.
  void remove_rule(const RuleId& id);
  std::vector<TriggerRule> rules() const;
  std::optional<RuleState> state(const RuleId& id) const;

  /// Runs every rule of the fused user; events come out ordered by rule id.
  std::vector<FiredEvent> evaluate(const UserId& user, const FusedPosition& fused,
                                   const SpatialModel& model);

  /// Events with timestamp >= since, ascending.
  std::vector<FiredEvent> outbox(Timestamp since) const;
  /// Diagnostics such as auto-disabled rules.
  std::vector<std::string> log() const;

 private:
  struct Entry {
    TriggerRule rule;
    RuleState state = RuleState::Armed;
    bool disabled = false;
  };

  FiredEvent fire(const Entry& entry, Timestamp t, double d);

  mutable std::mutex mutex_;
  WebhookSender sender_;
  std::map<RuleId, Entry> rules_;
  std::vector<FiredEvent> outbox_;
  std::vector<std::string> log_;
};

}  // namespace ctxfab
