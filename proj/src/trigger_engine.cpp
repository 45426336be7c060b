#include "ctxfab/trigger_engine.hpp"

#include <algorithm>
#include <cstdio>

#include <httplib.h>

namespace ctxfab {
namespace {

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Email: return "email";
    case Channel::Im: return "im";
    case Channel::Sms: return "sms";
  }
  return "email";
}

std::optional<Channel> channel_from_string(std::string_view s) {
  if (s == "email") return Channel::Email;
  if (s == "im") return Channel::Im;
  if (s == "sms") return Channel::Sms;
  return std::nullopt;
}

void replace_all(std::string& s, std::string_view key, const std::string& value) {
  for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size()))
    s.replace(pos, key.size(), value);
}

}  // namespace

double TriggerRule::hysteresis() const { return hysteresis_m.value_or(std::max(0.1 * threshold_m, 1.0)); }

std::string render_template(const std::string& tmpl, const UserId& user, double distance, const std::string& target,
                            Timestamp time) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", distance);
  std::string out = tmpl;
  replace_all(out, "{user}", user.str());
  replace_all(out, "{distance}", buf);
  replace_all(out, "{target}", target);
  replace_all(out, "{time}", std::to_string(time));
  return out;
}

nlohmann::json event_to_json(const FiredEvent& e) {
  return {{"rule_id", e.rule.str()},     {"user", e.user.str()},   {"timestamp", e.timestamp},
          {"distance_m", e.distance_m},  {"target", e.target},     {"action", e.action},
          {"message", e.message},        {"outcome", e.outcome}};
}

nlohmann::json rule_to_json(const TriggerRule& r) {
  nlohmann::json j{{"id", r.id.str()}, {"user", r.user.str()}, {"threshold_m", r.threshold_m},
                   {"hysteresis_m", r.hysteresis()}};
  if (const auto* p = std::get_if<Vec2>(&r.target.ref)) {
    j["target"] = {{"x", p->x}, {"y", p->y}};
  } else {
    j["target"] = std::get<FeatureId>(r.target.ref).str();
  }
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, LogAction>) {
          j["action"] = {{"type", "log"}, {"message", a.message}};
        } else if constexpr (std::is_same_v<T, WebhookAction>) {
          j["action"] = {{"type", "webhook"}, {"url", a.url}, {"payload", a.payload}};
        } else {
          j["action"] = {{"type", "message"},
                         {"channel", channel_name(a.channel)},
                         {"recipient", a.recipient},
                         {"message", a.message}};
        }
      },
      r.action);
  return j;
}

TriggerRule rule_from_json(const nlohmann::json& j) {
  try {
    TriggerRule r;
    r.id = RuleId(j.at("id").get<std::string>());
    r.user = UserId(j.at("user").get<std::string>());
    const auto& t = j.at("target");
    if (t.is_string()) {
      r.target = Target::id(FeatureId(t.get<std::string>()));
    } else {
      r.target = Target::point({t.at("x").get<double>(), t.at("y").get<double>()});
    }
    r.threshold_m = j.at("threshold_m").get<double>();
    if (j.contains("hysteresis_m")) r.hysteresis_m = j.at("hysteresis_m").get<double>();
    if (j.contains("action")) {
      const auto& a = j.at("action");
      auto type = a.at("type").get<std::string>();
      if (type == "log") {
        r.action = LogAction{a.value("message", std::string("{user} within {distance} m of {target}"))};
      } else if (type == "webhook") {
        r.action = WebhookAction{a.at("url").get<std::string>(), a.value("payload", std::string{})};
      } else if (type == "message") {
        auto channel = channel_from_string(a.at("channel").get<std::string>());
        if (!channel) throw Error(ErrorCode::BadRequest, "unknown message channel");
        r.action = MessageAction{*channel, a.at("recipient").get<std::string>(), a.value("message", std::string{})};
      } else {
        throw Error(ErrorCode::BadRequest, "unknown action type '" + type + "'");
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("trigger rule: ") + e.what());
  }
}

WebhookSender http_webhook_sender() {
  return [](const std::string& url, const nlohmann::json& body) {
    auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    try {
      httplib::Client client(base);
      client.set_connection_timeout(2, 0);
      client.set_read_timeout(2, 0);
      client.set_write_timeout(2, 0);
      auto res = client.Post(path, body.dump(), "application/json");
      return res && res->status >= 200 && res->status < 300;
    } catch (const std::exception&) {
      return false;
    }
  };
}

TriggerEngine::TriggerEngine(WebhookSender sender) : sender_(std::move(sender)) {}

void TriggerEngine::set_sender(WebhookSender sender) {
  std::lock_guard lock(mutex_);
  sender_ = std::move(sender);
}

void TriggerEngine::add_rule(TriggerRule rule, const SpatialModel& model) {
  if (rule.id.empty()) throw Error(ErrorCode::BadRequest, "rule id is empty");
  if (!(rule.threshold_m > 0.0)) throw Error(ErrorCode::BadRequest, "threshold must be > 0");
  if (rule.hysteresis_m && !(*rule.hysteresis_m >= 0.0)) throw Error(ErrorCode::BadRequest, "hysteresis must be >= 0");
  if (!rule.target.is_point()) {
    const auto& id = std::get<FeatureId>(rule.target.ref);
    if (!model.feature(id) && !model.complex_shape(id)) throw Error(ErrorCode::UnknownTarget, id.str());
  }
  std::lock_guard lock(mutex_);
  if (rules_.contains(rule.id)) throw Error(ErrorCode::DuplicateRule, rule.id.str());
  auto id = rule.id;
  rules_.emplace(std::move(id), Entry{std::move(rule)});
}

void TriggerEngine::remove_rule(const RuleId& id) {
  std::lock_guard lock(mutex_);
  if (rules_.erase(id) == 0) throw Error(ErrorCode::UnknownRule, id.str());
}

std::vector<TriggerRule> TriggerEngine::rules() const {
  std::lock_guard lock(mutex_);
  std::vector<TriggerRule> out;
  for (const auto& [_, e] : rules_) out.push_back(e.rule);
  return out;
}

std::optional<RuleState> TriggerEngine::state(const RuleId& id) const {
  std::lock_guard lock(mutex_);
  auto it = rules_.find(id);
  if (it == rules_.end()) return std::nullopt;
  return it->second.state;
}

FiredEvent TriggerEngine::fire(const Entry& entry, Timestamp t, double d) {
  const auto& rule = entry.rule;
  FiredEvent ev;
  ev.rule = rule.id;
  ev.user = rule.user;
  ev.timestamp = t;
  ev.distance_m = d;
  ev.target = rule.target.label();
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, LogAction>) {
          ev.action = "log";
          ev.message = render_template(a.message, rule.user, d, ev.target, t);
          ev.outcome = "logged";
        } else if constexpr (std::is_same_v<T, WebhookAction>) {
          ev.action = "webhook";
          ev.message = render_template(a.payload, rule.user, d, ev.target, t);
          nlohmann::json body{{"rule_id", rule.id.str()},
                              {"user", rule.user.str()},
                              {"distance_m", d},
                              {"target", ev.target},
                              {"timestamp", t}};
          if (!ev.message.empty()) body["message"] = ev.message;
          bool ok = sender_ && (sender_(a.url, body) || sender_(a.url, body));
          ev.outcome = ok ? "delivered" : "delivery_failed";
        } else {
          ev.action = std::string(channel_name(a.channel));
          ev.message = render_template(a.message, rule.user, d, ev.target, t);
          ev.outcome = "queued";
        }
      },
      rule.action);
  return ev;
}

std::vector<FiredEvent> TriggerEngine::evaluate(const UserId& user, const FusedPosition& fused,
                                                const SpatialModel& model) {
  std::lock_guard lock(mutex_);
  std::vector<FiredEvent> fired;
  for (auto& [id, entry] : rules_) {
    if (entry.disabled || entry.rule.user != user) continue;
    double d = 0.0;
    try {
      d = distance_to(fused.pos(), entry.rule.target, model);
    } catch (const Error& e) {
      entry.disabled = true;
      log_.push_back("rule '" + id.str() + "' disabled: target " + e.detail() + " no longer resolves");
      continue;
    }
    if (entry.state == RuleState::Armed && d < entry.rule.threshold_m) {
      fired.push_back(fire(entry, fused.timestamp, d));
      entry.state = RuleState::Fired;
    } else if (entry.state == RuleState::Fired && d > entry.rule.threshold_m + entry.rule.hysteresis()) {
      entry.state = RuleState::Armed;
    }
  }
  outbox_.insert(outbox_.end(), fired.begin(), fired.end());
  return fired;
}

std::vector<FiredEvent> TriggerEngine::outbox(Timestamp since) const {
  std::lock_guard lock(mutex_);
  std::vector<FiredEvent> out;
  std::copy_if(outbox_.begin(), outbox_.end(), std::back_inserter(out),
               [&](const FiredEvent& e) { return e.timestamp >= since; });
  std::stable_sort(out.begin(), out.end(),
                   [](const FiredEvent& a, const FiredEvent& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<std::string> TriggerEngine::log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

}  // namespace ctxfab
