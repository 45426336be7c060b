#include "ctxfab/context_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

namespace ctxfab {

void FactStore::append_locked(ContextFact fact) {
  auto& list = index_[{fact.user, fact.type}];
  Timestamp t = *fact.timestamp;
  auto pos = std::upper_bound(list.begin(), list.end(), t,
                              [&](Timestamp v, std::size_t i) { return v < *log_[i].timestamp; });
  list.insert(pos, log_.size());
  log_.push_back(std::move(fact));
}

void FactStore::put_fact(ContextFact fact) {
  if (auto v = validate_fact(fact, *registry_)) throw Error(*v);
  std::unique_lock lock(mutex_);
  append_locked(std::move(fact));
}

void FactStore::restore_fact(ContextFact fact) {
  if (fact.user.empty() || !fact.timestamp) throw Error(ErrorCode::CorruptSnapshot, "fact without user or timestamp");
  std::unique_lock lock(mutex_);
  append_locked(std::move(fact));
}

std::optional<ContextFact> FactStore::get_latest(const UserId& user, const std::string& type) const {
  if (!registry_->contains(type)) throw Error(ErrorCode::UnknownType, type);
  std::shared_lock lock(mutex_);
  auto it = index_.find({user, type});
  if (it == index_.end() || it->second.empty()) return std::nullopt;
  return log_[it->second.back()];
}

std::vector<ContextFact> FactStore::query_history(const UserId& user, const std::string& type, Timestamp t0,
                                                  Timestamp t1) const {
  if (t0 > t1) throw Error(ErrorCode::BadRange, "t0 > t1");
  if (!registry_->contains(type)) throw Error(ErrorCode::UnknownType, type);
  std::shared_lock lock(mutex_);
  std::vector<ContextFact> out;
  auto it = index_.find({user, type});
  if (it == index_.end()) return out;
  for (std::size_t i : it->second) {
    Timestamp t = *log_[i].timestamp;
    if (t > t1) break;
    if (t >= t0) out.push_back(log_[i]);
  }
  return out;
}

std::vector<ContextFact> FactStore::facts_of_type(const std::string& type) const {
  std::shared_lock lock(mutex_);
  std::vector<ContextFact> out;
  for (const auto& [key, list] : index_) {
    if (key.second != type) continue;
    for (std::size_t i : list) out.push_back(log_[i]);
  }
  return out;
}

std::vector<ContextFact> FactStore::all_facts() const {
  std::shared_lock lock(mutex_);
  std::vector<ContextFact> out;
  out.reserve(log_.size());
  for (const auto& [_, list] : index_)
    for (std::size_t i : list) out.push_back(log_[i]);
  return out;
}

std::size_t FactStore::size() const {
  std::shared_lock lock(mutex_);
  return log_.size();
}

nlohmann::json violation_to_json(const ConsistencyViolation& v) {
  return {{"fact", v.fact_index}, {"user", v.user.str()}, {"type", v.type}, {"rule", v.rule}, {"detail", v.detail}};
}

std::vector<ConsistencyViolation> check_consistency(const FactStore& store, const ContextTypeRegistry& registry,
                                                    const DeviceRegistry& devices,
                                                    const std::set<ItemId>& known_items) {
  std::vector<ConsistencyViolation> out;
  auto facts = store.all_facts();
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const auto& f = facts[i];
    auto flag = [&](std::string rule, std::string detail) {
      out.push_back({i, f.user, f.type, std::move(rule), std::move(detail)});
    };
    auto descriptor = registry.lookup(f.type);
    if (!descriptor) {
      flag("type_registered", "type '" + f.type + "' is not registered");
    } else if (auto v = validate_value(f.value, descriptor->schema)) {
      flag("schema_conforms", v->reason);
    } else if (f.rating && !(*f.rating >= 1.0 && *f.rating <= 5.0)) {
      flag("schema_conforms", "rating outside [1, 5]");
    }
    if (f.type == types::kVisit && f.value.is_string() && !known_items.contains(ItemId(f.value.get<std::string>())))
      flag("visit_item_known", "visit references unknown item '" + f.value.get<std::string>() + "'");
    if (f.source_device && !devices.contains(*f.source_device))
      flag("device_registered", "device '" + f.source_device->str() + "' is not registered");
  }
  return out;
}

nlohmann::json snapshot_to_json(const SnapshotState& state) {
  auto types = state.context_types;
  std::sort(types.begin(), types.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  auto users = state.users;
  std::sort(users.begin(), users.end());
  auto devices = state.devices;
  std::sort(devices.begin(), devices.end(), [](const auto& a, const auto& b) { return a.device < b.device; });
  auto facts = state.facts;
  std::stable_sort(facts.begin(), facts.end(), [](const ContextFact& a, const ContextFact& b) {
    return std::tie(a.user, a.type, *a.timestamp) < std::tie(b.user, b.type, *b.timestamp);
  });

  nlohmann::json j;
  j["schema_version"] = kSnapshotSchemaVersion;
  j["context_types"] = nlohmann::json::array();
  for (const auto& d : types) j["context_types"].push_back(descriptor_to_json(d));
  j["users"] = nlohmann::json::array();
  for (const auto& u : users) j["users"].push_back(u.str());
  j["devices"] = nlohmann::json::array();
  for (const auto& d : devices) j["devices"].push_back(device_to_json(d));
  j["facts"] = nlohmann::json::array();
  for (const auto& f : facts) j["facts"].push_back(fact_to_json(f));
  return j;
}

SnapshotState snapshot_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("schema_version")) throw Error(ErrorCode::CorruptSnapshot, "missing schema_version");
    if (j.at("schema_version") != kSnapshotSchemaVersion)
      throw Error(ErrorCode::CorruptSnapshot, "unsupported schema_version " + j.at("schema_version").dump());
    SnapshotState s;
    for (const auto& d : j.at("context_types")) s.context_types.push_back(descriptor_from_json(d));
    for (const auto& u : j.at("users")) s.users.emplace_back(u.get<std::string>());
    for (const auto& d : j.at("devices")) s.devices.push_back(device_from_json(d));
    for (const auto& f : j.at("facts")) {
      auto fact = fact_from_json(f);
      if (fact.user.empty() || !fact.timestamp) throw Error(ErrorCode::CorruptSnapshot, "fact without user or timestamp");
      s.facts.push_back(std::move(fact));
    }
    return s;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptSnapshot) throw;
    throw Error(ErrorCode::CorruptSnapshot, e.detail());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptSnapshot, e.what());
  }
}

std::string snapshot_dump(const SnapshotState& state) { return snapshot_to_json(state).dump(2) + "\n"; }

void snapshot_save(const std::string& path, const SnapshotState& state) {
  std::string text = snapshot_dump(state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

SnapshotState snapshot_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptSnapshot, std::string("'") + path + "': " + e.what());
  }
  return snapshot_from_json(j);
}

}  // namespace ctxfab
