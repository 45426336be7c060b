#pragma once

#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/context_types.hpp"
#include "ctxfab/devices.hpp"

namespace ctxfab {

/// Append-only log of validated facts indexed by (user, type), each index list
/// kept in (timestamp, insertion) order.
class FactStore {
 public:
  explicit FactStore(const ContextTypeRegistry& registry) : registry_(&registry) {}
  FactStore(const FactStore&) = delete;
  FactStore& operator=(const FactStore&) = delete;

  /// Throws Error with the validation code; the store is unchanged on failure.
  void put_fact(ContextFact fact);

  /// Appends a fact from a snapshot without schema checks; only user and
  /// timestamp are required. Throws CorruptSnapshot.
  void restore_fact(ContextFact fact);

  /// Throws UnknownType.
  std::optional<ContextFact> get_latest(const UserId& user, const std::string& type) const;
  /// Inclusive range. Throws BadRange or UnknownType.
  std::vector<ContextFact> query_history(const UserId& user, const std::string& type,
                                         Timestamp t0, Timestamp t1) const;

  /// Every fact of a type across users, in (user, timestamp, insertion) order.
  std::vector<ContextFact> facts_of_type(const std::string& type) const;
  /// Every fact in (user, type, timestamp, insertion) order.
  std::vector<ContextFact> all_facts() const;
  std::size_t size() const;

  const ContextTypeRegistry& registry() const noexcept { return *registry_; }

 private:
  using Key = std::pair<UserId, std::string>;

  void append_locked(ContextFact fact);

  const ContextTypeRegistry* registry_;
  mutable std::shared_mutex mutex_;
  std::vector<ContextFact> log_;
  std::map<Key, std::vector<std::size_t>> index_;
};

struct ConsistencyViolation {
  std::size_t fact_index = 0;  // position in all_facts() order
  UserId user;
  std::string type;
  std::string rule;
  std::string detail;
};

nlohmann::json violation_to_json(const ConsistencyViolation& v);

/// Rules: type_registered, schema_conforms, visit_item_known,
/// device_registered. Empty result means consistent.
std::vector<ConsistencyViolation> check_consistency(const FactStore& store,
                                                    const ContextTypeRegistry& registry,
                                                    const DeviceRegistry& devices,
                                                    const std::set<ItemId>& known_items);

inline constexpr int kSnapshotSchemaVersion = 1;

/// Everything a snapshot carries.
struct SnapshotState {
  std::vector<ContextTypeDescriptor> context_types;
  std::vector<UserId> users;
  std::vector<DeviceRecord> devices;
  std::vector<ContextFact> facts;
};

/// Canonical document: sorted keys, facts ordered by (user, type, timestamp).
nlohmann::json snapshot_to_json(const SnapshotState& state);
/// Throws CorruptSnapshot.
SnapshotState snapshot_from_json(const nlohmann::json& j);
std::string snapshot_dump(const SnapshotState& state);

/// Throws IoError.
void snapshot_save(const std::string& path, const SnapshotState& state);
/// Throws IoError or CorruptSnapshot.
SnapshotState snapshot_load(const std::string& path);

}  // namespace ctxfab
