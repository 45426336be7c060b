#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/error.hpp"
#include "ctxfab/ids.hpp"

namespace ctxfab {

enum class ValueKind { Number, Text, Enum, TagSet, WeightedTags, Coordinates };

std::string_view to_string(ValueKind kind) noexcept;
std::optional<ValueKind> value_kind_from_string(std::string_view s) noexcept;

/// Shape of the value a context type carries.
///  - Number: JSON number, `unit` documents it.
///  - Text: non-empty string.
///  - Enum: one string out of `allowed` (non-empty).
///  - TagSet: array of distinct strings; restricted to `allowed` when that is non-empty.
///  - WeightedTags: object tag -> weight in [0, 1], at least one tag.
///  - Coordinates: a Coordinates2D wire object.
struct ValueSchema {
  ValueKind kind = ValueKind::Text;
  std::string unit;
  std::set<std::string> allowed;
};

struct ContextTypeDescriptor {
  std::string name;
  ValueSchema schema;
};

/// One typed, timestamped value about one user. Timestamp and user may be
/// absent on input so that the validator can report them.
struct ContextFact {
  UserId user;
  std::string type;
  std::optional<Timestamp> timestamp;
  nlohmann::json value;
  /// Satisfaction rating in [1, 5] for history entries.
  std::optional<double> rating;
  /// Set when a device reported the fact.
  std::optional<DeviceId> source_device;
};

nlohmann::json fact_to_json(const ContextFact& f);
ContextFact fact_from_json(const nlohmann::json& j);
nlohmann::json descriptor_to_json(const ContextTypeDescriptor& d);
ContextTypeDescriptor descriptor_from_json(const nlohmann::json& j);

/// Extensible set of context types. Concurrent reads, serialized writes.
class ContextTypeRegistry {
 public:
  ContextTypeRegistry() = default;
  ContextTypeRegistry(const ContextTypeRegistry& other);
  ContextTypeRegistry& operator=(const ContextTypeRegistry& other);

  /// Throws DuplicateTypeName, or SchemaMismatch for an empty enum set.
  void register_type(ContextTypeDescriptor descriptor);
  /// Adds a value to the allowed set of an Enum or closed TagSet type.
  void extend_allowed(const std::string& name, const std::string& value);
  /// Drops a type; facts already stored keep referencing it.
  bool unregister_type(const std::string& name);

  std::optional<ContextTypeDescriptor> lookup(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<ContextTypeDescriptor> all() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, ContextTypeDescriptor> types_;
};

/// Built-in context types: disability, preference, detail, visit, activity,
/// role, time, location.
ContextTypeRegistry default_context_types();

namespace tags {
inline constexpr const char* kWheelchair = "wheelchair";
inline constexpr const char* kLowVision = "low_vision";
inline constexpr const char* kBlearEyed = "blear_eyed";
inline constexpr const char* kHearingImpaired = "hearing_impaired";
}  // namespace tags

namespace types {
inline constexpr const char* kDisability = "disability";
inline constexpr const char* kPreference = "preference";
inline constexpr const char* kDetail = "detail";
inline constexpr const char* kVisit = "visit";
}  // namespace types

/// Checks a value against a schema only.
Verdict validate_value(const nlohmann::json& value, const ValueSchema& schema);

/// Full fact check: user, timestamp, registered type, schema, rating range.
Verdict validate_fact(const ContextFact& fact, const ContextTypeRegistry& registry);

using DisabilityProfile = std::set<std::string>;
using PreferenceProfile = std::map<std::string, double>;

DisabilityProfile disability_profile(const ContextFact& fact);
PreferenceProfile preference_profile(const ContextFact& fact);

}  // namespace ctxfab
