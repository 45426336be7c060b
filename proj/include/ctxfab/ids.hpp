#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

namespace ctxfab {

/// Opaque text identifier, distinct per tag type so that a user id can not be
/// passed where a device id is expected.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}
  explicit Id(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value_; }
  friend void to_json(nlohmann::json& j, const Id& id) { j = id.value_; }
  friend void from_json(const nlohmann::json& j, Id& id) { id = Id(j.get<std::string>()); }

 private:
  std::string value_;
};

using UserId = Id<struct UserIdTag>;
using DeviceId = Id<struct DeviceIdTag>;
using FeatureId = Id<struct FeatureIdTag>;
using ItemId = Id<struct ItemIdTag>;
using RuleId = Id<struct RuleIdTag>;
using NodeId = Id<struct NodeIdTag>;

/// Milliseconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

}  // namespace ctxfab

template <class Tag>
struct std::hash<ctxfab::Id<Tag>> {
  std::size_t operator()(const ctxfab::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
