#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/coordinates.hpp"
#include "ctxfab/error.hpp"
#include "ctxfab/ids.hpp"

namespace ctxfab {

enum class Technology { GPS, GSM, WLAN, RFID, OTHER };

std::string_view to_string(Technology t) noexcept;
std::optional<Technology> technology_from_string(std::string_view s) noexcept;

struct DeviceRecord {
  DeviceId device;
  UserId owner;
  Technology technology = Technology::OTHER;
  std::set<std::string> supported_contexts;
  std::string metadata;
};

nlohmann::json device_to_json(const DeviceRecord& d);
DeviceRecord device_from_json(const nlohmann::json& j);

/// One reading from one positioning device.
struct PositionFix {
  UserId user;
  DeviceId device;
  Technology technology = Technology::OTHER;
  std::optional<Timestamp> timestamp;
  Coordinates2D coords;
};

class UserRegistry {
 public:
  UserRegistry() = default;
  UserRegistry(const UserRegistry& other);
  UserRegistry& operator=(const UserRegistry& other);

  /// Throws DuplicateUser, or BadRequest for an empty id.
  void add(const UserId& user);
  /// Adds the user unless present.
  void ensure(const UserId& user);
  bool contains(const UserId& user) const;
  std::vector<UserId> all() const;

 private:
  mutable std::shared_mutex mutex_;
  std::set<UserId> users_;
};

class DeviceRegistry {
 public:
  DeviceRegistry() = default;
  DeviceRegistry(const DeviceRegistry& other);
  DeviceRegistry& operator=(const DeviceRegistry& other);

  /// Throws DuplicateDevice or BadRequest (empty id). Owner existence is
  /// checked by the caller, which owns the user registry.
  void add(DeviceRecord record);
  std::optional<DeviceRecord> lookup(const DeviceId& id) const;
  bool contains(const DeviceId& id) const;
  std::vector<DeviceRecord> all() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<DeviceId, DeviceRecord> devices_;
};

/// Answers whether a LOCAL frame id is known.
using FrameResolver = std::function<bool(const std::string& frame_id)>;

/// Fixed-parameter-set validation of an incoming fix: user, timestamp,
/// registered device owned by that user, and coordinates.
Verdict validate_fix(const PositionFix& fix, const DeviceRegistry& devices,
                     const FrameResolver& frames = {});

}  // namespace ctxfab
