#include "ctxfab/devices.hpp"

#include <array>
#include <mutex>

namespace ctxfab {
namespace {

constexpr std::array<std::pair<Technology, std::string_view>, 5> kTechNames{{
    {Technology::GPS, "GPS"},
    {Technology::GSM, "GSM"},
    {Technology::WLAN, "WLAN"},
    {Technology::RFID, "RFID"},
    {Technology::OTHER, "OTHER"},
}};

}  // namespace

std::string_view to_string(Technology t) noexcept {
  for (const auto& [k, n] : kTechNames)
    if (k == t) return n;
  return "OTHER";
}

std::optional<Technology> technology_from_string(std::string_view s) noexcept {
  for (const auto& [k, n] : kTechNames)
    if (n == s) return k;
  return std::nullopt;
}

nlohmann::json device_to_json(const DeviceRecord& d) {
  return {{"device", d.device.str()},
          {"owner", d.owner.str()},
          {"technology", to_string(d.technology)},
          {"contexts", d.supported_contexts},
          {"metadata", d.metadata}};
}

DeviceRecord device_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("device") || !j.contains("owner"))
    throw Error(ErrorCode::BadRequest, "device record needs 'device' and 'owner'");
  DeviceRecord d;
  try {
    d.device = DeviceId(j.at("device").get<std::string>());
    d.owner = UserId(j.at("owner").get<std::string>());
    auto tech = technology_from_string(j.value("technology", std::string("OTHER")));
    if (!tech) throw Error(ErrorCode::BadRequest, "unknown technology");
    d.technology = *tech;
    if (j.contains("contexts")) d.supported_contexts = j.at("contexts").get<std::set<std::string>>();
    d.metadata = j.value("metadata", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, e.what());
  }
  return d;
}

UserRegistry::UserRegistry(const UserRegistry& other) {
  std::shared_lock lock(other.mutex_);
  users_ = other.users_;
}

UserRegistry& UserRegistry::operator=(const UserRegistry& other) {
  if (this == &other) return *this;
  std::set<UserId> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.users_;
  }
  std::unique_lock lock(mutex_);
  users_ = std::move(copy);
  return *this;
}

void UserRegistry::add(const UserId& user) {
  if (user.empty()) throw Error(ErrorCode::BadRequest, "empty user id");
  std::unique_lock lock(mutex_);
  if (!users_.insert(user).second) throw Error(ErrorCode::DuplicateUser, user.str());
}

void UserRegistry::ensure(const UserId& user) {
  if (user.empty()) throw Error(ErrorCode::BadRequest, "empty user id");
  std::unique_lock lock(mutex_);
  users_.insert(user);
}

bool UserRegistry::contains(const UserId& user) const {
  std::shared_lock lock(mutex_);
  return users_.contains(user);
}

std::vector<UserId> UserRegistry::all() const {
  std::shared_lock lock(mutex_);
  return {users_.begin(), users_.end()};
}

DeviceRegistry::DeviceRegistry(const DeviceRegistry& other) {
  std::shared_lock lock(other.mutex_);
  devices_ = other.devices_;
}

DeviceRegistry& DeviceRegistry::operator=(const DeviceRegistry& other) {
  if (this == &other) return *this;
  std::map<DeviceId, DeviceRecord> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.devices_;
  }
  std::unique_lock lock(mutex_);
  devices_ = std::move(copy);
  return *this;
}

void DeviceRegistry::add(DeviceRecord record) {
  if (record.device.empty()) throw Error(ErrorCode::BadRequest, "empty device id");
  std::unique_lock lock(mutex_);
  if (devices_.contains(record.device)) throw Error(ErrorCode::DuplicateDevice, record.device.str());
  auto id = record.device;
  devices_.emplace(std::move(id), std::move(record));
}

std::optional<DeviceRecord> DeviceRegistry::lookup(const DeviceId& id) const {
  std::shared_lock lock(mutex_);
  auto it = devices_.find(id);
  if (it == devices_.end()) return std::nullopt;
  return it->second;
}

bool DeviceRegistry::contains(const DeviceId& id) const {
  std::shared_lock lock(mutex_);
  return devices_.contains(id);
}

std::vector<DeviceRecord> DeviceRegistry::all() const {
  std::shared_lock lock(mutex_);
  std::vector<DeviceRecord> out;
  out.reserve(devices_.size());
  for (const auto& [_, d] : devices_) out.push_back(d);
  return out;
}

Verdict validate_fix(const PositionFix& fix, const DeviceRegistry& devices, const FrameResolver& frames) {
  if (fix.user.empty()) return ValidationError{ErrorCode::MissingUser, "fix has no user"};
  if (!fix.timestamp) return ValidationError{ErrorCode::MissingTimestamp, "fix has no timestamp"};
  if (*fix.timestamp < 0) return ValidationError{ErrorCode::MissingTimestamp, "timestamp must be >= 0"};
  auto record = devices.lookup(fix.device);
  if (!record) return ValidationError{ErrorCode::UnknownDevice, "device '" + fix.device.str() + "' is not registered"};
  if (record->owner != fix.user)
    return ValidationError{ErrorCode::DeviceOwnerMismatch,
                           "device '" + fix.device.str() + "' belongs to '" + record->owner.str() + "'"};
  if (auto v = validate_coordinates(fix.coords)) return v;
  if (!fix.coords.system.is_global() && frames && !frames(fix.coords.system.frame_id()))
    return ValidationError{ErrorCode::BadCoordinates, "unresolved frame '" + fix.coords.system.frame_id() + "'"};
  return std::nullopt;
}

}  // namespace ctxfab
