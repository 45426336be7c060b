#include "ctxfab/error.hpp"

#include <array>
#include <utility>

namespace ctxfab {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 29> kNames{{
    {ErrorCode::DuplicateTypeName, "DuplicateTypeName"},
    {ErrorCode::UnknownType, "UnknownType"},
    {ErrorCode::SchemaMismatch, "SchemaMismatch"},
    {ErrorCode::MissingTimestamp, "MissingTimestamp"},
    {ErrorCode::MissingUser, "MissingUser"},
    {ErrorCode::UnknownDevice, "UnknownDevice"},
    {ErrorCode::DeviceOwnerMismatch, "DeviceOwnerMismatch"},
    {ErrorCode::BadCoordinates, "BadCoordinates"},
    {ErrorCode::DuplicateDevice, "DuplicateDevice"},
    {ErrorCode::DuplicateUser, "DuplicateUser"},
    {ErrorCode::UnknownOwner, "UnknownOwner"},
    {ErrorCode::UnknownUser, "UnknownUser"},
    {ErrorCode::DuplicateRule, "DuplicateRule"},
    {ErrorCode::UnknownRule, "UnknownRule"},
    {ErrorCode::PoleProximity, "PoleProximity"},
    {ErrorCode::UnknownTarget, "UnknownTarget"},
    {ErrorCode::NotAreal, "NotAreal"},
    {ErrorCode::NoNearbyNode, "NoNearbyNode"},
    {ErrorCode::NoAccessibleRoute, "NoAccessibleRoute"},
    {ErrorCode::InvalidGeometry, "InvalidGeometry"},
    {ErrorCode::NoRecentFix, "NoRecentFix"},
    {ErrorCode::BadRange, "BadRange"},
    {ErrorCode::IoError, "IoError"},
    {ErrorCode::CorruptSnapshot, "CorruptSnapshot"},
    {ErrorCode::ParseError, "ParseError"},
    {ErrorCode::BadRequest, "BadRequest"},
    {ErrorCode::BadConfig, "BadConfig"},
    {ErrorCode::ModelLoadError, "ModelLoadError"},
    {ErrorCode::BindError, "BindError"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) noexcept {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace ctxfab
