#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctxfab {

enum class ErrorCode {
  // schema / validation
  DuplicateTypeName,
  UnknownType,
  SchemaMismatch,
  MissingTimestamp,
  MissingUser,
  UnknownDevice,
  DeviceOwnerMismatch,
  BadCoordinates,
  // registries
  DuplicateDevice,
  DuplicateUser,
  UnknownOwner,
  UnknownUser,
  DuplicateRule,
  UnknownRule,
  // geometry
  PoleProximity,
  UnknownTarget,
  NotAreal,
  NoNearbyNode,
  NoAccessibleRoute,
  InvalidGeometry,
  // location
  NoRecentFix,
  BadRange,
  // persistence and service
  IoError,
  CorruptSnapshot,
  ParseError,
  BadRequest,
  BadConfig,
  ModelLoadError,
  BindError,
};

std::string_view to_string(ErrorCode code) noexcept;
std::optional<ErrorCode> error_code_from_string(std::string_view name) noexcept;

/// A rule violation found by one of the validators. `reason` names the rule.
struct ValidationError {
  ErrorCode code;
  std::string reason;
};

/// Empty means the input is valid.
using Verdict = std::optional<ValidationError>;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);
  explicit Error(const ValidationError& v) : Error(v.code, v.reason) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ctxfab
