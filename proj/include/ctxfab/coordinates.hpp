#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ctxfab/error.hpp"

namespace ctxfab {

/// GLOBAL (lon/lat degrees) or LOCAL(frame_id) in meters.
class CoordinateSystem {
 public:
  static CoordinateSystem global() { return CoordinateSystem{}; }
  static CoordinateSystem local(std::string frame_id) {
    CoordinateSystem s;
    s.frame_ = std::move(frame_id);
    return s;
  }

  bool is_global() const noexcept { return !frame_.has_value(); }
  /// Frame id of a LOCAL system; empty string for GLOBAL.
  const std::string& frame_id() const noexcept {
    static const std::string kNone;
    return frame_ ? *frame_ : kNone;
  }
  /// "global" or the frame id, as used in wire formats.
  std::string label() const { return frame_ ? *frame_ : std::string("global"); }
  static CoordinateSystem from_label(const std::string& label) {
    return label == "global" ? global() : local(label);
  }

  friend bool operator==(const CoordinateSystem&, const CoordinateSystem&) = default;

 private:
  std::optional<std::string> frame_;
};

/// A two-dimensional position reading. `z` exists only so that inputs carrying
/// a third component can be represented and rejected.
struct Coordinates2D {
  CoordinateSystem system = CoordinateSystem::global();
  double x = 0.0;
  double y = 0.0;
  std::optional<double> z;
  double precision_x = 1.0;  // 1-sigma, meters
  double precision_y = 1.0;
  double probability = 1.0;  // (0, 1]
};

/// Checks precision, probability, the absence of Z and the GLOBAL value range.
/// Frame resolution is the caller's concern.
Verdict validate_coordinates(const Coordinates2D& c);

/// Wire object {"sys", "x", "y", "px", "py", "p"}; "z" is kept when present.
nlohmann::json coordinates_to_json(const Coordinates2D& c);
/// Throws Error(SchemaMismatch) on structural problems; value ranges are not
/// checked here.
Coordinates2D coordinates_from_json(const nlohmann::json& j);

}  // namespace ctxfab
