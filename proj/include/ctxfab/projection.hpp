#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ctxfab/vec2.hpp"

namespace ctxfab {

inline constexpr double kEarthRadiusM = 6'371'000.0;
/// Latitudes at or beyond this magnitude are refused by the transforms.
inline constexpr double kPoleLimitDeg = 89.9;

/// Local metric frame anchored at a geographic origin. `rotation` is the
/// counter-clockwise angle of the frame's x axis from east, in [-pi, pi).
struct LocalFrame {
  std::string frame_id;
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double rotation = 0.0;
};

/// Wraps an angle into [-pi, pi).
double normalize_angle(double radians);

/// Validates the origin and normalizes the rotation. Throws InvalidGeometry.
LocalFrame make_frame(std::string frame_id, double origin_lon, double origin_lat, double rotation);

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

/// Equirectangular projection about the frame origin followed by rotation into
/// the frame axes. Throws PoleProximity for |lat| >= 89.9.
Vec2 to_local(LonLat p, const LocalFrame& frame);
/// Exact inverse of to_local.
LonLat to_global(Vec2 p, const LocalFrame& frame);

nlohmann::json frame_to_json(const LocalFrame& f);
LocalFrame frame_from_json(const nlohmann::json& j);

}  // namespace ctxfab
