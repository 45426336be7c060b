#include "ctxfab/projection.hpp"

#include <cmath>
#include <numbers>

#include "ctxfab/error.hpp"

namespace ctxfab {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_latitude(double lat) {
  if (!(std::abs(lat) < kPoleLimitDeg))
    throw Error(ErrorCode::PoleProximity, "latitude " + std::to_string(lat) + " too close to a pole");
}

}  // namespace

double normalize_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  double out = a - std::numbers::pi;
  return out >= std::numbers::pi ? -std::numbers::pi : out;
}

LocalFrame make_frame(std::string frame_id, double origin_lon, double origin_lat, double rotation) {
  if (frame_id.empty()) throw Error(ErrorCode::InvalidGeometry, "frame id is empty");
  if (!(std::abs(origin_lat) < 90.0)) throw Error(ErrorCode::InvalidGeometry, "frame origin latitude out of range");
  if (!std::isfinite(origin_lon) || !std::isfinite(rotation))
    throw Error(ErrorCode::InvalidGeometry, "frame parameters must be finite");
  return LocalFrame{std::move(frame_id), origin_lon, origin_lat, normalize_angle(rotation)};
}

Vec2 to_local(LonLat p, const LocalFrame& frame) {
  check_latitude(p.lat);
  check_latitude(frame.origin_lat);
  double east = (p.lon - frame.origin_lon) * kDegToRad * kEarthRadiusM * std::cos(frame.origin_lat * kDegToRad);
  double north = (p.lat - frame.origin_lat) * kDegToRad * kEarthRadiusM;
  double c = std::cos(frame.rotation);
  double s = std::sin(frame.rotation);
  return {east * c + north * s, -east * s + north * c};
}

LonLat to_global(Vec2 p, const LocalFrame& frame) {
  check_latitude(frame.origin_lat);
  double c = std::cos(frame.rotation);
  double s = std::sin(frame.rotation);
  double east = p.x * c - p.y * s;
  double north = p.x * s + p.y * c;
  LonLat out;
  out.lat = frame.origin_lat + north / (kDegToRad * kEarthRadiusM);
  out.lon = frame.origin_lon + east / (kDegToRad * kEarthRadiusM * std::cos(frame.origin_lat * kDegToRad));
  check_latitude(out.lat);
  return out;
}

nlohmann::json frame_to_json(const LocalFrame& f) {
  return {{"id", f.frame_id}, {"origin_lon", f.origin_lon}, {"origin_lat", f.origin_lat}, {"rotation", f.rotation}};
}

LocalFrame frame_from_json(const nlohmann::json& j) {
  try {
    return make_frame(j.at("id").get<std::string>(), j.at("origin_lon").get<double>(),
                      j.at("origin_lat").get<double>(), j.value("rotation", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidGeometry, std::string("frame: ") + e.what());
  }
}

}  // namespace ctxfab
