#include "ctxfab/coordinates.hpp"

#include <cmath>

namespace ctxfab {

Verdict validate_coordinates(const Coordinates2D& c) {
  if (c.z) return ValidationError{ErrorCode::BadCoordinates, "coordinates must not have a Z component"};
  if (!std::isfinite(c.x) || !std::isfinite(c.y))
    return ValidationError{ErrorCode::BadCoordinates, "coordinate values must be finite"};
  if (!(c.precision_x > 0.0) || !(c.precision_y > 0.0) || !std::isfinite(c.precision_x) ||
      !std::isfinite(c.precision_y))
    return ValidationError{ErrorCode::BadCoordinates, "precision must be > 0 on both axes"};
  if (!(c.probability > 0.0 && c.probability <= 1.0))
    return ValidationError{ErrorCode::BadCoordinates, "probability must be in (0, 1]"};
  if (c.system.is_global()) {
    if (std::abs(c.y) >= 90.0) return ValidationError{ErrorCode::BadCoordinates, "latitude out of range"};
    if (std::abs(c.x) > 180.0) return ValidationError{ErrorCode::BadCoordinates, "longitude out of range"};
  } else if (c.system.frame_id().empty()) {
    return ValidationError{ErrorCode::BadCoordinates, "empty frame id"};
  }
  return std::nullopt;
}

nlohmann::json coordinates_to_json(const Coordinates2D& c) {
  nlohmann::json j{{"sys", c.system.label()},  {"x", c.x},           {"y", c.y},
                   {"px", c.precision_x},      {"py", c.precision_y}, {"p", c.probability}};
  if (c.z) j["z"] = *c.z;
  return j;
}

Coordinates2D coordinates_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& why) -> Coordinates2D {
    throw Error(ErrorCode::SchemaMismatch, why);
  };
  if (!j.is_object()) return fail("coordinates must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key == "z") continue;
    if (key != "sys" && key != "x" && key != "y" && key != "px" && key != "py" && key != "p")
      return fail("unexpected coordinates field '" + key + "'");
  }
  for (const char* key : {"x", "y", "px", "py", "p"}) {
    if (!j.contains(key) || !j.at(key).is_number()) return fail(std::string("missing numeric field '") + key + "'");
  }
  if (!j.contains("sys") || !j.at("sys").is_string()) return fail("missing coordinate system");

  Coordinates2D c;
  c.system = CoordinateSystem::from_label(j.at("sys").get<std::string>());
  c.x = j.at("x").get<double>();
  c.y = j.at("y").get<double>();
  c.precision_x = j.at("px").get<double>();
  c.precision_y = j.at("py").get<double>();
  c.probability = j.at("p").get<double>();
  if (j.contains("z")) {
    c.z = j.at("z").is_number() ? j.at("z").get<double>() : 0.0;
  }
  return c;
}

}  // namespace ctxfab
