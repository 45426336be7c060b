#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ctxfab/framework.hpp"
#include "ctxfab/spatial_model.hpp"

namespace ctxfab::test {

inline LocalFrame lab_frame() { return make_frame("lab", 11.0, 48.0, 0.0); }

inline Feature polygon(const std::string& id, std::vector<Vec2> ring, bool opaque = true,
                       FeatureKind kind = FeatureKind::Wall) {
  Feature f;
  f.id = FeatureId(id);
  f.name = id;
  f.kind = kind;
  f.opaque = opaque;
  f.geometry = PolygonGeom{std::move(ring)};
  return f;
}

inline Feature box(const std::string& id, double x0, double y0, double x1, double y1, bool opaque = true,
                   FeatureKind kind = FeatureKind::Wall) {
  return polygon(id, {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, opaque, kind);
}

inline SpatialModel model_of(std::vector<Feature> features, NavGraph graph = {},
                             std::vector<ComplexShape> shapes = {}) {
  return SpatialModel::build(lab_frame(), std::move(features), std::move(shapes), std::move(graph));
}

inline NavEdge edge(const std::string& a, const std::string& b, double length, std::set<std::string> tags = {}) {
  NavEdge e;
  e.a = NodeId(a);
  e.b = NodeId(b);
  e.length = length;
  e.tags = std::move(tags);
  return e;
}

inline PositionFix local_fix(const std::string& user, const std::string& device, Technology tech, Timestamp ts,
                             double x, double y, double sigma = 1.0, double p = 1.0,
                             const std::string& frame = "lab") {
  PositionFix f;
  f.user = UserId(user);
  f.device = DeviceId(device);
  f.technology = tech;
  f.timestamp = ts;
  f.coords.system = CoordinateSystem::local(frame);
  f.coords.x = x;
  f.coords.y = y;
  f.coords.precision_x = sigma;
  f.coords.precision_y = sigma;
  f.coords.probability = p;
  return f;
}

inline DeviceRecord device(const std::string& id, const std::string& owner, Technology tech) {
  DeviceRecord d;
  d.device = DeviceId(id);
  d.owner = UserId(owner);
  d.technology = tech;
  return d;
}

inline ContextFact fact(const std::string& user, const std::string& type, Timestamp ts, nlohmann::json value,
                        std::optional<double> rating = std::nullopt) {
  ContextFact f;
  f.user = UserId(user);
  f.type = type;
  f.timestamp = ts;
  f.value = std::move(value);
  f.rating = rating;
  return f;
}

inline std::string data_dir() { return CTXFAB_SOURCE_DIR "/data"; }
inline std::string golden_dir() { return CTXFAB_SOURCE_DIR "/tests/golden"; }

}  // namespace ctxfab::test
