#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "ctxfab/spatial_model.hpp"

namespace ctxfab {

enum class PointClass { Inside, Boundary, Outside };

/// Even-odd classification with a kGeomEps boundary band.
PointClass classify_point(Vec2 p, const std::vector<Vec2>& ring);

struct Crossing {
  FeatureId feature;
  Vec2 point;
  double t = 0.0;  // parameter along the query segment
};

/// Contacts of the segment with the edges of opaque polygon features, sorted by
/// parameter. A collinear overlap contributes its two ends; each contact point
/// is reported once per feature.
std::vector<Crossing> segment_intersections(const Segment& segment, const SpatialModel& model);

struct VisibilityResult {
  bool visible = true;
  /// Blocking features ordered by distance from the first point.
  std::vector<FeatureId> blocking;
};

/// Blocked iff the open segment passes through the interior of an opaque
/// polygon. Isolated boundary touches and runs along a boundary do not block.
VisibilityResult visibility(Vec2 a, Vec2 b, const SpatialModel& model);

/// Point, feature or complex shape addressed by a query.
struct Target {
  std::variant<Vec2, FeatureId> ref;

  static Target point(Vec2 p) { return Target{p}; }
  static Target id(FeatureId id) { return Target{std::move(id)}; }
  bool is_point() const { return std::holds_alternative<Vec2>(ref); }
  std::string label() const;
};

double distance_to(Vec2 p, const Feature& target);
double distance_to(Vec2 p, const ComplexShape& target, const SpatialModel& model);
/// Throws UnknownTarget.
double distance_to(Vec2 p, const Target& target, const SpatialModel& model);

/// Throws NotAreal.
bool contains_point(const Feature& shape, Vec2 p);
bool contains_point(const ComplexShape& shape, Vec2 p, const SpatialModel& model);
/// Resolves a feature or complex shape id. Throws UnknownTarget or NotAreal.
bool contains_point(const FeatureId& shape, Vec2 p, const SpatialModel& model);

/// Every vertex of inner lies in outer and no inner edge properly crosses an
/// outer edge. Throws UnknownTarget or NotAreal.
bool contains_shape(const FeatureId& outer, const FeatureId& inner, const SpatialModel& model);

/// Representative point of a feature or complex shape (area centroid).
/// Throws UnknownTarget.
Vec2 target_anchor(const FeatureId& id, const SpatialModel& model);

}  // namespace ctxfab
