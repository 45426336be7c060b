#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/ids.hpp"
#include "ctxfab/projection.hpp"
#include "ctxfab/vec2.hpp"

namespace ctxfab {

struct PointGeom {
  Vec2 p;
};
struct PolylineGeom {
  std::vector<Vec2> vertices;
};
/// Simple, counter-clockwise, implicitly closed ring.
struct PolygonGeom {
  std::vector<Vec2> ring;
};

using Geometry = std::variant<PointGeom, PolylineGeom, PolygonGeom>;

inline bool is_areal(const Geometry& g) { return std::holds_alternative<PolygonGeom>(g); }

double signed_area(const std::vector<Vec2>& ring);
Vec2 centroid(const Geometry& g);
/// Returns an empty string when the geometry is well formed, otherwise the
/// violated rule.
std::string geometry_problem(const Geometry& g);

enum class FeatureKind { Wall, Door, Stairs, Elevator, Room, Exhibit, Furniture, Other };

std::string_view to_string(FeatureKind k) noexcept;
std::optional<FeatureKind> feature_kind_from_string(std::string_view s) noexcept;

struct Feature {
  FeatureId id;
  std::string name;
  FeatureKind kind = FeatureKind::Other;
  Geometry geometry;
  bool opaque = false;
  std::set<std::string> attributes;

  /// True when the attributes carry "disqualified_for:<tag>".
  bool disqualified_for(const std::string& tag) const;
};

/// Union of polygon features addressed as one target.
struct ComplexShape {
  FeatureId id;
  std::vector<FeatureId> members;
};

struct NavNode {
  NodeId id;
  Vec2 pos;
  std::string label;
};

struct NavEdge {
  NodeId a;
  NodeId b;
  double length = 0.0;
  std::set<std::string> tags;
  bool bidirectional = true;
  /// Feature the edge passes through (door, stairs, elevator), if any.
  std::optional<FeatureId> feature;
};

struct NavGraph {
  std::vector<NavNode> nodes;
  std::vector<NavEdge> edges;

  const NavNode* node(const NodeId& id) const;
};

/// Immutable environment model: frame, features, complex shapes, navgraph.
/// Construct through SpatialModel::build or load_model, which enforce the
/// invariants.
class SpatialModel {
 public:
  SpatialModel() = default;

  /// Throws ModelLoadError naming the first violated invariant.
  static SpatialModel build(LocalFrame frame, std::vector<Feature> features,
                            std::vector<ComplexShape> shapes, NavGraph graph);

  const LocalFrame& frame() const noexcept { return frame_; }
  const std::vector<Feature>& features() const noexcept { return features_; }
  const std::vector<ComplexShape>& complex_shapes() const noexcept { return shapes_; }
  const NavGraph& navgraph() const noexcept { return graph_; }

  const Feature* feature(const FeatureId& id) const;
  const ComplexShape* complex_shape(const FeatureId& id) const;

 private:
  LocalFrame frame_;
  std::vector<Feature> features_;
  std::vector<ComplexShape> shapes_;
  NavGraph graph_;
  std::map<FeatureId, std::size_t> feature_index_;
  std::map<FeatureId, std::size_t> shape_index_;
};

nlohmann::json model_to_json(const SpatialModel& m);
/// Throws ModelLoadError.
SpatialModel model_from_json(const nlohmann::json& j);
/// Throws ModelLoadError (including unreadable files).
SpatialModel load_model(const std::string& path);

}  // namespace ctxfab
