#include "ctxfab/spatial_model.hpp"

#include <array>
#include <fstream>
#include <set>

#include "ctxfab/error.hpp"

namespace ctxfab {
namespace {

constexpr std::array<std::pair<FeatureKind, std::string_view>, 8> kKindNames{{
    {FeatureKind::Wall, "wall"},
    {FeatureKind::Door, "door"},
    {FeatureKind::Stairs, "stairs"},
    {FeatureKind::Elevator, "elevator"},
    {FeatureKind::Room, "room"},
    {FeatureKind::Exhibit, "exhibit"},
    {FeatureKind::Furniture, "furniture"},
    {FeatureKind::Other, "other"},
}};

[[noreturn]] void load_error(const std::string& what) { throw Error(ErrorCode::ModelLoadError, what); }

std::string vertices_problem(const std::vector<Vec2>& v, bool closed) {
  for (const auto& p : v)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return "non-finite vertex";
  std::size_t n = v.size();
  std::size_t pairs = closed ? n : n - 1;
  for (std::size_t i = 0; i < pairs; ++i) {
    if (dist(v[i], v[(i + 1) % n]) < kGeomEps) return "consecutive duplicate vertices";
  }
  return {};
}

std::string ring_problem(const std::vector<Vec2>& ring) {
  std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    Segment ei{ring[i], ring[(i + 1) % n]};
    for (std::size_t j = i + 1; j < n; ++j) {
      Segment ej{ring[j], ring[(j + 1) % n]};
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      auto contacts = segment_contacts(ei, ej);
      if (adjacent ? contacts.size() > 1 : !contacts.empty()) return "polygon is self-intersecting";
    }
  }
  if (!(signed_area(ring) > 0.0)) return "polygon must be counter-clockwise with positive area";
  return {};
}

Vec2 read_point(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    load_error("vertex must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json write_points(const std::vector<Vec2>& pts) {
  auto arr = nlohmann::json::array();
  for (auto p : pts) arr.push_back({p.x, p.y});
  return arr;
}

Geometry geometry_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.contains("coords")) load_error("geometry needs type and coords");
  auto type = j.at("type").get<std::string>();
  const auto& coords = j.at("coords");
  if (!coords.is_array()) load_error("coords must be an array");
  if (type == "point") {
    if (coords.size() == 2 && coords[0].is_number()) return PointGeom{read_point(coords)};
    if (coords.size() != 1) load_error("point geometry takes one coordinate pair");
    return PointGeom{read_point(coords[0])};
  }
  std::vector<Vec2> pts;
  for (const auto& c : coords) pts.push_back(read_point(c));
  if (type == "polyline") return PolylineGeom{std::move(pts)};
  if (type == "polygon") return PolygonGeom{std::move(pts)};
  load_error("unknown geometry type '" + type + "'");
}

nlohmann::json geometry_to_json(const Geometry& g) {
  return std::visit(
      [](const auto& geom) -> nlohmann::json {
        using T = std::decay_t<decltype(geom)>;
        if constexpr (std::is_same_v<T, PointGeom>) {
          return {{"type", "point"}, {"coords", write_points({geom.p})}};
        } else if constexpr (std::is_same_v<T, PolylineGeom>) {
          return {{"type", "polyline"}, {"coords", write_points(geom.vertices)}};
        } else {
          return {{"type", "polygon"}, {"coords", write_points(geom.ring)}};
        }
      },
      g);
}

}  // namespace

std::string_view to_string(FeatureKind k) noexcept {
  for (const auto& [kind, n] : kKindNames)
    if (kind == k) return n;
  return "other";
}

std::optional<FeatureKind> feature_kind_from_string(std::string_view s) noexcept {
  for (const auto& [kind, n] : kKindNames)
    if (n == s) return kind;
  return std::nullopt;
}

double signed_area(const std::vector<Vec2>& ring) {
  double twice = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) twice += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * twice;
}

Vec2 centroid(const Geometry& g) {
  if (const auto* pt = std::get_if<PointGeom>(&g)) return pt->p;
  if (const auto* line = std::get_if<PolylineGeom>(&g)) {
    Vec2 sum;
    for (auto v : line->vertices) sum = sum + v;
    return sum * (1.0 / static_cast<double>(line->vertices.size()));
  }
  const auto& ring = std::get<PolygonGeom>(g).ring;
  double a = signed_area(ring);
  Vec2 c;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    Vec2 p = ring[i];
    Vec2 q = ring[(i + 1) % n];
    double w = cross(p, q);
    c = c + (p + q) * w;
  }
  return c * (1.0 / (6.0 * a));
}

std::string geometry_problem(const Geometry& g) {
  if (const auto* pt = std::get_if<PointGeom>(&g)) {
    return std::isfinite(pt->p.x) && std::isfinite(pt->p.y) ? std::string{} : "non-finite point";
  }
  if (const auto* line = std::get_if<PolylineGeom>(&g)) {
    if (line->vertices.size() < 2) return "polyline needs at least 2 vertices";
    return vertices_problem(line->vertices, false);
  }
  const auto& ring = std::get<PolygonGeom>(g).ring;
  if (ring.size() < 3) return "polygon needs at least 3 vertices";
  if (auto p = vertices_problem(ring, true); !p.empty()) return p;
  return ring_problem(ring);
}

bool Feature::disqualified_for(const std::string& tag) const {
  return attributes.contains("disqualified_for:" + tag);
}

const NavNode* NavGraph::node(const NodeId& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

SpatialModel SpatialModel::build(LocalFrame frame, std::vector<Feature> features, std::vector<ComplexShape> shapes,
                                 NavGraph graph) {
  SpatialModel m;
  try {
    m.frame_ = make_frame(frame.frame_id, frame.origin_lon, frame.origin_lat, frame.rotation);
  } catch (const Error& e) {
    load_error(e.detail());
  }
  m.features_ = std::move(features);
  m.shapes_ = std::move(shapes);
  m.graph_ = std::move(graph);

  for (std::size_t i = 0; i < m.features_.size(); ++i) {
    const auto& f = m.features_[i];
    if (f.id.empty()) load_error("feature with empty id");
    if (!m.feature_index_.emplace(f.id, i).second) load_error("duplicate feature id '" + f.id.str() + "'");
    if (auto p = geometry_problem(f.geometry); !p.empty()) load_error("feature '" + f.id.str() + "': " + p);
    if (f.kind == FeatureKind::Stairs && !f.disqualified_for("wheelchair"))
      load_error("stairs feature '" + f.id.str() + "' must carry disqualified_for:wheelchair");
  }
  for (std::size_t i = 0; i < m.shapes_.size(); ++i) {
    const auto& s = m.shapes_[i];
    if (s.id.empty()) load_error("complex shape with empty id");
    if (m.feature_index_.contains(s.id) || !m.shape_index_.emplace(s.id, i).second)
      load_error("duplicate shape id '" + s.id.str() + "'");
    if (s.members.empty()) load_error("complex shape '" + s.id.str() + "' has no members");
    for (const auto& member : s.members) {
      const Feature* f = m.feature(member);
      if (!f) load_error("complex shape '" + s.id.str() + "' references unknown feature '" + member.str() + "'");
      if (!is_areal(f->geometry)) load_error("complex shape member '" + member.str() + "' is not a polygon");
    }
  }

  std::set<NodeId> node_ids;
  for (const auto& n : m.graph_.nodes) {
    if (n.id.empty() || !node_ids.insert(n.id).second) load_error("duplicate or empty navgraph node id");
    if (!std::isfinite(n.pos.x) || !std::isfinite(n.pos.y)) load_error("navgraph node '" + n.id.str() + "' not finite");
  }
  for (const auto& e : m.graph_.edges) {
    const NavNode* a = m.graph_.node(e.a);
    const NavNode* b = m.graph_.node(e.b);
    if (!a || !b) load_error("navgraph edge references unknown node");
    if (!(e.length > 0.0)) load_error("navgraph edge length must be > 0");
    if (e.length < dist(a->pos, b->pos) - 1e-6)
      load_error("navgraph edge " + e.a.str() + "-" + e.b.str() + " shorter than straight-line distance");
    if (e.feature && !m.feature(*e.feature)) load_error("navgraph edge references unknown feature");
  }
  return m;
}

const Feature* SpatialModel::feature(const FeatureId& id) const {
  auto it = feature_index_.find(id);
  return it == feature_index_.end() ? nullptr : &features_[it->second];
}

const ComplexShape* SpatialModel::complex_shape(const FeatureId& id) const {
  auto it = shape_index_.find(id);
  return it == shape_index_.end() ? nullptr : &shapes_[it->second];
}

nlohmann::json model_to_json(const SpatialModel& m) {
  nlohmann::json j;
  j["frame"] = frame_to_json(m.frame());
  auto features = nlohmann::json::array();
  for (const auto& f : m.features()) {
    features.push_back({{"id", f.id.str()},
                        {"name", f.name},
                        {"kind", to_string(f.kind)},
                        {"opaque", f.opaque},
                        {"attributes", f.attributes},
                        {"geometry", geometry_to_json(f.geometry)}});
  }
  j["features"] = std::move(features);
  auto shapes = nlohmann::json::array();
  for (const auto& s : m.complex_shapes()) {
    auto members = nlohmann::json::array();
    for (const auto& id : s.members) members.push_back(id.str());
    shapes.push_back({{"id", s.id.str()}, {"members", members}});
  }
  j["complex_shapes"] = std::move(shapes);
  auto nodes = nlohmann::json::array();
  for (const auto& n : m.navgraph().nodes)
    nodes.push_back({{"id", n.id.str()}, {"x", n.pos.x}, {"y", n.pos.y}, {"label", n.label}});
  auto edges = nlohmann::json::array();
  for (const auto& e : m.navgraph().edges) {
    nlohmann::json ej{{"a", e.a.str()}, {"b", e.b.str()}, {"length", e.length}, {"tags", e.tags},
                      {"bidir", e.bidirectional}};
    if (e.feature) ej["feature"] = e.feature->str();
    edges.push_back(std::move(ej));
  }
  j["navgraph"] = {{"nodes", nodes}, {"edges", edges}};
  return j;
}

SpatialModel model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("frame")) load_error("model needs a frame");
    LocalFrame frame;
    try {
      frame = frame_from_json(j.at("frame"));
    } catch (const Error& e) {
      load_error(e.detail());
    }
    std::vector<Feature> features;
    for (const auto& fj : j.value("features", nlohmann::json::array())) {
      Feature f;
      f.id = FeatureId(fj.at("id").get<std::string>());
      f.name = fj.value("name", f.id.str());
      auto kind = feature_kind_from_string(fj.value("kind", std::string("other")));
      if (!kind) load_error("feature '" + f.id.str() + "' has unknown kind");
      f.kind = *kind;
      f.opaque = fj.value("opaque", false);
      if (fj.contains("attributes")) f.attributes = fj.at("attributes").get<std::set<std::string>>();
      f.geometry = geometry_from_json(fj.at("geometry"));
      features.push_back(std::move(f));
    }
    std::vector<ComplexShape> shapes;
    for (const auto& sj : j.value("complex_shapes", nlohmann::json::array())) {
      ComplexShape s;
      s.id = FeatureId(sj.at("id").get<std::string>());
      for (const auto& m : sj.at("members")) s.members.emplace_back(m.get<std::string>());
      shapes.push_back(std::move(s));
    }
    NavGraph graph;
    if (j.contains("navgraph")) {
      const auto& gj = j.at("navgraph");
      for (const auto& nj : gj.value("nodes", nlohmann::json::array())) {
        graph.nodes.push_back(NavNode{NodeId(nj.at("id").get<std::string>()),
                                      {nj.at("x").get<double>(), nj.at("y").get<double>()},
                                      nj.value("label", std::string{})});
      }
      for (const auto& ej : gj.value("edges", nlohmann::json::array())) {
        NavEdge e;
        e.a = NodeId(ej.at("a").get<std::string>());
        e.b = NodeId(ej.at("b").get<std::string>());
        if (ej.contains("length")) {
          e.length = ej.at("length").get<double>();
        } else {
          const NavNode* a = graph.node(e.a);
          const NavNode* b = graph.node(e.b);
          if (!a || !b) load_error("navgraph edge references unknown node");
          e.length = dist(a->pos, b->pos);
        }
        if (ej.contains("tags")) e.tags = ej.at("tags").get<std::set<std::string>>();
        e.bidirectional = ej.value("bidir", true);
        if (ej.contains("feature")) e.feature = FeatureId(ej.at("feature").get<std::string>());
        graph.edges.push_back(std::move(e));
      }
    }
    return SpatialModel::build(std::move(frame), std::move(features), std::move(shapes), std::move(graph));
  } catch (const nlohmann::json::exception& e) {
    load_error(e.what());
  }
}

SpatialModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) load_error("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    load_error("model file '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace ctxfab
