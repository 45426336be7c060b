#include "ctxfab/spatial_ops.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "ctxfab/error.hpp"

namespace ctxfab {
namespace {

const std::vector<Vec2>* polygon_ring(const Feature& f) {
  const auto* poly = std::get_if<PolygonGeom>(&f.geometry);
  return poly ? &poly->ring : nullptr;
}

double ring_boundary_distance(Vec2 p, const std::vector<Vec2>& ring) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = ring.size(); i < n; ++i)
    best = std::min(best, point_segment_distance(p, {ring[i], ring[(i + 1) % n]}));
  return best;
}

/// Contact parameters of the segment with every edge of the ring.
std::vector<double> ring_contacts(const Segment& s, const std::vector<Vec2>& ring) {
  std::vector<double> ts;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    auto c = segment_contacts(s, {ring[i], ring[(i + 1) % n]});
    ts.insert(ts.end(), c.begin(), c.end());
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

/// Polygon rings of a feature or complex shape id.
std::vector<const std::vector<Vec2>*> areal_rings(const FeatureId& id, const SpatialModel& model) {
  std::vector<const std::vector<Vec2>*> rings;
  if (const Feature* f = model.feature(id)) {
    const auto* ring = polygon_ring(*f);
    if (!ring) throw Error(ErrorCode::NotAreal, id.str());
    rings.push_back(ring);
    return rings;
  }
  if (const ComplexShape* s = model.complex_shape(id)) {
    for (const auto& m : s->members) rings.push_back(polygon_ring(*model.feature(m)));
    return rings;
  }
  throw Error(ErrorCode::UnknownTarget, id.str());
}

}  // namespace

PointClass classify_point(Vec2 p, const std::vector<Vec2>& ring) {
  if (ring_boundary_distance(p, ring) <= kGeomEps) return PointClass::Boundary;
  bool inside = false;
  for (std::size_t i = 0, n = ring.size(), j = n - 1; i < n; j = i++) {
    Vec2 a = ring[i];
    Vec2 b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside ? PointClass::Inside : PointClass::Outside;
}

std::vector<Crossing> segment_intersections(const Segment& segment, const SpatialModel& model) {
  std::vector<Crossing> out;
  double len = segment.length();
  double merge = len > 0.0 ? kGeomEps / len : 0.0;
  for (const auto& f : model.features()) {
    if (!f.opaque) continue;
    const auto* ring = polygon_ring(f);
    if (!ring) continue;
    auto ts = ring_contacts(segment, *ring);
    double last = -1.0;
    for (double t : ts) {
      if (last >= 0.0 && t - last <= merge) continue;
      out.push_back({f.id, segment.at(t), t});
      last = t;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) {
    if (x.t != y.t) return x.t < y.t;
    return x.feature < y.feature;
  });
  return out;
}

VisibilityResult visibility(Vec2 a, Vec2 b, const SpatialModel& model) {
  VisibilityResult result;
  Segment seg{a, b};
  double len = seg.length();
  if (len <= kGeomEps) return result;

  std::vector<std::pair<double, FeatureId>> hits;
  for (const auto& f : model.features()) {
    if (!f.opaque) continue;
    const auto* ring = polygon_ring(f);
    if (!ring) continue;
    std::vector<double> ts{0.0};
    for (double t : ring_contacts(seg, *ring)) ts.push_back(t);
    ts.push_back(1.0);
    std::sort(ts.begin(), ts.end());
    // Between consecutive contacts the segment is entirely inside or outside.
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      if ((ts[i + 1] - ts[i]) * len <= kGeomEps) continue;
      if (classify_point(seg.at(0.5 * (ts[i] + ts[i + 1])), *ring) == PointClass::Inside) {
        hits.emplace_back(ts[i], f.id);
        break;
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  for (auto& [_, id] : hits) result.blocking.push_back(std::move(id));
  result.visible = result.blocking.empty();
  return result;
}

std::string Target::label() const {
  if (const auto* p = std::get_if<Vec2>(&ref)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.2f, %.2f)", p->x, p->y);
    return buf;
  }
  return std::get<FeatureId>(ref).str();
}

double distance_to(Vec2 p, const Feature& target) {
  if (const auto* pt = std::get_if<PointGeom>(&target.geometry)) return dist(p, pt->p);
  if (const auto* line = std::get_if<PolylineGeom>(&target.geometry)) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line->vertices.size(); ++i)
      best = std::min(best, point_segment_distance(p, {line->vertices[i], line->vertices[i + 1]}));
    return best;
  }
  const auto& ring = std::get<PolygonGeom>(target.geometry).ring;
  if (classify_point(p, ring) != PointClass::Outside) return 0.0;
  return ring_boundary_distance(p, ring);
}

double distance_to(Vec2 p, const ComplexShape& target, const SpatialModel& model) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : target.members) {
    const Feature* f = model.feature(m);
    if (!f) throw Error(ErrorCode::UnknownTarget, m.str());
    best = std::min(best, distance_to(p, *f));
  }
  return best;
}

double distance_to(Vec2 p, const Target& target, const SpatialModel& model) {
  if (const auto* q = std::get_if<Vec2>(&target.ref)) return dist(p, *q);
  const auto& id = std::get<FeatureId>(target.ref);
  if (const Feature* f = model.feature(id)) return distance_to(p, *f);
  if (const ComplexShape* s = model.complex_shape(id)) return distance_to(p, *s, model);
  throw Error(ErrorCode::UnknownTarget, id.str());
}

bool contains_point(const Feature& shape, Vec2 p) {
  const auto* ring = polygon_ring(shape);
  if (!ring) throw Error(ErrorCode::NotAreal, shape.id.str());
  return classify_point(p, *ring) != PointClass::Outside;
}

bool contains_point(const ComplexShape& shape, Vec2 p, const SpatialModel& model) {
  for (const auto& m : shape.members) {
    const Feature* f = model.feature(m);
    if (!f) throw Error(ErrorCode::UnknownTarget, m.str());
    if (contains_point(*f, p)) return true;
  }
  return false;
}

bool contains_point(const FeatureId& shape, Vec2 p, const SpatialModel& model) {
  for (const auto* ring : areal_rings(shape, model))
    if (classify_point(p, *ring) != PointClass::Outside) return true;
  return false;
}

bool contains_shape(const FeatureId& outer, const FeatureId& inner, const SpatialModel& model) {
  auto outer_rings = areal_rings(outer, model);
  auto inner_rings = areal_rings(inner, model);
  for (const auto* in : inner_rings) {
    for (Vec2 v : *in) {
      bool covered = std::any_of(outer_rings.begin(), outer_rings.end(),
                                 [&](const auto* r) { return classify_point(v, *r) != PointClass::Outside; });
      if (!covered) return false;
    }
    for (std::size_t i = 0, n = in->size(); i < n; ++i) {
      Segment e{(*in)[i], (*in)[(i + 1) % n]};
      for (const auto* out : outer_rings) {
        for (std::size_t k = 0, m = out->size(); k < m; ++k) {
          if (segments_cross_properly(e, {(*out)[k], (*out)[(k + 1) % m]})) return false;
        }
      }
    }
  }
  return true;
}

Vec2 target_anchor(const FeatureId& id, const SpatialModel& model) {
  if (const Feature* f = model.feature(id)) return centroid(f->geometry);
  if (const ComplexShape* s = model.complex_shape(id)) {
    Vec2 sum;
    double total = 0.0;
    for (const auto& m : s->members) {
      const auto& g = model.feature(m)->geometry;
      double area = signed_area(std::get<PolygonGeom>(g).ring);
      sum = sum + centroid(g) * area;
      total += area;
    }
    return sum * (1.0 / total);
  }
  throw Error(ErrorCode::UnknownTarget, id.str());
}

}  // namespace ctxfab
