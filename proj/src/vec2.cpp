#include "ctxfab/vec2.hpp"

#include <algorithm>

namespace ctxfab {

double closest_parameter(Vec2 p, const Segment& s) {
  Vec2 d = s.b - s.a;
  double len2 = dot(d, d);
  if (len2 == 0.0) return 0.0;
  return std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
}

double point_segment_distance(Vec2 p, const Segment& s) { return dist(p, s.at(closest_parameter(p, s))); }

bool segments_cross_properly(const Segment& s, const Segment& t) {
  double ls = s.length();
  double lt = t.length();
  if (ls <= kGeomEps || lt <= kGeomEps) return false;
  // signed distances of each segment's endpoints from the other's line
  double d1 = cross(s.b - s.a, t.a - s.a) / ls;
  double d2 = cross(s.b - s.a, t.b - s.a) / ls;
  double d3 = cross(t.b - t.a, s.a - t.a) / lt;
  double d4 = cross(t.b - t.a, s.b - t.a) / lt;
  auto strictly_opposite = [](double u, double v) {
    return (u > kGeomEps && v < -kGeomEps) || (u < -kGeomEps && v > kGeomEps);
  };
  return strictly_opposite(d1, d2) && strictly_opposite(d3, d4);
}

std::vector<double> segment_contacts(const Segment& s, const Segment& edge) {
  std::vector<double> out;
  Vec2 d1 = s.b - s.a;
  Vec2 d2 = edge.b - edge.a;
  double l1 = norm(d1);
  double l2 = norm(d2);

  if (l1 <= kGeomEps) {
    if (point_segment_distance(s.a, edge) <= kGeomEps) out.push_back(0.0);
    return out;
  }

  double denom = cross(d1, d2);
  if (l2 > kGeomEps && std::abs(denom) > 1e-12 * l1 * l2) {
    Vec2 w = edge.a - s.a;
    double t = cross(w, d2) / denom;
    double u = cross(w, d1) / denom;
    double tt = kGeomEps / l1;
    double tu = kGeomEps / l2;
    if (t >= -tt && t <= 1.0 + tt && u >= -tu && u <= 1.0 + tu) out.push_back(std::clamp(t, 0.0, 1.0));
  }
  // Endpoint contacts cover touches and the ends of collinear overlaps.
  for (Vec2 e : {edge.a, edge.b}) {
    if (point_segment_distance(e, s) <= kGeomEps) out.push_back(closest_parameter(e, s));
  }
  if (point_segment_distance(s.a, edge) <= kGeomEps) out.push_back(0.0);
  if (point_segment_distance(s.b, edge) <= kGeomEps) out.push_back(1.0);

  std::sort(out.begin(), out.end());
  double merge = kGeomEps / l1;
  std::vector<double> unique;
  for (double t : out) {
    if (unique.empty() || t - unique.back() > merge) unique.push_back(t);
  }
  return unique;
}

}  // namespace ctxfab
