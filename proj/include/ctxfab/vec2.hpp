#pragma once

#include <cmath>
#include <vector>

namespace ctxfab {

/// Geometric tolerance in meters used by every predicate.
inline constexpr double kGeomEps = 1e-9;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

struct Segment {
  Vec2 a;
  Vec2 b;

  Vec2 at(double t) const { return a + (b - a) * t; }
  double length() const { return dist(a, b); }
};

/// Euclidean distance from p to the closed segment s.
double point_segment_distance(Vec2 p, const Segment& s);

/// Parameter in [0, 1] of the point of s closest to p.
double closest_parameter(Vec2 p, const Segment& s);

/// True iff s and t cross at a single point interior to both (no endpoint
/// touch, no collinear overlap), with tolerance kGeomEps.
bool segments_cross_properly(const Segment& s, const Segment& t);

/// Contact parameters of `edge` on `s`: one value for a point contact, the two
/// overlap ends for a collinear overlap, none when disjoint. Values lie in [0, 1].
std::vector<double> segment_contacts(const Segment& s, const Segment& edge);

}  // namespace ctxfab
