#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "junctiongen/errors.hpp"

namespace junctiongen {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
inline Vec2 operator*(double k, Vec2 a) { return {a.x * k, a.y * k}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double norm(Vec2 a);
double distance(Vec2 a, Vec2 b);
Vec2 normalized(Vec2 a);

/// Rotates a quarter turn counterclockwise.
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Open polygonal chain parameterized by cumulative arc length.
/// Invariants: at least two points, consecutive points distinct.
class Polyline {
 public:
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& arclengths() const { return cum_; }
  double length() const { return cum_.back(); }

  /// Position at arc length s in [0, length()].
  Vec2 point_at(double s) const;

  /// Tangent heading (radians) at arc length s. At interior vertices the
  /// outgoing segment wins; at s == length() the last segment applies.
  double heading_at(double s) const;

  /// Sub-chain between arc lengths s0 < s1, keeping interior vertices.
  Polyline slice(double s0, double s1) const;

  /// Points at 0, step, 2*step, ... plus the original endpoint.
  Polyline resampled(double step) const;

  /// Arc length of the point on the chain nearest to p (first minimum).
  double nearest_arclength(Vec2 p) const;

  double distance_to(Vec2 p) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cum_;
  std::size_t segment_index(double s) const;
};

/// Simple polygon with optional holes. Outer ring is stored counterclockwise,
/// holes clockwise; construction normalizes orientation and validates with a
/// self-intersection check. Rings are stored open (no repeated last vertex).
class Polygon {
 public:
  explicit Polygon(std::vector<Vec2> outer, std::vector<std::vector<Vec2>> holes = {});

  const std::vector<Vec2>& outer() const { return outer_; }
  const std::vector<std::vector<Vec2>>& holes() const { return holes_; }

  double area() const;

  /// True when p lies inside or within tol of the boundary.
  bool contains(Vec2 p, double tol = 1e-9) const;

  /// Zero inside, distance to the nearest boundary point outside.
  double distance_to(Vec2 p) const;

  double boundary_distance(Vec2 p) const;

 private:
  std::vector<Vec2> outer_;
  std::vector<std::vector<Vec2>> holes_;
};

/// Constant-width corridor around a centerline: offset curves joined with
/// miter joints (clipped to twice the half width, beveled past that) and
/// squared-off ends.
Polygon buffer_centerline(const Polyline& line, double half_width);

/// Intersection of two polygons as zero or more disjoint pieces.
std::vector<Polygon> polygon_intersection(const Polygon& a, const Polygon& b);

double overlap_area(const Polygon& a, const Polygon& b);

/// Arc length at which the chain first enters the polygon, if it does.
std::optional<double> first_entry_arclength(const Polyline& line, const Polygon& poly);

/// Maximal arc-length intervals of the chain lying inside the polygon.
std::vector<std::pair<double, double>> clip_intervals(const Polyline& line, const Polygon& poly);

struct PolylineCrossing {
  double s_a = 0.0;
  double s_b = 0.0;
  Vec2 point;
};

/// Earliest contact between two chains measured along the first one.
/// Touching within tol counts, so tangential merges are found too.
std::optional<PolylineCrossing> first_polyline_crossing(const Polyline& a, const Polyline& b,
                                                        double tol = 1e-9);

struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;
};

std::array<Vec2, 4> rect_corners(const OrientedRect& r);

/// Separating-axis test; touching rectangles count as overlapping.
bool rect_overlap(const OrientedRect& a, const OrientedRect& b);

/// Minimum distance between rectangle boundaries, zero when they overlap.
double rect_gap(const OrientedRect& a, const OrientedRect& b);

}  // namespace junctiongen
