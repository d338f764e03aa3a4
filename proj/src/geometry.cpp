#include "junctiongen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "junctiongen/errors.hpp"

namespace bg = boost::geometry;

namespace junctiongen {

namespace {

using BoostPoint = bg::model::d2::point_xy<double>;
using BoostPolygon = bg::model::polygon<BoostPoint, false, true>;  // ccw, closed
using BoostMulti = bg::model::multi_polygon<BoostPolygon>;

constexpr double kEps = 1e-9;

BoostPolygon to_boost(const Polygon& p) {
  BoostPolygon out;
  for (const Vec2& v : p.outer()) out.outer().push_back({v.x, v.y});
  out.outer().push_back(out.outer().front());
  for (const auto& hole : p.holes()) {
    out.inners().emplace_back();
    for (const Vec2& v : hole) out.inners().back().push_back({v.x, v.y});
    out.inners().back().push_back(out.inners().back().front());
  }
  return out;
}

std::vector<Vec2> from_boost_ring(const BoostPolygon::ring_type& ring) {
  std::vector<Vec2> out;
  for (const BoostPoint& p : ring) out.push_back({bg::get<0>(p), bg::get<1>(p)});
  if (out.size() > 1 && distance(out.front(), out.back()) < kEps) out.pop_back();
  return out;
}

Polygon from_boost(const BoostPolygon& p) {
  std::vector<std::vector<Vec2>> holes;
  for (const auto& inner : p.inners()) holes.push_back(from_boost_ring(inner));
  return Polygon(from_boost_ring(p.outer()), std::move(holes));
}

double ring_signed_area(const std::vector<Vec2>& ring) {
  double acc = 0.0;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
    acc += cross(ring[j], ring[i]);
  return acc / 2.0;
}

bool ring_contains_point(const std::vector<Vec2>& ring, Vec2 p) {
  bool in = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      in = !in;
  }
  return in;
}

std::vector<Vec2> clean_ring(std::vector<Vec2> ring) {
  if (ring.size() > 1 && distance(ring.front(), ring.back()) < 1e-12) ring.pop_back();
  std::vector<Vec2> out;
  for (const Vec2& p : ring)
    if (out.empty() || distance(out.back(), p) > 1e-12) out.push_back(p);
  return out;
}

}  // namespace

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

double distance(Vec2 a, Vec2 b) { return norm(a - b); }

Vec2 normalized(Vec2 a) {
  double n = norm(a);
  if (n < 1e-15) throw DataError("cannot normalize a zero vector");
  return {a.x / n, a.y / n};
}

double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  double len2 = dot(d, d);
  if (len2 < 1e-30) return distance(p, a);
  double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return distance(p, a + d * t);
}

double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  Vec2 r = b - a;
  Vec2 s = d - c;
  double denom = cross(r, s);
  if (std::abs(denom) > 1e-15) {
    double t = cross(c - a, s) / denom;
    double u = cross(c - a, r) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
  }
  return std::min(std::min(point_segment_distance(a, c, d), point_segment_distance(b, c, d)),
                  std::min(point_segment_distance(c, a, b), point_segment_distance(d, a, b)));
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DataError("polyline needs at least two points");
  cum_.resize(points_.size());
  cum_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    double d = distance(points_[i - 1], points_[i]);
    if (d < 1e-12) throw DataError("polyline has a degenerate segment");
    cum_[i] = cum_[i - 1] + d;
  }
}

std::size_t Polyline::segment_index(double s) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t idx = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
  return std::min(idx, points_.size() - 2);
}

Vec2 Polyline::point_at(double s) const {
  if (s < -1e-6 || s > length() + 1e-6) throw DataError("arc length outside the polyline");
  s = std::clamp(s, 0.0, length());
  std::size_t i = segment_index(s);
  double seg = cum_[i + 1] - cum_[i];
  double t = (s - cum_[i]) / seg;
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

double Polyline::heading_at(double s) const {
  if (s < -1e-6 || s > length() + 1e-6) throw DataError("arc length outside the polyline");
  s = std::clamp(s, 0.0, length());
  std::size_t i = segment_index(s);
  Vec2 d = points_[i + 1] - points_[i];
  return std::atan2(d.y, d.x);
}

Polyline Polyline::slice(double s0, double s1) const {
  if (s0 < -1e-6 || s1 > length() + 1e-6 || s1 - s0 < 1e-9)
    throw DataError("bad slice bounds");
  s0 = std::clamp(s0, 0.0, length());
  s1 = std::clamp(s1, 0.0, length());
  std::vector<Vec2> pts;
  pts.push_back(point_at(s0));
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (cum_[i] > s0 + 1e-9 && cum_[i] < s1 - 1e-9) pts.push_back(points_[i]);
  }
  pts.push_back(point_at(s1));
  return Polyline(std::move(pts));
}

Polyline Polyline::resampled(double step) const {
  if (step <= 0.0) throw ConfigError("resample step must be positive");
  std::vector<Vec2> pts;
  for (double s = 0.0; s < length() - 1e-9; s += step) pts.push_back(point_at(s));
  pts.push_back(points_.back());
  if (pts.size() < 2) pts.insert(pts.begin(), points_.front());
  return Polyline(std::move(pts));
}

double Polyline::nearest_arclength(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    Vec2 d = points_[i + 1] - points_[i];
    double t = std::clamp(dot(p - points_[i], d) / dot(d, d), 0.0, 1.0);
    double dist2 = dot(p - (points_[i] + d * t), p - (points_[i] + d * t));
    if (dist2 < best - 1e-18) {
      best = dist2;
      best_s = cum_[i] + t * (cum_[i + 1] - cum_[i]);
    }
  }
  return best_s;
}

double Polyline::distance_to(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points_.size(); ++i)
    best = std::min(best, point_segment_distance(p, points_[i], points_[i + 1]));
  return best;
}

Polygon::Polygon(std::vector<Vec2> outer, std::vector<std::vector<Vec2>> holes)
    : outer_(clean_ring(std::move(outer))) {
  if (outer_.size() < 3) throw DataError("polygon ring needs at least three points");
  if (ring_signed_area(outer_) < 0.0) std::reverse(outer_.begin(), outer_.end());
  if (ring_signed_area(outer_) < 1e-12) throw DataError("polygon has no area");
  for (auto& h : holes) {
    auto ring = clean_ring(std::move(h));
    if (ring.size() < 3) throw DataError("polygon hole needs at least three points");
    if (ring_signed_area(ring) > 0.0) std::reverse(ring.begin(), ring.end());
    holes_.push_back(std::move(ring));
  }
  std::string reason;
  if (!bg::is_valid(to_boost(*this), reason)) throw DataError("invalid polygon: " + reason);
}

double Polygon::area() const {
  double acc = ring_signed_area(outer_);
  for (const auto& h : holes_) acc += ring_signed_area(h);  // holes are negative
  return acc;
}

double Polygon::boundary_distance(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  auto ring_dist = [&](const std::vector<Vec2>& ring) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
      best = std::min(best, point_segment_distance(p, ring[j], ring[i]));
  };
  ring_dist(outer_);
  for (const auto& h : holes_) ring_dist(h);
  return best;
}

bool Polygon::contains(Vec2 p, double tol) const {
  if (boundary_distance(p) <= tol) return true;
  if (!ring_contains_point(outer_, p)) return false;
  for (const auto& h : holes_)
    if (ring_contains_point(h, p)) return false;
  return true;
}

double Polygon::distance_to(Vec2 p) const {
  return contains(p, 0.0) ? 0.0 : boundary_distance(p);
}

namespace {

// One offset curve of the centerline. Joints are mitered; on the outside of
// a turn the miter is capped at twice the width and beveled past that.
std::vector<Vec2> offset_side(const std::vector<Vec2>& pts, double w, bool left) {
  const double sign = left ? 1.0 : -1.0;
  std::vector<Vec2> dirs(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) dirs[i] = normalized(pts[i + 1] - pts[i]);

  std::vector<Vec2> out;
  out.push_back(pts.front() + perp(dirs.front()) * (sign * w));
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    Vec2 din = dirs[i - 1];
    Vec2 dout = dirs[i];
    double turn = cross(din, dout);
    double ahead = dot(din, dout);
    Vec2 nin = perp(din) * sign;
    Vec2 nout = perp(dout) * sign;
    if (std::abs(turn) < 1e-12 && ahead > 0.0) {
      out.push_back(pts[i] + nin * w);
      continue;
    }
    if (ahead < -1.0 + 1e-9) throw DataError("centerline folds back on itself");
    Vec2 bis = nin + nout;
    double bn = norm(bis);
    double miter_len = w / (bn / 2.0);
    bool outside = left ? turn < 0.0 : turn > 0.0;
    if (outside && miter_len > 2.0 * w + 1e-12) {
      out.push_back(pts[i] + nin * w);
      out.push_back(pts[i] + nout * w);
    } else {
      out.push_back(pts[i] + bis * (miter_len / bn));
    }
  }
  out.push_back(pts.back() + perp(dirs.back()) * (sign * w));
  return out;
}

}  // namespace

Polygon buffer_centerline(const Polyline& line, double half_width) {
  if (half_width <= 0.0) throw ConfigError("buffer width must be positive");
  std::vector<Vec2> ring = offset_side(line.points(), half_width, true);
  std::vector<Vec2> right = offset_side(line.points(), half_width, false);
  ring.insert(ring.end(), right.rbegin(), right.rend());
  return Polygon(std::move(ring));
}

std::vector<Polygon> polygon_intersection(const Polygon& a, const Polygon& b) {
  BoostMulti pieces;
  bg::intersection(to_boost(a), to_boost(b), pieces);
  std::vector<Polygon> out;
  for (const BoostPolygon& piece : pieces)
    if (bg::area(piece) > 1e-12) out.push_back(from_boost(piece));
  return out;
}

double overlap_area(const Polygon& a, const Polygon& b) {
  double acc = 0.0;
  for (const Polygon& piece : polygon_intersection(a, b)) acc += piece.area();
  return acc;
}

namespace {

// Collects chain arc lengths at which one chain segment meets one ring edge.
void segment_events(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double s0, double seg_len,
                    std::vector<double>& events) {
  Vec2 r = b - a;
  Vec2 s = d - c;
  double denom = cross(r, s);
  double scale = std::max({dot(r, r), dot(s, s), 1.0});
  if (std::abs(denom) > 1e-12 * scale) {
    double t = cross(c - a, s) / denom;
    double u = cross(c - a, r) / denom;
    if (t >= -1e-9 && t <= 1.0 + 1e-9 && u >= -1e-9 && u <= 1.0 + 1e-9)
      events.push_back(s0 + std::clamp(t, 0.0, 1.0) * seg_len);
    return;
  }
  if (point_segment_distance(c, a, b) < kEps || point_segment_distance(d, a, b) < kEps) {
    double rr = dot(r, r);
    for (Vec2 q : {c, d}) {
      double t = dot(q - a, r) / rr;
      if (t >= -1e-9 && t <= 1.0 + 1e-9 && point_segment_distance(q, a, b) < kEps)
        events.push_back(s0 + std::clamp(t, 0.0, 1.0) * seg_len);
    }
  }
}

}  // namespace

std::vector<std::pair<double, double>> clip_intervals(const Polyline& line, const Polygon& poly) {
  const auto& pts = line.points();
  const auto& cum = line.arclengths();
  std::vector<double> events{0.0, line.length()};
  auto ring_events = [&](const std::vector<Vec2>& ring) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      double seg_len = cum[i + 1] - cum[i];
      for (std::size_t k = 0, j = ring.size() - 1; k < ring.size(); j = k++)
        segment_events(pts[i], pts[i + 1], ring[j], ring[k], cum[i], seg_len, events);
    }
  };
  ring_events(poly.outer());
  for (const auto& h : poly.holes()) ring_events(h);

  std::sort(events.begin(), events.end());
  std::vector<double> cuts;
  for (double e : events) {
    e = std::clamp(e, 0.0, line.length());
    if (cuts.empty() || e - cuts.back() > kEps) cuts.push_back(e);
  }

  std::vector<std::pair<double, double>> intervals;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = (cuts[i] + cuts[i + 1]) / 2.0;
    if (!poly.contains(line.point_at(mid), kEps)) continue;
    if (!intervals.empty() && cuts[i] - intervals.back().second < kEps)
      intervals.back().second = cuts[i + 1];
    else
      intervals.emplace_back(cuts[i], cuts[i + 1]);
  }
  return intervals;
}

std::optional<double> first_entry_arclength(const Polyline& line, const Polygon& poly) {
  auto intervals = clip_intervals(line, poly);
  if (intervals.empty()) return std::nullopt;
  return intervals.front().first;
}

std::optional<PolylineCrossing> first_polyline_crossing(const Polyline& a, const Polyline& b,
                                                        double tol) {
  const auto& pa = a.points();
  const auto& ca = a.arclengths();
  const auto& pb = b.points();
  const auto& cb = b.arclengths();

  for (std::size_t i = 0; i + 1 < pa.size(); ++i) {
    Vec2 a0 = pa[i];
    Vec2 a1 = pa[i + 1];
    double seg_len = ca[i + 1] - ca[i];
    double best_t = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;

    for (std::size_t j = 0; j + 1 < pb.size(); ++j) {
      if (segment_distance(a0, a1, pb[j], pb[j + 1]) > tol) continue;
      auto dist_at = [&](double t) {
        return point_segment_distance(a0 + (a1 - a0) * t, pb[j], pb[j + 1]);
      };
      // distance along the segment to a convex set is convex in t
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 100; ++it) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (dist_at(m1) <= dist_at(m2)) hi = m2;
        else lo = m1;
      }
      double t_min = (lo + hi) / 2.0;
      if (dist_at(t_min) > tol) continue;
      double t_hit = 0.0;
      if (dist_at(0.0) > tol) {
        double l = 0.0, h = t_min;
        for (int it = 0; it < 100; ++it) {
          double m = (l + h) / 2.0;
          (dist_at(m) > tol ? l : h) = m;
        }
        t_hit = h;
      }
      if (t_hit < best_t) {
        best_t = t_hit;
        best_j = j;
      }
    }

    if (best_t < std::numeric_limits<double>::infinity()) {
      Vec2 p = a0 + (a1 - a0) * best_t;
      Vec2 d = pb[best_j + 1] - pb[best_j];
      double u = std::clamp(dot(p - pb[best_j], d) / dot(d, d), 0.0, 1.0);
      return PolylineCrossing{ca[i] + best_t * seg_len,
                              cb[best_j] + u * (cb[best_j + 1] - cb[best_j]), p};
    }
  }
  return std::nullopt;
}

std::array<Vec2, 4> rect_corners(const OrientedRect& r) {
  Vec2 d{std::cos(r.heading), std::sin(r.heading)};
  Vec2 n = perp(d);
  Vec2 dl = d * (r.length / 2.0);
  Vec2 nw = n * (r.width / 2.0);
  return {r.center + dl + nw, r.center - dl + nw, r.center - dl - nw, r.center + dl - nw};
}

bool rect_overlap(const OrientedRect& a, const OrientedRect& b) {
  auto ca = rect_corners(a);
  auto cb = rect_corners(b);
  Vec2 axes[4] = {{std::cos(a.heading), std::sin(a.heading)},
                  {-std::sin(a.heading), std::cos(a.heading)},
                  {std::cos(b.heading), std::sin(b.heading)},
                  {-std::sin(b.heading), std::cos(b.heading)}};
  for (const Vec2& axis : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = amax;
    for (const Vec2& p : ca) {
      amin = std::min(amin, dot(p, axis));
      amax = std::max(amax, dot(p, axis));
    }
    for (const Vec2& p : cb) {
      bmin = std::min(bmin, dot(p, axis));
      bmax = std::max(bmax, dot(p, axis));
    }
    if (amax < bmin - 1e-12 || bmax < amin - 1e-12) return false;
  }
  return true;
}

double rect_gap(const OrientedRect& a, const OrientedRect& b) {
  if (rect_overlap(a, b)) return 0.0;
  auto ca = rect_corners(a);
  auto cb = rect_corners(b);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      best = std::min(best, segment_distance(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]));
  return best;
}

}  // namespace junctiongen
