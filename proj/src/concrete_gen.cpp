#include "junctiongen/concrete_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"
#include "junctiongen/errors.hpp"

namespace junctiongen {

using nlohmann::json;

const char* to_string(RegionClass c) {
  switch (c) {
    case RegionClass::Approach: return "approach";
    case RegionClass::InJunction: return "in_junction";
    case RegionClass::Exit: return "exit";
  }
  return "approach";
}

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::InitialOverlap: return "initial_overlap";
    case ViolationKind::ExternalPreCollision: return "external_pre_collision";
    case ViolationKind::PathTooShort: return "path_too_short";
  }
  return "initial_overlap";
}

double ego_start_distance_option(const std::string& name) {
  if (name == "close") return 15.0;
  if (name == "default") return 30.0;
  if (name == "medium") return 35.0;
  try {
    std::size_t used = 0;
    double v = std::stod(name, &used);
    if (used == name.size() && v >= 0.0) return v;
  } catch (...) {
  }
  throw ConfigError("bad ego start option: " + name);
}

RegionClass ConcretePath::class_at_arclength(double s) const {
  const auto& cum = line.arclengths();
  auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t idx = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
  return classes[std::min(idx, classes.size() - 1)];
}

namespace {

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

// A maneuver centerline split at the junction boundary: approach before,
// in-junction between, exit after.
struct ClassedLine {
  const Polyline* line = nullptr;
  double in_start = 0.0;
  double in_end = 0.0;

  RegionClass class_at(double s) const {
    if (s < in_start - 1e-9) return RegionClass::Approach;
    if (s <= in_end + 1e-9) return RegionClass::InJunction;
    return RegionClass::Exit;
  }
};

ClassedLine classify_line(const Polyline& line, const Polygon& bounds) {
  auto intervals = clip_intervals(line, bounds);
  if (intervals.size() != 1)
    throw DataError("maneuver path must cross the junction exactly once, got " +
                    std::to_string(intervals.size()) + " crossings");
  return {&line, intervals[0].first, intervals[0].second};
}

double classed_travel_time(const ClassedLine& cl, const SpeedProfile& pr, double s0, double s1) {
  if (s1 <= s0 + 1e-12) return 0.0;
  if (std::isinf(pr.accel)) {
    double knots[4] = {s0, std::clamp(cl.in_start, s0, s1), std::clamp(cl.in_end, s0, s1), s1};
    double t = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (knots[i + 1] <= knots[i]) continue;
      t += (knots[i + 1] - knots[i]) / pr.speed_for(cl.class_at((knots[i] + knots[i + 1]) / 2.0));
    }
    return t;
  }
  // finite acceleration: forward Euler at millisecond resolution
  double t = 0.0, s = s0, v = pr.speed_for(cl.class_at(s0));
  const double dt = 1e-3;
  while (s < s1) {
    double tgt = pr.speed_for(cl.class_at(s));
    v += std::clamp(tgt - v, -pr.accel * dt, pr.accel * dt);
    if (v < 1e-6) v = 1e-6;
    s += v * dt;
    t += dt;
  }
  return t - (s - s1) / v;
}

// Start offset from which the line reaches `target` in exactly `t_needed`
// seconds. Travel time shrinks as the start moves forward, so bisection.
double invert_start(const ClassedLine& cl, const SpeedProfile& pr, double target,
                    double t_needed) {
  double lo = 0.0, hi = target;
  for (int i = 0; i < 100; ++i) {
    double mid = (lo + hi) / 2.0;
    (classed_travel_time(cl, pr, mid, target) > t_needed ? lo : hi) = mid;
  }
  return (lo + hi) / 2.0;
}

std::vector<double> sample_arclengths(double from, double to_excl, double hard_end,
                                      double step) {
  std::vector<double> ss;
  double s = from;
  while (s < to_excl - 1e-9 && s < hard_end - 1e-9) {
    ss.push_back(s);
    s += step;
  }
  ss.push_back(std::min(s, hard_end));
  return ss;
}

ConcretePath sample_path(const std::string& mi_id, const ClassedLine& cl,
                         const SpeedProfile& profile, const std::vector<double>& svals) {
  ConcretePath path;
  path.mi_id = mi_id;
  path.profile = profile;
  std::vector<Vec2> pts;
  for (double s : svals) {
    pts.push_back(cl.line->point_at(s));
    path.classes.push_back(cl.class_at(s));
  }
  path.line = Polyline(std::move(pts));
  return path;
}

}  // namespace

ConcreteScenario derive_concrete_scenario(const RoadMap& map, const ManeuverCatalog& catalog,
                                          const OverlapTable& table,
                                          const LogicalScenario& logical,
                                          const std::vector<SpeedProfile>& profiles,
                                          const ConcretizeConfig& cfg, const std::string& id) {
  const std::size_t n = logical.assignment.size();
  if (n < 2) throw ConfigError("a scenario needs at least two actors");
  if (profiles.size() != 1 && profiles.size() != n)
    throw ConfigError("need one speed profile or one per actor");
  for (const SpeedProfile& pr : profiles)
    if (pr.in_junction_speed <= 0.0 || pr.out_speed <= 0.0 || pr.accel <= 0.0)
      throw ConfigError("speed profile values must be positive");
  auto profile_of = [&](std::size_t i) { return profiles.size() == 1 ? profiles[0] : profiles[i]; };

  const Junction& jn = map.junction(catalog.junction_id);

  std::map<std::string, PathRegion> regions;
  std::map<std::string, ClassedLine> classed;
  for (const std::string& mi_id : logical.assignment) {
    if (regions.count(mi_id)) continue;
    regions[mi_id] = extend_path_region(map, catalog.by_id(mi_id), cfg.max_extension);
    classed[mi_id] = classify_line(regions[mi_id].centerline, jn.bounds);
  }

  std::vector<std::size_t> cat_idx(n);
  for (std::size_t i = 0; i < n; ++i) cat_idx[i] = *catalog.index_of(logical.assignment[i]);

  ConcreteScenario out;
  out.id = id;
  out.junction_id = catalog.junction_id;
  out.assignment = logical.assignment;
  out.footprint = cfg.footprint;
  out.paths.resize(n);

  const ClassedLine& ego_cl = classed[logical.assignment[0]];
  const SpeedProfile ego_pr = profile_of(0);

  double ego_start = ego_cl.in_start - cfg.ego_start_distance;
  if (ego_start < 0.0) {
    out.notes.push_back(format("ego start clipped: wanted %.1f m of approach, path has %.1f m",
                               cfg.ego_start_distance, ego_cl.in_start));
    ego_start = 0.0;
  }
  out.paths[0] = sample_path(logical.assignment[0], ego_cl, ego_pr,
                             sample_arclengths(ego_start, ego_cl.in_end, ego_cl.line->length(),
                                               cfg.sample_step));

  // externals in the order their conflict zone appears along the ego route
  std::vector<std::size_t> order;
  for (std::size_t i = 1; i < n; ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double ea = table.entry_arclength(cat_idx[0], cat_idx[a]);
    double eb = table.entry_arclength(cat_idx[0], cat_idx[b]);
    if (ea != eb) return ea < eb;
    return logical.assignment[a] < logical.assignment[b];
  });

  double penalty = 0.0;
  for (std::size_t k : order) {
    const ClassedLine& ext_cl = classed[logical.assignment[k]];
    const SpeedProfile ext_pr = profile_of(k);
    const auto& comps = table.components(cat_idx[0], cat_idx[k]);

    // meeting point: first centerline contact inside the junction
    Polyline ego_in = ego_cl.line->slice(ego_cl.in_start, ego_cl.in_end);
    Polyline ext_in = ext_cl.line->slice(ext_cl.in_start, ext_cl.in_end);
    double ego_target, ext_target;
    Vec2 target;
    if (auto hit = first_polyline_crossing(ego_in, ext_in)) {
      ego_target = ego_cl.in_start + hit->s_a;
      ext_target = ext_cl.in_start + hit->s_b;
      target = hit->point;
    } else {
      // corridors overlap but the centerlines never touch; aim for the
      // middle of the external's first pass through the overlap
      double best_start = -1.0, best_end = -1.0;
      for (const Polygon& c : comps) {
        for (auto [a, b] : clip_intervals(*ext_cl.line, c)) {
          if (best_start < 0.0 || a < best_start) {
            best_start = a;
            best_end = b;
          }
        }
      }
      if (best_start < 0.0) throw DataError("no usable conflict zone for " + out.id);
      ext_target = (best_start + best_end) / 2.0;
      target = ext_cl.line->point_at(ext_target);
      ego_target = ego_cl.line->nearest_arclength(target);
      out.notes.push_back("external " + std::to_string(k) +
                          " targets the middle of its overlap pass");
    }

    double t_ego = classed_travel_time(ego_cl, ego_pr, ego_start, ego_target);
    double t_ext = t_ego + penalty;

    double available = classed_travel_time(ext_cl, ext_pr, 0.0, ext_target);
    double ext_start = 0.0;
    if (available + 1e-9 < t_ext) {
      Violation v;
      v.kind = ViolationKind::PathTooShort;
      v.actors = {static_cast<int>(k)};
      v.detail = format("needs %.2f s of approach, path provides %.2f s", t_ext, available);
      out.static_report.violations.push_back(v);
    } else {
      ext_start = invert_start(ext_cl, ext_pr, ext_target, t_ext);
    }

    // keep the path a little past the last exit from the conflict zone
    double zone_exit = ext_target;
    for (const Polygon& c : comps)
      for (auto [a, b] : clip_intervals(*ext_cl.line, c))
        if (a <= ext_target + 1e-6 && b >= zone_exit) zone_exit = b;
    double path_end = std::min(ext_cl.line->length(), zone_exit + cfg.forward_extension);

    out.paths[k] = sample_path(logical.assignment[k], ext_cl, ext_pr,
                               sample_arclengths(ext_start, path_end, path_end, cfg.sample_step));

    ConflictPlanEntry entry;
    entry.ext_index = static_cast<int>(k);
    entry.target = target;
    entry.ego_eta = t_ego;
    entry.ext_eta = classed_travel_time(ext_cl, ext_pr, ext_start, ext_target);
    entry.spawn_penalty = penalty;
    out.plan.push_back(entry);

    double traversal = 0.0;
    for (const Polygon& c : comps)
      for (auto [a, b] : clip_intervals(*ext_cl.line, c)) traversal += b - a;
    penalty += traversal / ext_pr.in_junction_speed + cfg.spawn_gap_time;
  }

  return out;
}

StaticReport static_check(const ConcreteScenario& scenario, double timestep) {
  if (timestep <= 0.0) throw ConfigError("timestep must be positive");
  StaticReport rep;
  for (const Violation& v : scenario.static_report.violations)
    if (v.kind == ViolationKind::PathTooShort) rep.violations.push_back(v);

  const std::size_t n = scenario.paths.size();
  auto rect_at = [&](const ConcretePath& p, double s) {
    OrientedRect r;
    r.center = p.line.point_at(s);
    r.heading = p.line.heading_at(s);
    r.length = scenario.footprint.length;
    r.width = scenario.footprint.width;
    return r;
  };

  std::set<std::pair<int, int>> flagged;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!rect_overlap(rect_at(scenario.paths[i], 0.0), rect_at(scenario.paths[j], 0.0)))
        continue;
      Violation v;
      v.kind = ViolationKind::InitialOverlap;
      v.actors = {static_cast<int>(i), static_cast<int>(j)};
      rep.violations.push_back(v);
      flagged.emplace(i, j);
    }
  }

  // replay externals up to the first planned meet; pre-collisions between
  // them would fire before the scenario gets a chance to play out
  if (!scenario.plan.empty() && n > 2) {
    double t_limit = scenario.plan[0].ext_eta;
    for (const ConflictPlanEntry& e : scenario.plan) t_limit = std::min(t_limit, e.ext_eta);
    std::vector<PathFollower> ext;
    ext.reserve(n - 1);
    for (std::size_t i = 1; i < n; ++i) ext.emplace_back(&scenario.paths[i]);
    for (double t = timestep; t < t_limit - 1e-9; t += timestep) {
      for (PathFollower& f : ext) f.step(timestep);
      for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (flagged.count({static_cast<int>(i), static_cast<int>(j)})) continue;
          OrientedRect ri{ext[i - 1].position(), ext[i - 1].heading(), scenario.footprint.length,
                          scenario.footprint.width};
          OrientedRect rj{ext[j - 1].position(), ext[j - 1].heading(), scenario.footprint.length,
                          scenario.footprint.width};
          if (!rect_overlap(ri, rj)) continue;
          Violation v;
          v.kind = ViolationKind::ExternalPreCollision;
          v.actors = {static_cast<int>(i), static_cast<int>(j)};
          v.detail = format("at t=%.2f s", t);
          rep.violations.push_back(v);
          flagged.emplace(i, j);
        }
      }
    }
  }

  std::stable_sort(rep.violations.begin(), rep.violations.end(),
                   [](const Violation& a, const Violation& b) {
                     if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                     return a.actors < b.actors;
                   });
  return rep;
}

double path_time(const ConcretePath& path) {
  const auto& cum = path.line.arclengths();
  const SpeedProfile& pr = path.profile;
  if (std::isinf(pr.accel)) {
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < cum.size(); ++i)
      t += (cum[i + 1] - cum[i]) / pr.speed_for(path.classes[i]);
    return t;
  }
  PathFollower f(&path);
  double t = 0.0;
  const double dt = 1e-3;
  while (!f.finished() && t < 3600.0) {
    f.step(dt);
    t += dt;
  }
  return t;
}

PathFollower::PathFollower(const ConcretePath* path) : path_(path) { reset(); }

void PathFollower::reset() {
  s_ = 0.0;
  v_ = path_->profile.speed_for(path_->classes.front());
}

bool PathFollower::finished() const { return s_ >= path_->line.length() - 1e-9; }

void PathFollower::step(double dt) {
  const SpeedProfile& pr = path_->profile;
  const auto& cum = path_->line.arclengths();
  if (std::isinf(pr.accel)) {
    while (dt > 1e-15 && !finished()) {
      auto it = std::upper_bound(cum.begin(), cum.end(), s_);
      std::size_t i = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
      i = std::min(i, cum.size() - 2);
      double speed = pr.speed_for(path_->classes[i]);
      double room = cum[i + 1] - s_;
      if (room / speed >= dt) {
        s_ += speed * dt;
        v_ = speed;
        dt = 0.0;
      } else {
        s_ = cum[i + 1];
        dt -= room / speed;
        v_ = speed;
      }
    }
  } else {
    double tgt = pr.speed_for(path_->class_at_arclength(s_));
    v_ += std::clamp(tgt - v_, -pr.accel * dt, pr.accel * dt);
    s_ = std::min(s_ + v_ * dt, path_->line.length());
  }
  if (finished()) {
    s_ = path_->line.length();
    v_ = 0.0;
  }
}

void PathFollower::step_at(double dt, double v) {
  s_ = std::min(s_ + v * dt, path_->line.length());
  v_ = v;
  if (finished()) {
    s_ = path_->line.length();
    v_ = 0.0;
  }
}

namespace {

RegionClass region_class_from_string(const std::string& s) {
  if (s == "approach") return RegionClass::Approach;
  if (s == "in_junction") return RegionClass::InJunction;
  if (s == "exit") return RegionClass::Exit;
  throw DataError("unknown region class: " + s);
}

ViolationKind violation_kind_from_string(const std::string& s) {
  if (s == "initial_overlap") return ViolationKind::InitialOverlap;
  if (s == "external_pre_collision") return ViolationKind::ExternalPreCollision;
  if (s == "path_too_short") return ViolationKind::PathTooShort;
  throw DataError("unknown violation kind: " + s);
}

}  // namespace

std::string to_json_text(const ConcreteScenario& sc) {
  json doc;
  doc["id"] = sc.id;
  doc["junction"] = sc.junction_id;
  doc["assignment"] = sc.assignment;
  doc["footprint"] = {{"length", sc.footprint.length}, {"width", sc.footprint.width}};
  doc["paths"] = json::array();
  for (const ConcretePath& p : sc.paths) {
    json jp;
    jp["mi"] = p.mi_id;
    jp["points"] = json::array();
    for (const Vec2& v : p.line.points()) jp["points"].push_back({v.x, v.y});
    jp["classes"] = json::array();
    for (RegionClass c : p.classes) jp["classes"].push_back(to_string(c));
    jp["profile"] = {{"in_junction", p.profile.in_junction_speed},
                     {"out", p.profile.out_speed},
                     {"accel", std::isinf(p.profile.accel) ? json() : json(p.profile.accel)}};
    doc["paths"].push_back(std::move(jp));
  }
  doc["plan"] = json::array();
  for (const ConflictPlanEntry& e : sc.plan)
    doc["plan"].push_back({{"ext_index", e.ext_index},
                           {"target", {e.target.x, e.target.y}},
                           {"ego_eta", e.ego_eta},
                           {"ext_eta", e.ext_eta},
                           {"spawn_penalty", e.spawn_penalty}});
  doc["notes"] = sc.notes;
  json jv = json::array();
  for (const Violation& v : sc.static_report.violations)
    jv.push_back({{"kind", to_string(v.kind)}, {"actors", v.actors}, {"detail", v.detail}});
  doc["static_report"] = {{"feasible", sc.static_report.feasible()}, {"violations", jv}};
  return doc.dump(1);
}

ConcreteScenario concrete_from_json_text(const std::string& text) {
  try {
    json doc = json::parse(text);
    ConcreteScenario sc;
    sc.id = doc.at("id").get<std::string>();
    sc.junction_id = doc.at("junction").get<std::string>();
    for (const auto& a : doc.at("assignment")) sc.assignment.push_back(a.get<std::string>());
    sc.footprint.length = doc.at("footprint").at("length").get<double>();
    sc.footprint.width = doc.at("footprint").at("width").get<double>();
    for (const auto& jp : doc.at("paths")) {
      ConcretePath p;
      p.mi_id = jp.at("mi").get<std::string>();
      std::vector<Vec2> pts;
      for (const auto& v : jp.at("points")) pts.push_back({v[0].get<double>(), v[1].get<double>()});
      p.line = Polyline(std::move(pts));
      for (const auto& c : jp.at("classes"))
        p.classes.push_back(region_class_from_string(c.get<std::string>()));
      if (p.classes.size() != p.line.points().size())
        throw DataError("path classes do not match its points");
      p.profile.in_junction_speed = jp.at("profile").at("in_junction").get<double>();
      p.profile.out_speed = jp.at("profile").at("out").get<double>();
      const auto& acc = jp.at("profile").at("accel");
      p.profile.accel = acc.is_null() ? std::numeric_limits<double>::infinity() : acc.get<double>();
      sc.paths.push_back(std::move(p));
    }
    for (const auto& je : doc.at("plan")) {
      ConflictPlanEntry e;
      e.ext_index = je.at("ext_index").get<int>();
      e.target = {je.at("target")[0].get<double>(), je.at("target")[1].get<double>()};
      e.ego_eta = je.at("ego_eta").get<double>();
      e.ext_eta = je.at("ext_eta").get<double>();
      e.spawn_penalty = je.at("spawn_penalty").get<double>();
      sc.plan.push_back(e);
    }
    for (const auto& note : doc.value("notes", json::array()))
      sc.notes.push_back(note.get<std::string>());
    for (const auto& jv : doc.at("static_report").at("violations")) {
      Violation v;
      v.kind = violation_kind_from_string(jv.at("kind").get<std::string>());
      for (const auto& a : jv.at("actors")) v.actors.push_back(a.get<int>());
      v.detail = jv.value("detail", "");
      sc.static_report.violations.push_back(v);
    }
    return sc;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad concrete scenario file: ") + e.what());
  }
}

}  // namespace junctiongen
