#include "junctiongen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "junctiongen/errors.hpp"

namespace junctiongen {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Collision: return "collision";
    case Outcome::NearMiss: return "near_miss";
    case Outcome::NoIncident: return "no_incident";
  }
  return "no_incident";
}

const char* to_string(Avoidability a) {
  switch (a) {
    case Avoidability::Avoidable: return "avoidable";
    case Avoidability::Unavoidable: return "unavoidable";
    case Avoidability::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

const char* to_string(GroupScheme s) {
  switch (s) {
    case GroupScheme::ByActors: return "actors";
    case GroupScheme::ByManeuverType: return "maneuver_type";
    case GroupScheme::ByManeuverInstance: return "maneuver_instance";
  }
  return "actors";
}

GroupScheme group_scheme_from_string(const std::string& s) {
  if (s == "actors") return GroupScheme::ByActors;
  if (s == "maneuver_type") return GroupScheme::ByManeuverType;
  if (s == "maneuver_instance") return GroupScheme::ByManeuverInstance;
  throw ConfigError("unknown grouping scheme: " + s);
}

Outcome classify_outcome(const SimTrace& trace) {
  bool near_miss = false;
  for (const Event& e : trace.events) {
    if (e.kind == EventKind::Collision) return Outcome::Collision;
    if (e.kind == EventKind::NearMiss) near_miss = true;
  }
  return near_miss ? Outcome::NearMiss : Outcome::NoIncident;
}

Avoidability assess_avoidability(const SimTrace& trace, int window_frames) {
  const Event* collision = nullptr;
  for (const Event& e : trace.events)
    if (e.kind == EventKind::Collision) {
      collision = &e;
      break;
    }
  if (!collision) return Avoidability::NotApplicable;

  std::size_t impact = trace.frames.size();
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    if (std::abs(trace.frames[i].t - collision->t) < trace.header.timestep / 2.0) {
      impact = i;
      break;
    }
  }
  if (impact == trace.frames.size()) throw DataError("collision event outside the trace");

  std::size_t begin = impact > static_cast<std::size_t>(window_frames)
                          ? impact - static_cast<std::size_t>(window_frames)
                          : 0;
  long long window = static_cast<long long>(impact - begin);
  if (window == 0) return Avoidability::Unavoidable;

  long long seen = 0;
  std::size_t ext = static_cast<std::size_t>(collision->actor) - 1;
  for (std::size_t i = begin; i < impact; ++i) {
    const Detection& d = trace.frames[i].detections.at(ext);
    if (d.camera && d.lidar) ++seen;
  }
  return 10 * seen >= 9 * window ? Avoidability::Avoidable : Avoidability::Unavoidable;
}

Polyline ego_track(const SimTrace& trace) {
  std::vector<Vec2> pts;
  for (const Frame& f : trace.frames) {
    Vec2 p{f.actors.at(0).x, f.actors.at(0).y};
    if (pts.empty() || distance(pts.back(), p) > 1e-9) pts.push_back(p);
  }
  if (pts.size() < 2) throw DataError("ego never moved; no track to analyze");
  return Polyline(std::move(pts));
}

namespace {

double directed_hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double worst = 0.0;
  for (const Vec2& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : b) best = std::min(best, distance(p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const Polyline& a, const Polyline& b, double step) {
  auto pa = a.resampled(step).points();
  auto pb = b.resampled(step).points();
  return std::max(directed_hausdorff(pa, pb), directed_hausdorff(pb, pa));
}

std::size_t medoid_index(const std::vector<Polyline>& paths, double step) {
  if (paths.empty()) throw ConfigError("medoid of an empty set");
  std::vector<std::vector<Vec2>> pts;
  pts.reserve(paths.size());
  for (const Polyline& p : paths) pts.push_back(p.resampled(step).points());

  std::vector<double> total(paths.size(), 0.0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      double d = std::max(directed_hausdorff(pts[i], pts[j]), directed_hausdorff(pts[j], pts[i]));
      total[i] += d;
      total[j] += d;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < paths.size(); ++i)
    if (total[i] < total[best]) best = i;
  return best;
}

PreventiveManeuver detect_preventive_maneuver(const SimTrace& trace, const Polyline& reference,
                                              int min_jump, double step) {
  Polyline ref = reference.resampled(step);
  const auto& rp = ref.points();
  std::vector<long long> counts(rp.size(), 0);
  for (const Frame& f : trace.frames) {
    Vec2 p{f.actors.at(0).x, f.actors.at(0).y};
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rp.size(); ++i) {
      double d = distance(p, rp[i]);
      if (d < best - 1e-12) {
        best = d;
        nearest = i;
      }
    }
    ++counts[nearest];
  }
  for (std::size_t i = 0; i + 1 < counts.size(); ++i) {
    long long prev = i == 0 ? 0 : counts[i - 1];
    if (counts[i] - prev >= min_jump)
      return {true, static_cast<int>(i)};
  }
  return {false, -1};
}

namespace {

std::string group_key(const RunRecord& r, GroupScheme scheme) {
  switch (scheme) {
    case GroupScheme::ByActors: return "n=" + std::to_string(r.n_actors);
    case GroupScheme::ByManeuverType: return to_string(r.ego_maneuver);
    case GroupScheme::ByManeuverInstance: return r.ego_mi;
  }
  return "";
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records, GroupScheme scheme) {
  std::map<std::string, AggregateRow> rows;
  for (const RunRecord& r : records) {
    AggregateRow& row = rows[group_key(r, scheme)];
    if (r.outcome == Outcome::Collision && r.avoidability == Avoidability::Unavoidable) {
      ++row.excluded;
      continue;
    }
    ++row.total;
    if (r.outcome == Outcome::Collision) ++row.collisions;
    else if (r.outcome == Outcome::NearMiss) ++row.near_misses;
    else ++row.no_incident;
    if (r.preventive_maneuver) ++row.preventive;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, row] : rows) {
    row.key = key;
    out.push_back(row);
  }
  return out;
}

std::vector<GroupComparison> compare_groups(const std::vector<AggregateRow>& rows) {
  std::vector<GroupComparison> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      GroupComparison inc;
      inc.group_a = rows[i].key;
      inc.group_b = rows[j].key;
      inc.metric = "incident";
      inc.a_pos = rows[i].collisions + rows[i].near_misses;
      inc.a_neg = rows[i].no_incident;
      inc.b_pos = rows[j].collisions + rows[j].near_misses;
      inc.b_neg = rows[j].no_incident;
      inc.p_value = fisher_exact_p(inc.a_pos, inc.a_neg, inc.b_pos, inc.b_neg);
      inc.odds = odds_ratio(inc.a_pos, inc.a_neg, inc.b_pos, inc.b_neg);
      out.push_back(inc);

      GroupComparison pm;
      pm.group_a = rows[i].key;
      pm.group_b = rows[j].key;
      pm.metric = "preventive";
      pm.a_pos = rows[i].preventive;
      pm.a_neg = rows[i].total - rows[i].preventive;
      pm.b_pos = rows[j].preventive;
      pm.b_neg = rows[j].total - rows[j].preventive;
      pm.p_value = fisher_exact_p(pm.a_pos, pm.a_neg, pm.b_pos, pm.b_neg);
      pm.odds = odds_ratio(pm.a_pos, pm.a_neg, pm.b_pos, pm.b_neg);
      out.push_back(pm);
    }
  }
  return out;
}

double fisher_exact_p(long long a, long long b, long long c, long long d) {
  if (a < 0 || b < 0 || c < 0 || d < 0) throw ConfigError("table cells must be non-negative");
  long long r1 = a + b, r2 = c + d, c1 = a + c;
  long long n = r1 + r2;
  if (n == 0 || r1 == 0 || r2 == 0 || c1 == 0 || c1 == n) return 1.0;

  auto lchoose = [](long long nn, long long kk) {
    return std::lgamma(static_cast<double>(nn) + 1.0) -
           std::lgamma(static_cast<double>(kk) + 1.0) -
           std::lgamma(static_cast<double>(nn - kk) + 1.0);
  };
  double denom = lchoose(n, c1);
  auto logp = [&](long long k) { return lchoose(r1, k) + lchoose(r2, c1 - k) - denom; };

  double lp_obs = logp(a);
  long long kmin = std::max(0LL, c1 - r2);
  long long kmax = std::min(r1, c1);
  double total = 0.0;
  // tables no more probable than the observed one, with float slack for ties
  for (long long k = kmin; k <= kmax; ++k) {
    double lp = logp(k);
    if (lp <= lp_obs + 1e-7) total += std::exp(lp);
  }
  return std::min(1.0, total);
}

double odds_ratio(long long a, long long b, long long c, long long d) {
  if (a < 0 || b < 0 || c < 0 || d < 0) throw ConfigError("table cells must be non-negative");
  double aa = a, bb = b, cc = c, dd = d;
  if (a == 0 || b == 0 || c == 0 || d == 0) {
    aa += 0.5;
    bb += 0.5;
    cc += 0.5;
    dd += 0.5;
  }
  return (aa * dd) / (bb * cc);
}

}  // namespace junctiongen
