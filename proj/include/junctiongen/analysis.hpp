#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "junctiongen/geometry.hpp"
#include "junctiongen/road_model.hpp"
#include "junctiongen/sim_harness.hpp"

namespace junctiongen {

enum class Outcome { Collision, NearMiss, NoIncident };

const char* to_string(Outcome o);

/// Collision beats near miss beats nothing.
Outcome classify_outcome(const SimTrace& trace);

enum class Avoidability { Avoidable, Unavoidable, NotApplicable };

const char* to_string(Avoidability a);

/// A collision is avoidable when the colliding external was visible to both
/// sensors in at least 90 percent of the window_frames frames before impact.
/// Shorter traces use what they have. Non-collisions are NotApplicable.
Avoidability assess_avoidability(const SimTrace& trace, int window_frames = 60);

/// Ego positions as a chain, consecutive duplicates removed.
Polyline ego_track(const SimTrace& trace);

/// Symmetric point-set Hausdorff distance between two chains after
/// resampling both at step.
double hausdorff_distance(const Polyline& a, const Polyline& b, double step = 0.5);

/// Index of the path minimizing the summed Hausdorff distance to the others.
/// Ties go to the lowest index.
std::size_t medoid_index(const std::vector<Polyline>& paths, double step = 0.5);

struct PreventiveManeuver {
  bool detected = false;
  int ref_index = -1;  // reference point skipped to
};

/// Compares the trace against an unobstructed reference path. Each frame is
/// assigned to its nearest reference point; a dwell count jumping by at
/// least min_jump over its predecessor marks a braking or stopping
/// deviation. Dwell at the final reference point is ignored, every run
/// parks there.
PreventiveManeuver detect_preventive_maneuver(const SimTrace& trace, const Polyline& reference,
                                              int min_jump = 5, double step = 0.5);

struct RunRecord {
  std::string scenario_id;
  std::string policy;
  std::uint64_t seed = 0;
  int n_actors = 0;
  std::string ego_mi;
  ManeuverType ego_maneuver = ManeuverType::GoStraight;
  Outcome outcome = Outcome::NoIncident;
  Avoidability avoidability = Avoidability::NotApplicable;
  bool preventive_maneuver = false;
};

enum class GroupScheme { ByActors, ByManeuverType, ByManeuverInstance };

const char* to_string(GroupScheme s);
GroupScheme group_scheme_from_string(const std::string& s);

struct AggregateRow {
  std::string key;
  long long collisions = 0;
  long long near_misses = 0;
  long long no_incident = 0;
  long long preventive = 0;
  long long total = 0;
  long long excluded = 0;  // unavoidable collisions, not in the other counts
};

/// Groups records by the scheme, dropping unavoidable collisions from the
/// counts (tracked in excluded). Rows are sorted by key.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records, GroupScheme scheme);

struct GroupComparison {
  std::string group_a;
  std::string group_b;
  std::string metric;  // "incident" or "preventive"
  long long a_pos = 0, a_neg = 0, b_pos = 0, b_neg = 0;
  double p_value = 1.0;
  double odds = 1.0;
};

/// Pairwise 2x2 tests between rows: incident (collision or near miss) vs
/// clean, and preventive maneuver vs not.
std::vector<GroupComparison> compare_groups(const std::vector<AggregateRow>& rows);

/// Two-sided Fisher exact test on [[a, b], [c, d]], summing every table at
/// most as probable as the observed one.
double fisher_exact_p(long long a, long long b, long long c, long long d);

/// Odds ratio with the half-unit correction applied when any cell is zero.
double odds_ratio(long long a, long long b, long long c, long long d);

}  // namespace junctiongen
