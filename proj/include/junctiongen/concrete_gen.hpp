#pragma once

#include <limits>
#include <string>
#include <vector>

#include "junctiongen/geometry.hpp"
#include "junctiongen/logical_gen.hpp"
#include "junctiongen/road_model.hpp"

namespace junctiongen {

enum class RegionClass { Approach, InJunction, Exit };

const char* to_string(RegionClass c);

/// Target speeds by region class. accel is a magnitude in m/s^2; infinity
/// means speed changes take effect instantly.
struct SpeedProfile {
  double in_junction_speed = 3.0;
  double out_speed = 4.0;
  double accel = std::numeric_limits<double>::infinity();

  double speed_for(RegionClass c) const {
    return c == RegionClass::InJunction ? in_junction_speed : out_speed;
  }
};

/// Sampled path for one actor. Points are sample_step apart except the last
/// step, which may be shorter. classes[i] applies to the segment leaving
/// point i.
struct ConcretePath {
  std::string mi_id;
  Polyline line{std::vector<Vec2>{{0, 0}, {1, 0}}};
  std::vector<RegionClass> classes;
  SpeedProfile profile;

  RegionClass class_at_arclength(double s) const;
};

/// Where and when an external is meant to meet the ego if neither reacts.
struct ConflictPlanEntry {
  int ext_index = 0;  // actor index, 1-based
  Vec2 target;
  double ego_eta = 0.0;
  double ext_eta = 0.0;
  double spawn_penalty = 0.0;
};

enum class ViolationKind { InitialOverlap, ExternalPreCollision, PathTooShort };

const char* to_string(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::InitialOverlap;
  std::vector<int> actors;
  std::string detail;
};

struct StaticReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

struct FootprintSpec {
  double length = 4.7;
  double width = 2.0;
};

struct ConcreteScenario {
  std::string id;
  std::string junction_id;
  std::vector<std::string> assignment;
  std::vector<ConcretePath> paths;  // index 0 is the ego
  std::vector<ConflictPlanEntry> plan;
  FootprintSpec footprint;
  std::vector<std::string> notes;
  StaticReport static_report;
};

struct ConcretizeConfig {
  double ego_start_distance = 30.0;  // meters before the junction entry
  double sample_step = 0.5;
  double forward_extension = 20.0;  // meters of path kept past the conflict zone
  double max_extension = 60.0;
  double area_threshold = 0.1;
  double spawn_gap_time = 1.0;  // per earlier external, seconds
  FootprintSpec footprint;
};

/// Maps the named start options to distances: close 15 m, default 30 m,
/// medium 35 m.
double ego_start_distance_option(const std::string& name);

/// Builds exact collision-inducing paths for one logical scenario. Externals
/// are ordered by where their conflict zone begins along the ego path, and
/// each is timed to reach its target the moment the ego does, offset by the
/// spawn penalty of the externals placed before it.
ConcreteScenario derive_concrete_scenario(const RoadMap& map, const ManeuverCatalog& catalog,
                                          const OverlapTable& table,
                                          const LogicalScenario& logical,
                                          const std::vector<SpeedProfile>& profiles,
                                          const ConcretizeConfig& cfg, const std::string& id);

/// Start-pose footprint overlaps plus an oblivious replay that catches
/// external pairs colliding before any of them reaches its target.
StaticReport static_check(const ConcreteScenario& scenario, double timestep = 0.05);

/// Time to drive the whole path under its speed profile.
double path_time(const ConcretePath& path);

/// Advances along a sampled path under its speed profile. Stepping is exact
/// across class changes when accel is infinite.
class PathFollower {
 public:
  explicit PathFollower(const ConcretePath* path);

  void reset();
  double s() const { return s_; }
  double speed() const { return v_; }
  Vec2 position() const { return path_->line.point_at(s_); }
  double heading() const { return path_->line.heading_at(s_); }
  bool finished() const;
  double target_speed() const { return path_->profile.speed_for(path_->class_at_arclength(s_)); }

  void step(double dt);
  void step_at(double dt, double v);

 private:
  const ConcretePath* path_;
  double s_ = 0.0;
  double v_ = 0.0;
};

std::string to_json_text(const ConcreteScenario& scenario);
ConcreteScenario concrete_from_json_text(const std::string& text);

}  // namespace junctiongen
