#pragma once

#include <string>
#include <vector>

#include "junctiongen/geometry.hpp"
#include "junctiongen/road_model.hpp"

namespace junctiongen {

/// Pairwise overlap data between the in-junction corridors of a catalog's
/// maneuver instances. Indices follow catalog order.
class OverlapTable {
 public:
  OverlapTable(const ManeuverCatalog& catalog, double area_threshold);

  std::size_t size() const { return n_; }
  double area_threshold() const { return threshold_; }

  double area(std::size_t i, std::size_t j) const;
  bool dangerous(std::size_t i, std::size_t j) const;

  /// Arc length along instance i's connector centerline at which that
  /// centerline first enters the overlap with instance j.
  double entry_arclength(std::size_t i, std::size_t j) const;

  const std::vector<Polygon>& components(std::size_t i, std::size_t j) const;
  const Polygon& corridor(std::size_t i) const { return corridors_[i]; }

 private:
  std::size_t n_;
  double threshold_;
  std::vector<Polygon> corridors_;
  struct Cell {
    double area = 0.0;
    double entry = -1.0;
    bool dangerous = false;
    std::vector<Polygon> components;
  };
  std::vector<Cell> cells_;
  const Cell& cell(std::size_t i, std::size_t j) const;
};

struct OverlapSummary {
  int ext_index = 0;  // position in the assignment, 1-based
  double area_m2 = 0.0;
  double ego_entry_arclength_m = 0.0;
};

/// Actors mapped to maneuver instances: index 0 is the ego, the rest are
/// externals. Every external's corridor overlaps the ego's.
struct LogicalScenario {
  std::vector<std::string> assignment;
  std::vector<OverlapSummary> overlaps;
};

struct LogicalScenarioSet {
  std::string junction_id;
  int n_actors = 0;
  bool symmetry_reduced = false;
  std::string catalog_hash;
  std::vector<LogicalScenario> scenarios;
};

/// All assignments of n_actors actors where each external conflicts with the
/// ego. Output order is lexicographic in the assignment ids; repeats are
/// allowed, including externals sharing the ego's instance.
LogicalScenarioSet find_logical_scenarios(const ManeuverCatalog& catalog,
                                          const OverlapTable& table, int n_actors);

LogicalScenarioSet find_logical_scenarios(const ManeuverCatalog& catalog, int n_actors,
                                          double area_threshold);

/// Drops scenarios whose externals are not sorted by instance id, keeping one
/// representative per multiset of externals. Idempotent.
LogicalScenarioSet reduce_symmetries(const LogicalScenarioSet& set);

std::string to_json_text(const LogicalScenarioSet& set);
LogicalScenarioSet logical_set_from_json_text(const std::string& text);

}  // namespace junctiongen
