#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "junctiongen/geometry.hpp"

namespace junctiongen {

enum class LaneKind { Incoming, Outgoing, Connector, Plain };

const char* to_string(LaneKind k);
LaneKind lane_kind_from_string(const std::string& s);

struct Lane {
  std::string id;
  LaneKind kind = LaneKind::Plain;
  double width = 3.5;
  Polyline centerline{std::vector<Vec2>{{0, 0}, {1, 0}}};
  std::vector<std::string> predecessors;
  std::vector<std::string> successors;
};

struct Junction {
  std::string id;
  std::vector<std::string> connectors;
  Polygon bounds{std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}}};
};

/// In-memory road map. Lane ids are unique; connectivity is validated on
/// load (referenced ids exist, connector endpoints join their neighbours).
class RoadMap {
 public:
  RoadMap(std::string name, std::vector<Lane> lanes, std::vector<Junction> junctions);

  static RoadMap load_file(const std::string& path);
  static RoadMap load_json_text(const std::string& text);

  const std::string& name() const { return name_; }
  const std::vector<Lane>& lanes() const { return lanes_; }
  const std::vector<Junction>& junctions() const { return junctions_; }

  const Lane& lane(const std::string& id) const;
  bool has_lane(const std::string& id) const;
  const Junction& junction(const std::string& id) const;

 private:
  std::string name_;
  std::vector<Lane> lanes_;
  std::vector<Junction> junctions_;
  std::map<std::string, std::size_t> lane_index_;
  void validate() const;
};

enum class ManeuverType { GoStraight, TurnLeft, TurnRight };

const char* to_string(ManeuverType m);

/// One way of driving through a junction: a connector lane plus the lanes it
/// joins. The id is the connector's id.
struct ManeuverInstance {
  std::string id;
  std::string junction_id;
  std::string start_lane;
  std::string end_lane;
  ManeuverType maneuver = ManeuverType::GoStraight;
  double width = 3.5;
  Polyline connector_centerline{std::vector<Vec2>{{0, 0}, {1, 0}}};
};

struct ManeuverCatalog {
  std::string junction_id;
  std::vector<ManeuverInstance> instances;  // sorted by id

  const ManeuverInstance& by_id(const std::string& id) const;
  std::optional<std::size_t> index_of(const std::string& id) const;
};

/// Straight / left / right from the net tangent rotation between the ends
/// of the chain.
ManeuverType classify_maneuver(const Polyline& connector);

/// All maneuver instances of one junction, sorted by id. Duplicate
/// (start lane, end lane) pairs are rejected.
ManeuverCatalog enumerate_maneuvers(const RoadMap& map, const std::string& junction_id);

/// Content hash of a catalog, stable across runs and platforms.
std::string catalog_hash(const ManeuverCatalog& catalog);

/// A maneuver's full drivable extent: the connector extended backward and
/// forward through unique-continuation lanes, up to max_extension meters of
/// lane on each side.
struct PathRegion {
  Polyline centerline{std::vector<Vec2>{{0, 0}, {1, 0}}};
  double connector_start_s = 0.0;  // arc length where the connector begins
  double connector_end_s = 0.0;    // arc length where the connector ends
  Polygon corridor{std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}}};
  double width = 3.5;
};

PathRegion extend_path_region(const RoadMap& map, const ManeuverInstance& mi,
                              double max_extension);

}  // namespace junctiongen
