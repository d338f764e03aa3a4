#include "junctiongen/road_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "junctiongen/errors.hpp"
#include "junctiongen/hashutil.hpp"

namespace junctiongen {

using nlohmann::json;

const char* to_string(LaneKind k) {
  switch (k) {
    case LaneKind::Incoming: return "incoming";
    case LaneKind::Outgoing: return "outgoing";
    case LaneKind::Connector: return "connector";
    case LaneKind::Plain: return "plain";
  }
  return "plain";
}

LaneKind lane_kind_from_string(const std::string& s) {
  if (s == "incoming") return LaneKind::Incoming;
  if (s == "outgoing") return LaneKind::Outgoing;
  if (s == "connector") return LaneKind::Connector;
  if (s == "plain") return LaneKind::Plain;
  throw DataError("unknown lane kind: " + s);
}

const char* to_string(ManeuverType m) {
  switch (m) {
    case ManeuverType::GoStraight: return "go_straight";
    case ManeuverType::TurnLeft: return "turn_left";
    case ManeuverType::TurnRight: return "turn_right";
  }
  return "go_straight";
}

RoadMap::RoadMap(std::string name, std::vector<Lane> lanes, std::vector<Junction> junctions)
    : name_(std::move(name)), lanes_(std::move(lanes)), junctions_(std::move(junctions)) {
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    if (!lane_index_.emplace(lanes_[i].id, i).second)
      throw DataError("duplicate lane id: " + lanes_[i].id);
  }
  validate();
}

const Lane& RoadMap::lane(const std::string& id) const {
  auto it = lane_index_.find(id);
  if (it == lane_index_.end()) throw DataError("unknown lane: " + id);
  return lanes_[it->second];
}

bool RoadMap::has_lane(const std::string& id) const { return lane_index_.count(id) > 0; }

const Junction& RoadMap::junction(const std::string& id) const {
  for (const Junction& j : junctions_)
    if (j.id == id) return j;
  throw ConfigError("unknown junction: " + id);
}

void RoadMap::validate() const {
  for (const Lane& l : lanes_) {
    for (const std::string& p : l.predecessors) {
      if (!has_lane(p)) throw DataError("lane " + l.id + " references missing lane " + p);
      const auto& succ = lane(p).successors;
      if (std::find(succ.begin(), succ.end(), l.id) == succ.end())
        throw DataError("lane link " + p + " -> " + l.id + " is one-sided");
    }
    for (const std::string& s : l.successors) {
      if (!has_lane(s)) throw DataError("lane " + l.id + " references missing lane " + s);
      const auto& pred = lane(s).predecessors;
      if (std::find(pred.begin(), pred.end(), l.id) == pred.end())
        throw DataError("lane link " + l.id + " -> " + s + " is one-sided");
    }
    if (l.width <= 0.0) throw DataError("lane " + l.id + " has non-positive width");
  }
  for (const Junction& j : junctions_) {
    for (const std::string& cid : j.connectors) {
      if (!has_lane(cid)) throw DataError("junction " + j.id + " lists missing lane " + cid);
      const Lane& c = lane(cid);
      if (c.kind != LaneKind::Connector)
        throw DataError("junction " + j.id + " lists non-connector lane " + cid);
      if (c.predecessors.size() != 1 || c.successors.size() != 1)
        throw DataError("connector " + cid + " must join exactly one lane to one lane");
      const Lane& in = lane(c.predecessors[0]);
      const Lane& out = lane(c.successors[0]);
      if (distance(in.centerline.points().back(), c.centerline.points().front()) > 1e-6)
        throw DataError("connector " + cid + " does not start where " + in.id + " ends");
      if (distance(c.centerline.points().back(), out.centerline.points().front()) > 1e-6)
        throw DataError("connector " + cid + " does not end where " + out.id + " starts");
    }
  }
}

namespace {

Polyline centerline_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.size() < 2)
    throw DataError(what + ": centerline needs at least two points");
  std::vector<Vec2> pts;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw DataError(what + ": centerline points must be [x, y] numbers");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return Polyline(std::move(pts));
}

std::vector<std::string> string_list(const json& j) {
  std::vector<std::string> out;
  if (j.is_null()) return out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

RoadMap RoadMap::load_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("map is not valid JSON: ") + e.what());
  }
  try {
    std::string name = doc.value("meta", json::object()).value("name", "unnamed");
    std::vector<Lane> lanes;
    for (const auto& jl : doc.at("lanes")) {
      Lane l;
      l.id = jl.at("id").get<std::string>();
      l.kind = lane_kind_from_string(jl.value("kind", "plain"));
      l.width = jl.value("width", 3.5);
      l.centerline = centerline_from_json(jl.at("centerline"), "lane " + l.id);
      l.predecessors = string_list(jl.value("predecessors", json::array()));
      l.successors = string_list(jl.value("successors", json::array()));
      lanes.push_back(std::move(l));
    }
    std::vector<Junction> junctions;
    for (const auto& jj : doc.at("junctions")) {
      Junction j;
      j.id = jj.at("id").get<std::string>();
      j.connectors = string_list(jj.value("connectors", json::array()));
      std::vector<Vec2> ring;
      for (const auto& p : jj.at("bounds")) ring.push_back({p[0].get<double>(), p[1].get<double>()});
      j.bounds = Polygon(std::move(ring));
      junctions.push_back(std::move(j));
    }
    return RoadMap(std::move(name), std::move(lanes), std::move(junctions));
  } catch (const json::exception& e) {
    throw DataError(std::string("map schema error: ") + e.what());
  }
}

RoadMap RoadMap::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read map file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_json_text(ss.str());
}

const ManeuverInstance& ManeuverCatalog::by_id(const std::string& id) const {
  auto idx = index_of(id);
  if (!idx) throw DataError("unknown maneuver instance: " + id);
  return instances[*idx];
}

std::optional<std::size_t> ManeuverCatalog::index_of(const std::string& id) const {
  auto it = std::lower_bound(instances.begin(), instances.end(), id,
                             [](const ManeuverInstance& m, const std::string& s) { return m.id < s; });
  if (it == instances.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - instances.begin());
}

ManeuverType classify_maneuver(const Polyline& connector) {
  double turn = normalize_angle(connector.heading_at(connector.length()) - connector.heading_at(0.0));
  if (std::abs(turn) < M_PI / 4.0) return ManeuverType::GoStraight;
  return turn > 0.0 ? ManeuverType::TurnLeft : ManeuverType::TurnRight;
}

ManeuverCatalog enumerate_maneuvers(const RoadMap& map, const std::string& junction_id) {
  const Junction& j = map.junction(junction_id);
  ManeuverCatalog catalog;
  catalog.junction_id = junction_id;
  for (const std::string& cid : j.connectors) {
    const Lane& c = map.lane(cid);
    ManeuverInstance mi;
    mi.id = c.id;
    mi.junction_id = junction_id;
    mi.start_lane = c.predecessors[0];
    mi.end_lane = c.successors[0];
    mi.maneuver = classify_maneuver(c.centerline);
    mi.width = c.width;
    mi.connector_centerline = c.centerline;
    catalog.instances.push_back(std::move(mi));
  }
  std::sort(catalog.instances.begin(), catalog.instances.end(),
            [](const ManeuverInstance& a, const ManeuverInstance& b) { return a.id < b.id; });
  std::set<std::pair<std::string, std::string>> ends;
  for (const ManeuverInstance& mi : catalog.instances) {
    if (!ends.emplace(mi.start_lane, mi.end_lane).second)
      throw DataError("duplicate maneuver " + mi.start_lane + " -> " + mi.end_lane + " at " +
                      junction_id);
  }
  return catalog;
}

std::string catalog_hash(const ManeuverCatalog& catalog) {
  std::string blob = catalog.junction_id;
  auto put_double = [&blob](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) blob.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  };
  for (const ManeuverInstance& mi : catalog.instances) {
    blob += '|' + mi.id + '|' + mi.start_lane + '|' + mi.end_lane + '|' + to_string(mi.maneuver);
    put_double(mi.width);
    for (const Vec2& p : mi.connector_centerline.points()) {
      put_double(p.x);
      put_double(p.y);
    }
  }
  return fnv1a64_hex(blob);
}

PathRegion extend_path_region(const RoadMap& map, const ManeuverInstance& mi,
                              double max_extension) {
  if (max_extension < 0.0) throw ConfigError("max_extension must be non-negative");
  const Lane& conn = map.lane(mi.id);

  // Chains of full or trimmed centerlines, nearest lane first.
  auto walk = [&](const std::string& first, bool backward) {
    std::vector<Polyline> chain;
    double remaining = max_extension;
    std::string cur = first;
    std::set<std::string> seen{mi.id};
    while (remaining > 1e-9 && !cur.empty() && !seen.count(cur)) {
      seen.insert(cur);
      const Polyline& c = map.lane(cur).centerline;
      if (c.length() <= remaining + 1e-9) {
        chain.push_back(c);
        remaining -= c.length();
        const auto& next = backward ? map.lane(cur).predecessors : map.lane(cur).successors;
        cur = next.size() == 1 ? next[0] : "";
      } else {
        chain.push_back(backward ? c.slice(c.length() - remaining, c.length())
                                 : c.slice(0.0, remaining));
        remaining = 0.0;
      }
    }
    return chain;
  };

  std::vector<Vec2> pts;
  double chain_len = 0.0;
  auto append = [&](const Polyline& line) {
    for (const Vec2& p : line.points()) {
      if (!pts.empty() && distance(pts.back(), p) < 1e-9) continue;
      if (!pts.empty()) chain_len += distance(pts.back(), p);
      pts.push_back(p);
    }
  };

  auto back = walk(mi.start_lane, true);
  for (auto it = back.rbegin(); it != back.rend(); ++it) append(*it);
  double connector_start = chain_len;
  append(conn.centerline);
  double connector_end = chain_len;
  for (const Polyline& line : walk(mi.end_lane, false)) append(line);

  PathRegion region;
  region.centerline = Polyline(std::move(pts));
  region.connector_start_s = connector_start;
  region.connector_end_s = connector_end;
  region.width = mi.width;
  region.corridor = buffer_centerline(region.centerline, mi.width / 2.0);
  return region;
}

}  // namespace junctiongen
