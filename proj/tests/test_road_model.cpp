#include "doctest.h"

#include <junctiongen/road_model.hpp>

#include <cmath>
#include <set>
#include <string>

using namespace junctiongen;

namespace {
const std::string kDataDir = JUNCTIONGEN_DATA_DIR;
std::string map_path(const std::string& name) { return kDataDir + "/maps/" + name + ".json"; }
}  // namespace

TEST_CASE("loads the three-way fixture") {
    auto map = RoadMap::load_file(map_path("t1"));
    CHECK(map.name() == "t1");
    CHECK(map.lanes().size() == 12);
    const auto& j = map.junction("main");
    CHECK(j.connectors.size() == 6);
    CHECK(j.bounds.area() > 0.0);
    CHECK(map.has_lane("in_west"));
    CHECK(!map.has_lane("nope"));
    CHECK_THROWS_AS(map.junction("nope"), ConfigError);
}

TEST_CASE("rejects malformed maps") {
    CHECK_THROWS_AS(RoadMap::load_json_text("not json"), DataError);
    CHECK_THROWS_AS(RoadMap::load_json_text("{}"), DataError);

    // duplicate lane id
    std::string dup = R"({"meta":{"name":"m","version":1},
      "lanes":[
        {"id":"a","kind":"incoming","width":3.5,"centerline":[[0,0],[10,0]],"predecessors":[],"successors":[]},
        {"id":"a","kind":"outgoing","width":3.5,"centerline":[[20,0],[30,0]],"predecessors":[],"successors":[]}],
      "junctions":[]})";
    CHECK_THROWS_AS(RoadMap::load_json_text(dup), DataError);

    // one-sided link
    std::string oneside = R"({"meta":{"name":"m","version":1},
      "lanes":[
        {"id":"a","kind":"incoming","width":3.5,"centerline":[[0,0],[10,0]],"predecessors":[],"successors":["b"]},
        {"id":"b","kind":"outgoing","width":3.5,"centerline":[[10,0],[20,0]],"predecessors":[],"successors":[]}],
      "junctions":[]})";
    CHECK_THROWS_AS(RoadMap::load_json_text(oneside), DataError);

    // connector endpoint far from its predecessor
    std::string gap = R"({"meta":{"name":"m","version":1},
      "lanes":[
        {"id":"a","kind":"incoming","width":3.5,"centerline":[[0,0],[10,0]],"predecessors":[],"successors":["c"]},
        {"id":"b","kind":"outgoing","width":3.5,"centerline":[[20,0],[30,0]],"predecessors":["c"],"successors":[]},
        {"id":"c","kind":"connector","width":3.5,"centerline":[[11,0],[20,0]],"predecessors":["a"],"successors":["b"]}],
      "junctions":[{"id":"j","connectors":["c"],"bounds":[[10,-5],[20,-5],[20,5],[10,5]]}]})";
    CHECK_THROWS_AS(RoadMap::load_json_text(gap), DataError);
}

// Two-segment polyline whose first segment points along h0 and last along h1.
static Polyline bend(double h0, double h1) {
    Vec2 p0{0.0, 0.0};
    Vec2 p1{p0.x + 10.0 * std::cos(h0), p0.y + 10.0 * std::sin(h0)};
    Vec2 p2{p1.x + 10.0 * std::cos(h1), p1.y + 10.0 * std::sin(h1)};
    return Polyline({p0, p1, p2});
}

TEST_CASE("maneuver classification by heading change") {
    CHECK(classify_maneuver(bend(0.0, 0.1)) == ManeuverType::GoStraight);
    CHECK(classify_maneuver(bend(0.0, M_PI / 4 - 0.01)) == ManeuverType::GoStraight);
    CHECK(classify_maneuver(bend(0.0, M_PI / 2)) == ManeuverType::TurnLeft);
    CHECK(classify_maneuver(bend(0.0, -M_PI / 2)) == ManeuverType::TurnRight);
    // turn angle wraps across the pi boundary
    CHECK(classify_maneuver(bend(2.5, -2.5)) == ManeuverType::TurnLeft);
    CHECK(classify_maneuver(bend(-2.5, 2.5)) == ManeuverType::TurnRight);
}

TEST_CASE("catalog enumerates connectors sorted by id") {
    auto map = RoadMap::load_file(map_path("t1"));
    auto cat = enumerate_maneuvers(map, "main");
    REQUIRE(cat.instances.size() == 6);
    for (size_t i = 1; i < cat.instances.size(); ++i) {
        CHECK(cat.instances[i - 1].id < cat.instances[i].id);
    }
    const auto& gs = cat.by_id("gs_east");
    CHECK(gs.start_lane == "in_east");
    CHECK(gs.end_lane == "out_west");
    CHECK(gs.maneuver == ManeuverType::GoStraight);
    CHECK(cat.by_id("tl_east").maneuver == ManeuverType::TurnLeft);
    CHECK(cat.by_id("tr_west").maneuver == ManeuverType::TurnRight);
    CHECK(cat.index_of("gs_east") == 0);
    CHECK_THROWS_AS(cat.by_id("nope"), DataError);
}

TEST_CASE("catalog types across all fixtures") {
    for (const char* name : {"t1", "x1", "y1"}) {
        auto map = RoadMap::load_file(map_path(name));
        auto cat = enumerate_maneuvers(map, "main");
        for (const auto& mi : cat.instances) {
            const auto& lane = map.lane(mi.id);
            CHECK(lane.kind == LaneKind::Connector);
            CHECK(mi.width == lane.width);
            CHECK(mi.connector_centerline.length() > 0.0);
        }
    }
    CHECK(enumerate_maneuvers(RoadMap::load_file(map_path("x1")), "main").instances.size() == 12);
    CHECK(enumerate_maneuvers(RoadMap::load_file(map_path("y1")), "main").instances.size() == 8);
}

TEST_CASE("catalog hash is stable and input sensitive") {
    auto map = RoadMap::load_file(map_path("t1"));
    auto cat = enumerate_maneuvers(map, "main");
    auto h1 = catalog_hash(cat);
    auto h2 = catalog_hash(cat);
    CHECK(h1 == h2);
    CHECK(h1.size() == 16);

    auto other = RoadMap::load_file(map_path("x1"));
    auto ocat = enumerate_maneuvers(other, "main");
    CHECK(catalog_hash(ocat) != h1);
}

TEST_CASE("path region spans approach, connector and exit") {
    auto map = RoadMap::load_file(map_path("t1"));
    auto cat = enumerate_maneuvers(map, "main");
    const auto& mi = cat.by_id("gs_east");
    auto region = extend_path_region(map, mi, 60.0);
    double conn_len = mi.connector_centerline.length();
    CHECK(region.connector_end_s - region.connector_start_s == doctest::Approx(conn_len).epsilon(1e-9));
    // fixture approaches are 60 m, matching the full extension
    CHECK(region.connector_start_s == doctest::Approx(60.0).epsilon(1e-6));
    CHECK(region.centerline.length() ==
          doctest::Approx(region.connector_end_s + 60.0).epsilon(1e-6));
    CHECK(region.width == mi.width);
    // corridor covers the connector midpoint
    auto mid = mi.connector_centerline.point_at(conn_len / 2);
    CHECK(region.corridor.contains(mid, 1e-9));
}

TEST_CASE("extension clips to the requested length") {
    auto map = RoadMap::load_file(map_path("t1"));
    auto cat = enumerate_maneuvers(map, "main");
    const auto& mi = cat.by_id("tl_south");
    auto region = extend_path_region(map, mi, 15.0);
    CHECK(region.connector_start_s == doctest::Approx(15.0).epsilon(1e-6));
    double tail = region.centerline.length() - region.connector_end_s;
    CHECK(tail == doctest::Approx(15.0).epsilon(1e-6));
}

TEST_CASE("region centerline is continuous at the joints") {
    auto map = RoadMap::load_file(map_path("y1"));
    auto cat = enumerate_maneuvers(map, "main");
    for (const auto& mi : cat.instances) {
        auto region = extend_path_region(map, mi, 60.0);
        const auto& pts = region.centerline.points();
        for (size_t i = 1; i < pts.size(); ++i) {
            double d = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
            CHECK(d > 1e-12);  // joints leave no duplicate vertices
        }
        auto entry = region.centerline.point_at(region.connector_start_s);
        auto conn_start = mi.connector_centerline.point_at(0.0);
        CHECK(std::hypot(entry.x - conn_start.x, entry.y - conn_start.y) < 1e-6);
        auto exit = region.centerline.point_at(region.connector_end_s);
        auto conn_end = mi.connector_centerline.point_at(mi.connector_centerline.length());
        CHECK(std::hypot(exit.x - conn_end.x, exit.y - conn_end.y) < 1e-6);
    }
}

TEST_CASE("duplicate maneuver endpoints are rejected") {
    // two connectors sharing (start, end) lanes
    std::string dup = R"({"meta":{"name":"m","version":1},
      "lanes":[
        {"id":"a","kind":"incoming","width":3.5,"centerline":[[0,0],[10,0]],"predecessors":[],"successors":["c1","c2"]},
        {"id":"b","kind":"outgoing","width":3.5,"centerline":[[20,0],[30,0]],"predecessors":["c1","c2"],"successors":[]},
        {"id":"c1","kind":"connector","width":3.5,"centerline":[[10,0],[20,0]],"predecessors":["a"],"successors":["b"]},
        {"id":"c2","kind":"connector","width":3.5,"centerline":[[10,0],[15,1],[20,0]],"predecessors":["a"],"successors":["b"]}],
      "junctions":[{"id":"j","connectors":["c1","c2"],"bounds":[[10,-5],[20,-5],[20,5],[10,5]]}]})";
    auto map = RoadMap::load_json_text(dup);
    CHECK_THROWS_AS(enumerate_maneuvers(map, "j"), DataError);
}
