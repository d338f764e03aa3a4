#include "doctest.h"

#include <junctiongen/analysis.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

using namespace junctiongen;

namespace {

SimTrace make_trace(int frames, double step = 0.05) {
    SimTrace tr;
    tr.header.scenario_id = "s";
    tr.header.policy = "oblivious";
    tr.header.timestep = step;
    tr.header.n_actors = 2;
    for (int i = 0; i < frames; ++i) {
        Frame f;
        f.t = i * step;
        f.actors.push_back({i * 0.2, 0.0, 0.0, 4.0});
        f.actors.push_back({0.0, 50.0, 0.0, 0.0});
        f.detections.push_back({false, false});
        tr.frames.push_back(f);
    }
    return tr;
}

void add_collision(SimTrace& tr, bool seen_camera, bool seen_lidar, int seen_frames) {
    Event e;
    e.kind = EventKind::Collision;
    e.t = tr.frames.back().t;
    e.actor = 1;
    tr.events.push_back(e);
    int n = static_cast<int>(tr.frames.size());
    for (int i = std::max(0, n - 1 - seen_frames); i < n - 1; ++i) {
        tr.frames[static_cast<size_t>(i)].detections[0].camera = seen_camera;
        tr.frames[static_cast<size_t>(i)].detections[0].lidar = seen_lidar;
    }
}

// Exact integer-arithmetic Fisher oracle for small tables: hypergeometric
// weights as products of binomials, compared without logs.
double fisher_oracle(long long a, long long b, long long c, long long d) {
    long long r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c1 == n) return 1.0;
    auto choose = [](long long nn, long long kk) -> long double {
        if (kk < 0 || kk > nn) return 0.0L;
        long double r = 1.0L;
        for (long long i = 0; i < kk; ++i) r = r * static_cast<long double>(nn - i) / (i + 1);
        return r;
    };
    long double denom = choose(n, c1);
    auto weight = [&](long long k) { return choose(r1, k) * choose(r2, c1 - k); };
    long double obs = weight(a);
    long double sum = 0.0L;
    long long kmin = std::max(0LL, c1 - r2), kmax = std::min(r1, c1);
    for (long long k = kmin; k <= kmax; ++k) {
        long double w = weight(k);
        if (w <= obs * (1.0L + 1e-7L)) sum += w;
    }
    double p = static_cast<double>(sum / denom);
    return p > 1.0 ? 1.0 : p;
}
}  // namespace

TEST_CASE("outcome precedence") {
    SimTrace tr = make_trace(10);
    CHECK(classify_outcome(tr) == Outcome::NoIncident);
    Event nm;
    nm.kind = EventKind::NearMiss;
    nm.t = 0.2;
    nm.actor = 1;
    nm.gap = 0.4;
    tr.events.push_back(nm);
    CHECK(classify_outcome(tr) == Outcome::NearMiss);
    Event col;
    col.kind = EventKind::Collision;
    col.t = 0.3;
    col.actor = 1;
    tr.events.push_back(col);
    CHECK(classify_outcome(tr) == Outcome::Collision);
}

TEST_CASE("avoidability needs ninety percent dual visibility") {
    // 54 of 60 pre-impact frames seen: avoidable
    SimTrace tr = make_trace(100);
    add_collision(tr, true, true, 54);
    CHECK(assess_avoidability(tr) == Avoidability::Avoidable);

    // 53 of 60: unavoidable
    SimTrace tr2 = make_trace(100);
    add_collision(tr2, true, true, 53);
    CHECK(assess_avoidability(tr2) == Avoidability::Unavoidable);

    // camera alone is not enough
    SimTrace tr3 = make_trace(100);
    add_collision(tr3, true, false, 60);
    CHECK(assess_avoidability(tr3) == Avoidability::Unavoidable);

    // no collision, nothing to assess
    SimTrace tr4 = make_trace(100);
    CHECK(assess_avoidability(tr4) == Avoidability::NotApplicable);
}

TEST_CASE("avoidability with a short trace uses the frames it has") {
    SimTrace tr = make_trace(20);
    add_collision(tr, true, true, 19);  // all 19 pre-impact frames seen
    CHECK(assess_avoidability(tr) == Avoidability::Avoidable);

    SimTrace tr2 = make_trace(20);
    add_collision(tr2, true, true, 10);  // 10 of 19
    CHECK(assess_avoidability(tr2) == Avoidability::Unavoidable);
}

TEST_CASE("ego track drops consecutive duplicates") {
    SimTrace tr = make_trace(5);
    // freeze two frames in place
    tr.frames[3].actors[0] = tr.frames[2].actors[0];
    auto track = ego_track(tr);
    CHECK(track.points().size() == 4);
    CHECK(track.length() == doctest::Approx(0.8));

    SimTrace still = make_trace(5);
    for (auto& f : still.frames) f.actors[0] = {1.0, 2.0, 0.0, 0.0};
    CHECK_THROWS_AS(ego_track(still), DataError);
}

TEST_CASE("hausdorff distance on simple chains") {
    Polyline a({{0, 0}, {10, 0}});
    Polyline b({{0, 1}, {10, 1}});
    CHECK(hausdorff_distance(a, b) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(hausdorff_distance(a, a) == doctest::Approx(0.0));
    // symmetric
    Polyline c({{0, 0}, {10, 0}, {10, 5}});
    CHECK(hausdorff_distance(a, c) == doctest::Approx(hausdorff_distance(c, a)));
    CHECK(hausdorff_distance(a, c) == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("medoid picks the central path, ties to the lowest index") {
    Polyline lo({{0, -1}, {10, -1}});
    Polyline mid({{0, 0}, {10, 0}});
    Polyline hi({{0, 1}, {10, 1}});
    CHECK(medoid_index({lo, mid, hi}) == 1);
    CHECK(medoid_index({mid, lo, hi}) == 0);
    // exact tie between two identical candidates
    CHECK(medoid_index({mid, mid}) == 0);
    CHECK(medoid_index({lo}) == 0);
    CHECK_THROWS_AS(medoid_index({}), ConfigError);
}

TEST_CASE("preventive maneuver fires on a mid route stall") {
    Polyline ref({{0, 0}, {30, 0}});
    SimTrace tr;
    tr.header.timestep = 0.05;
    auto push = [&](double x) {
        Frame f;
        f.t = tr.frames.size() * 0.05;
        f.actors.push_back({x, 0.0, 0.0, 4.0});
        tr.frames.push_back(f);
    };
    // drive to x=10, dwell 20 frames, carry on to the end
    for (double x = 0.0; x < 10.0; x += 0.2) push(x);
    for (int i = 0; i < 20; ++i) push(10.0);
    for (double x = 10.0; x <= 30.0; x += 0.2) push(x);
    auto pm = detect_preventive_maneuver(tr, ref);
    CHECK(pm.detected);
    // the stall sits at x=10, reference point index 20 at step 0.5
    CHECK(pm.ref_index == 20);
}

TEST_CASE("smooth runs and terminal dwell are not preventive") {
    Polyline ref({{0, 0}, {30, 0}});
    SimTrace tr;
    tr.header.timestep = 0.05;
    auto push = [&](double x) {
        Frame f;
        f.t = tr.frames.size() * 0.05;
        f.actors.push_back({x, 0.0, 0.0, 4.0});
        tr.frames.push_back(f);
    };
    for (double x = 0.0; x <= 30.0; x += 0.2) push(x);
    // park at the end for a long while
    for (int i = 0; i < 100; ++i) push(30.0);
    auto pm = detect_preventive_maneuver(tr, ref);
    CHECK(!pm.detected);
}

TEST_CASE("slow uniform crawl is not preventive") {
    Polyline ref({{0, 0}, {30, 0}});
    SimTrace tr;
    tr.header.timestep = 0.05;
    for (int i = 0; i < 300; ++i) {
        Frame f;
        f.t = i * 0.05;
        f.actors.push_back({i * 0.1, 0.0, 0.0, 2.0});
        tr.frames.push_back(f);
    }
    // every reference point collects the same dwell, no spike
    auto pm = detect_preventive_maneuver(tr, ref);
    CHECK(!pm.detected);
}

TEST_CASE("a hold at the spawn point is preventive") {
    Polyline ref({{0, 0}, {30, 0}});
    SimTrace tr;
    tr.header.timestep = 0.05;
    for (int i = 0; i < 40; ++i) {
        Frame f;
        f.t = i * 0.05;
        f.actors.push_back({i < 20 ? 0.0 : (i - 20) * 0.2, 0.0, 0.0, 4.0});
        tr.frames.push_back(f);
    }
    auto pm = detect_preventive_maneuver(tr, ref);
    CHECK(pm.detected);
    CHECK(pm.ref_index == 0);
}

TEST_CASE("fisher matches the exact oracle over a sweep") {
    for (long long n = 2; n <= 40; n += 2) {
        for (long long r1 = 1; r1 < n; r1 += 3) {
            for (long long c1 = 1; c1 < n; c1 += 3) {
                long long kmin = std::max(0LL, c1 - (n - r1)), kmax = std::min(r1, c1);
                for (long long a = kmin; a <= kmax; ++a) {
                    long long b = r1 - a, c = c1 - a, d = n - r1 - c;
                    double impl = fisher_exact_p(a, b, c, d);
                    double want = fisher_oracle(a, b, c, d);
                    CHECK(std::abs(impl - want) <= 1e-9);
                }
            }
        }
    }
}

TEST_CASE("fisher known values") {
    // 280/8008
    CHECK(fisher_exact_p(8, 2, 1, 5) == doctest::Approx(0.034965034965).epsilon(1e-9));
    CHECK(fisher_exact_p(0, 0, 0, 0) == 1.0);
    CHECK(fisher_exact_p(5, 0, 0, 0) == 1.0);
    CHECK(std::abs(fisher_exact_p(2, 2, 2, 2) - 1.0) < 1e-12);
    CHECK(fisher_exact_p(10, 0, 0, 10) == doctest::Approx(fisher_oracle(10, 0, 0, 10)).epsilon(1e-12));
}

TEST_CASE("odds ratio with zero cell correction") {
    CHECK(odds_ratio(4, 2, 1, 3) == doctest::Approx(6.0));
    CHECK(odds_ratio(10, 0, 0, 10) == doctest::Approx(441.0));
    CHECK(odds_ratio(0, 0, 0, 0) == doctest::Approx(1.0));
    // correction applies to every cell as soon as one is zero
    CHECK(odds_ratio(9, 0, 3, 3) == doctest::Approx((9.5 * 3.5) / (0.5 * 3.5)));
}

TEST_CASE("aggregate groups and excludes unavoidable collisions") {
    std::vector<RunRecord> records;
    auto rec = [&](const std::string& id, int n, Outcome o, Avoidability av, bool pm,
                   ManeuverType mt, const std::string& mi) {
        RunRecord r;
        r.scenario_id = id;
        r.policy = "p";
        r.n_actors = n;
        r.outcome = o;
        r.avoidability = av;
        r.preventive_maneuver = pm;
        r.ego_maneuver = mt;
        r.ego_mi = mi;
        records.push_back(r);
    };
    rec("a", 2, Outcome::Collision, Avoidability::Avoidable, false, ManeuverType::TurnLeft, "tl");
    rec("b", 2, Outcome::Collision, Avoidability::Unavoidable, false, ManeuverType::TurnLeft, "tl");
    rec("c", 2, Outcome::NearMiss, Avoidability::NotApplicable, true, ManeuverType::GoStraight, "gs");
    rec("d", 3, Outcome::NoIncident, Avoidability::NotApplicable, true, ManeuverType::GoStraight, "gs");

    auto rows = aggregate(records, GroupScheme::ByActors);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].key == "n=2");
    CHECK(rows[0].collisions == 1);
    CHECK(rows[0].near_misses == 1);
    CHECK(rows[0].excluded == 1);
    CHECK(rows[0].total == 2);
    CHECK(rows[1].key == "n=3");
    CHECK(rows[1].no_incident == 1);
    CHECK(rows[1].preventive == 1);

    auto by_type = aggregate(records, GroupScheme::ByManeuverType);
    REQUIRE(by_type.size() == 2);
    // keys sorted: go_straight before turn_left
    CHECK(by_type[0].key == std::string(to_string(ManeuverType::GoStraight)));
    CHECK(by_type[1].collisions == 1);

    auto by_mi = aggregate(records, GroupScheme::ByManeuverInstance);
    REQUIRE(by_mi.size() == 2);
    CHECK(by_mi[0].key == "gs");
}

TEST_CASE("group comparisons run fisher on each pair") {
    AggregateRow a;
    a.key = "A";
    a.collisions = 8;
    a.near_misses = 0;
    a.no_incident = 2;
    a.preventive = 1;
    a.total = 10;
    AggregateRow b;
    b.key = "B";
    b.collisions = 1;
    b.near_misses = 0;
    b.no_incident = 5;
    b.preventive = 4;
    b.total = 6;
    auto cmps = compare_groups({a, b});
    REQUIRE(cmps.size() == 2);
    CHECK(cmps[0].metric == "incident");
    CHECK(cmps[0].a_pos == 8);
    CHECK(cmps[0].a_neg == 2);
    CHECK(cmps[0].b_pos == 1);
    CHECK(cmps[0].b_neg == 5);
    CHECK(cmps[0].p_value == doctest::Approx(fisher_exact_p(8, 2, 1, 5)).epsilon(1e-12));
    CHECK(cmps[0].odds == doctest::Approx(odds_ratio(8, 2, 1, 5)).epsilon(1e-12));
    CHECK(cmps[1].metric == "preventive");
    CHECK(cmps[1].a_pos == 1);
    CHECK(cmps[1].a_neg == 9);

    // three rows give three pairs times two metrics
    AggregateRow c = b;
    c.key = "C";
    CHECK(compare_groups({a, b, c}).size() == 6);
    CHECK(compare_groups({a}).empty());
}

TEST_CASE("scheme names round trip") {
    CHECK(group_scheme_from_string("actors") == GroupScheme::ByActors);
    CHECK(group_scheme_from_string("maneuver_type") == GroupScheme::ByManeuverType);
    CHECK(group_scheme_from_string("maneuver_instance") == GroupScheme::ByManeuverInstance);
    CHECK_THROWS_AS(group_scheme_from_string("nope"), ConfigError);
}
