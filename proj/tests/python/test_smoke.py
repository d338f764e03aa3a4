import json
import os

import pytest

import junctiongen as jg

DATA = os.environ.get("JUNCTIONGEN_DATA", "data")
T1 = os.path.join(DATA, "maps", "t1.json")
X1 = os.path.join(DATA, "maps", "x1.json")


def test_map_and_catalog():
    m = jg.RoadMap.load(T1)
    assert m.name == "t1"
    assert "in_west" in m.lane_ids()
    cat = jg.enumerate_maneuvers(m)
    assert len(cat) == 6
    assert cat.junction == "main"
    assert cat.maneuver_of("tl_east") == "turn_left"
    assert cat.lanes_of("gs_east") == ("in_east", "out_west")


def test_logical_scenarios():
    cat = jg.enumerate_maneuvers(jg.RoadMap.load(T1))
    s = jg.find_logical_scenarios(cat, n_actors=2)
    assert len(s) == 24
    assert s.n_actors == 2
    for a in s.assignments():
        assert len(a) == 2
        assert jg.conflict_area(cat, a[0], a[1]) > 0.1
    reduced = jg.reduce_symmetries(s)
    assert reduced.symmetry_reduced
    assert len(reduced) == 24
    doc = json.loads(s.to_json())
    assert len(doc["scenarios"]) == 24

    x_cat = jg.enumerate_maneuvers(jg.RoadMap.load(X1))
    assert len(jg.find_logical_scenarios(x_cat, n_actors=2)) == 92


def test_stats():
    assert jg.fisher_exact_p(8, 2, 1, 5) == pytest.approx(280 / 8008, abs=1e-12)
    assert jg.fisher_exact_p(2, 2, 2, 2) == pytest.approx(1.0, abs=1e-12)
    assert jg.odds_ratio(10, 0, 0, 10) == pytest.approx(441.0)
    assert jg.odds_ratio(4, 2, 1, 3) == pytest.approx(6.0)
    scipy_stats = pytest.importorskip("scipy.stats")
    for table in [(3, 7, 9, 2), (5, 5, 5, 5), (12, 1, 0, 8), (2, 0, 3, 11)]:
        a, b, c, d = table
        want = scipy_stats.fisher_exact([[a, b], [c, d]])[1]
        assert jg.fisher_exact_p(a, b, c, d) == pytest.approx(want, abs=1e-9)


def test_medoid():
    lo = [(0.0, -1.0), (10.0, -1.0)]
    mid = [(0.0, 0.0), (10.0, 0.0)]
    hi = [(0.0, 1.0), (10.0, 1.0)]
    assert jg.medoid_index([lo, mid, hi]) == 1
    assert jg.medoid_index([mid, lo, hi]) == 0


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        jg.RoadMap.load(os.path.join(DATA, "missing.json"))
    with pytest.raises(ValueError):
        jg.config_hash("{\"map\": \"m\", \"bogus\": 1}")


def test_pipeline_end_to_end(tmp_path):
    cfg = {
        "map": T1,
        "out_dir": str(tmp_path),
        "actors": 2,
        "reps": 1,
        "ref_reps": 2,
        "max_scenarios": 6,
        "jobs": 2,
    }
    text = json.dumps(cfg)
    gen = jg.run_generate(text)
    assert gen["maneuvers"] == 6
    assert gen["kept"] == 24

    con = jg.run_concretize(text)
    assert con["scenarios"] == 6
    assert con["feasible"] == 3

    sim = jg.run_simulate(text)
    assert sim["traces"] == 6
    assert sim["reference_traces"] == 12

    ana = jg.run_analyze(text)
    assert ana["runs"] == 6
    report = os.path.join(str(tmp_path), "analysis", "report.md")
    assert os.path.exists(report)
    with open(report) as fh:
        body = fh.read()
    assert "Outcomes" in body

    outcomes = json.load(open(os.path.join(str(tmp_path), "analysis", "outcomes.json")))
    assert len(outcomes["runs"]) == 6
    hashes = {jg.config_hash(text), outcomes["provenance"]["config_hash"]}
    assert len(hashes) == 1
