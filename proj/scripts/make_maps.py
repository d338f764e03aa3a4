#!/usr/bin/env python3
"""Generate the synthetic junction map fixtures (data/maps/*.json).

Right-hand traffic, meters, y-up. Each map is one junction with straight
approach lanes and connector lanes (straight segments or circular arcs)
joining incoming to outgoing lanes. Lane centerlines sit at a fixed offset
from the road axis so that adjacent corridors keep a 0.1 m physical gap.
"""

import argparse
import json
import math
import os

LANE_WIDTH = 3.5
APPROACH = 60.0
ARC_STEP_DEG = 2.0

DIRS = {
    "west": (-1.0, 0.0),
    "east": (1.0, 0.0),
    "south": (0.0, -1.0),
    "north": (0.0, 1.0),
}


def rot90(v):
    return (-v[1], v[0])


def rot270(v):
    return (v[1], -v[0])


def add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def scale(v, k):
    return (v[0] * k, v[1] * k)


def rnd(p):
    return [round(p[0], 9), round(p[1], 9)]


def incoming_lane(arm, half_extent, offset, suffix=""):
    u = DIRS[arm]
    travel = scale(u, -1.0)
    right = rot270(travel)
    start = add(scale(u, half_extent + APPROACH), scale(right, offset))
    end = add(scale(u, half_extent), scale(right, offset))
    return {
        "id": f"in_{arm}{suffix}",
        "kind": "incoming",
        "width": LANE_WIDTH,
        "centerline": [rnd(start), rnd(end)],
        "predecessors": [],
        "successors": [],
    }


def outgoing_lane(arm, half_extent, offset, suffix=""):
    u = DIRS[arm]
    right = rot270(u)
    start = add(scale(u, half_extent), scale(right, offset))
    end = add(scale(u, half_extent + APPROACH), scale(right, offset))
    return {
        "id": f"out_{arm}{suffix}",
        "kind": "outgoing",
        "width": LANE_WIDTH,
        "centerline": [rnd(start), rnd(end)],
        "predecessors": [],
        "successors": [],
    }


def lane_end(lane):
    return tuple(lane["centerline"][-1])


def lane_start(lane):
    return tuple(lane["centerline"][0])


def connector(cid, lane_in, lane_out, travel_in, travel_out):
    p = lane_end(lane_in)
    q = lane_start(lane_out)
    cross = travel_in[0] * travel_out[1] - travel_in[1] * travel_out[0]
    if abs(cross) < 1e-12:
        pts = [rnd(p), rnd(q)]
    else:
        # Circle tangent to both headings: center on each heading's normal.
        n_in = rot90(travel_in) if cross > 0 else rot270(travel_in)
        n_out = rot90(travel_out) if cross > 0 else rot270(travel_out)
        # Solve p + r*n_in == q + r*n_out componentwise.
        dn = (n_in[0] - n_out[0], n_in[1] - n_out[1])
        dq = (q[0] - p[0], q[1] - p[1])
        if abs(dn[0]) > abs(dn[1]):
            r = dq[0] / dn[0]
        else:
            r = dq[1] / dn[1]
        center = add(p, scale(n_in, r))
        assert abs(math.hypot(q[0] - center[0], q[1] - center[1]) - r) < 1e-9
        a0 = math.atan2(p[1] - center[1], p[0] - center[0])
        a1 = math.atan2(q[1] - center[1], q[0] - center[0])
        sweep = a1 - a0
        if cross > 0 and sweep < 0:
            sweep += 2 * math.pi
        if cross < 0 and sweep > 0:
            sweep -= 2 * math.pi
        steps = max(2, int(math.ceil(abs(sweep) / math.radians(ARC_STEP_DEG))))
        pts = [rnd(p)]
        for k in range(1, steps):
            a = a0 + sweep * k / steps
            pts.append(rnd(add(center, (r * math.cos(a), r * math.sin(a)))))
        pts.append(rnd(q))
    lane = {
        "id": cid,
        "kind": "connector",
        "width": LANE_WIDTH,
        "centerline": pts,
        "predecessors": [lane_in["id"]],
        "successors": [lane_out["id"]],
    }
    lane_in["successors"].append(cid)
    lane_out["predecessors"].append(cid)
    return lane


def square_bounds(h):
    return [[-h, -h], [h, -h], [h, h], [-h, h]]


def build_single_lane_map(name, arms, half_extent, moves):
    lanes = {}
    for arm in arms:
        lanes[f"in_{arm}"] = incoming_lane(arm, half_extent, 1.8)
        lanes[f"out_{arm}"] = outgoing_lane(arm, half_extent, 1.8)
    connectors = []
    for cid, src, dst in moves:
        travel_in = scale(DIRS[src], -1.0)
        travel_out = DIRS[dst]
        connectors.append(
            connector(cid, lanes[f"in_{src}"], lanes[f"out_{dst}"], travel_in, travel_out)
        )
    all_lanes = list(lanes.values()) + connectors
    return {
        "meta": {"name": name, "version": "1"},
        "lanes": all_lanes,
        "junctions": [
            {
                "id": "main",
                "connectors": [c["id"] for c in connectors],
                "bounds": square_bounds(half_extent),
            }
        ],
    }


def build_t1():
    moves = [
        ("gs_west", "west", "east"),
        ("tr_west", "west", "south"),
        ("gs_east", "east", "west"),
        ("tl_east", "east", "south"),
        ("tl_south", "south", "west"),
        ("tr_south", "south", "east"),
    ]
    return build_single_lane_map("t1", ["west", "east", "south"], 7.2, moves)


def build_x1():
    moves = []
    opposite = {"west": "east", "east": "west", "south": "north", "north": "south"}
    # Right/left targets for right-hand traffic.
    right_of = {"west": "south", "south": "east", "east": "north", "north": "west"}
    left_of = {"west": "north", "north": "east", "east": "south", "south": "west"}
    for arm in ["east", "north", "south", "west"]:
        moves.append((f"gs_{arm}", arm, opposite[arm]))
        moves.append((f"tr_{arm}", arm, right_of[arm]))
        moves.append((f"tl_{arm}", arm, left_of[arm]))
    return build_single_lane_map("x1", ["west", "east", "south", "north"], 9.0, moves)


def build_y1():
    h = 7.2
    lanes = {}
    for arm in ["west", "east", "south"]:
        lanes[f"in_{arm}A"] = incoming_lane(arm, h, 1.8, "A")
        lanes[f"in_{arm}B"] = incoming_lane(arm, h, 5.4, "B")
        lanes[f"out_{arm}A"] = outgoing_lane(arm, h, 1.8, "A")
        lanes[f"out_{arm}B"] = outgoing_lane(arm, h, 5.4, "B")
    moves = [
        ("gs_eastA", "in_eastA", "out_westA"),
        ("gs_eastB", "in_eastB", "out_westB"),
        ("gs_westA", "in_westA", "out_eastA"),
        ("gs_westB", "in_westB", "out_eastB"),
        ("tl_eastA", "in_eastA", "out_southA"),
        ("tl_southA", "in_southA", "out_westA"),
        ("tr_southB", "in_southB", "out_eastB"),
        ("tr_westB", "in_westB", "out_southB"),
    ]
    connectors = []
    for cid, src, dst in moves:
        src_arm = src[3:-1]
        dst_arm = dst[4:-1]
        travel_in = scale(DIRS[src_arm], -1.0)
        travel_out = DIRS[dst_arm]
        connectors.append(connector(cid, lanes[src], lanes[dst], travel_in, travel_out))
    all_lanes = list(lanes.values()) + connectors
    return {
        "meta": {"name": "y1", "version": "1"},
        "lanes": all_lanes,
        "junctions": [
            {
                "id": "main",
                "connectors": [c["id"] for c in connectors],
                "bounds": square_bounds(h),
            }
        ],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data/maps")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    for build in (build_t1, build_x1, build_y1):
        m = build()
        path = os.path.join(args.out_dir, f"{m['meta']['name']}.json")
        with open(path, "w") as f:
            json.dump(m, f, indent=1, sort_keys=True)
            f.write("\n")
        print(f"wrote {path} ({len(m['lanes'])} lanes)")


if __name__ == "__main__":
    main()
