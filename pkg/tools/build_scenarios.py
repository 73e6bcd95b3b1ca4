"""Regenerate the packaged scenario documents.

The YAML files under src/coopsim/scenarios/data are the source of truth at run
time; this script only keeps their shared geometry consistent. Run it from the
repository root after editing a parameter below.
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import yaml

from coopsim.scenarios import from_dict, to_dict

DATA = Path(__file__).resolve().parents[1] / "src" / "coopsim" / "scenarios" / "data"

LANE_W = 3.5
HALF = LANE_W / 2

EGO_SENSOR = {"fov": 90.0, "range": 50.0}
# all-round sensor for the single-vehicle pipeline scenes, so vehicles alongside stay tracked
PIPELINE_SENSOR = {"fov": 360.0, "range": 50.0}
SPECTATOR_SENSOR = {"fov": 90.0, "range": 50.0}
RSU_SENSOR = {"fov": 360.0, "range": 70.0}
RSU_EXTENTS = [0.5, 0.5]


def intersection_map(extra_lanes=()):
    lanes = [
        {"id": "E", "points": [[-100.0, -HALF], [40.0, -HALF]]},
        {"id": "W", "points": [[40.0, HALF], [-100.0, HALF]]},
        {"id": "S", "points": [[-HALF, 100.0], [-HALF, -60.0]]},
        {"id": "N", "points": [[HALF, -60.0], [HALF, 100.0]]},
    ]
    lanes += list(extra_lanes)
    return {
        "lanes": lanes,
        "obstacles": [
            {"name": "firetruck", "pose": [-5.5, 9.5, math.pi / 2], "half_extents": [5.0, 1.25],
             "height": "ground"},
            # corner building hides the cross street from far away; tall enough to block elevated sensors
            {"name": "building", "pose": [-34.5, 49.5, 0.0], "half_extents": [25.5, 40.5],
             "height": "elevated"},
        ],
    }


def ego(lane="E", s=21.0, speed=10.0, sensor=EGO_SENSOR):
    return {"name": "ego", "role": "ego", "lane": lane, "s": s, "speed": speed, "sensor": dict(sensor)}


def incoming(speed=8.0, start_y=60.0):
    s = 100.0 - start_y
    return {"name": "incoming", "role": "background", "lane": "S", "s": s, "speed": speed,
            "script": [[0.0, speed]]}


def rsu(name="rsu", pose=(8.0, -7.0, math.pi / 2)):
    return {"name": name, "role": "rsu", "pose": list(pose), "half_extents": RSU_EXTENTS,
            "sensor": dict(RSU_SENSOR)}


def spectator(name="spectator", lane="W", s=20.0):
    return {"name": name, "role": "spectator", "lane": lane, "s": s, "speed": 0.0,
            "sensor": dict(SPECTATOR_SENSOR)}


ZONE = {"rect": [-12.0, -4.0, 0.0, 16.0], "t_on": 0.0}


def coop(name, description, agents, participants, traffic=None, incoming_speed=8.0, extra_lanes=()):
    # both vehicles would reach the conflict point together if nobody braked
    start_y = -HALF + incoming_speed * 7.72
    doc = {
        "name": name,
        "description": description,
        "dt": 0.05,
        "map": intersection_map(extra_lanes),
        "agents": [ego(), incoming(incoming_speed, round(start_y, 2))] + agents,
        "pipeline": {"perception": "oracle", "participants": participants, "v_des": 10.0,
                     "goal": {"lane": "E", "index": -1}},
        "channel": {"latency": "none", "drop_rate": 0.0, "seed": 0},
        "trigger_zones": [ZONE],
        "termination": {"timeout": 25.0, "collision": True, "goal": True},
        "adversary": "incoming",
    }
    if traffic is not None:
        doc["background_traffic"] = traffic
    return doc


def straight(lane_ids, length, ys):
    return [{"id": lid, "points": [[0.0, y], [length, y]]} for lid, y in zip(lane_ids, ys)]


def pipeline(name, description, lanes, agents, *, controls=(), timeout, adversary=None, goal_lane="A"):
    doc = {
        "name": name,
        "description": description,
        "dt": 0.05,
        "map": {"lanes": lanes, "controls": list(controls)},
        "agents": agents,
        "pipeline": {"perception": "oracle", "participants": [], "v_des": 10.0,
                     "goal": {"lane": goal_lane, "index": -1}},
        "termination": {"timeout": timeout, "collision": True, "goal": True},
    }
    if adversary is not None:
        doc["adversary"] = adversary
    return doc


def lead(name, lane, s, speed):
    return {"name": name, "role": "background", "lane": lane, "s": s, "speed": speed, "script": [[0.0, speed]]}


def arterial(name, description, participant_role, height_note):
    lanes = [
        {"id": "E1", "points": [[-150.0, -HALF], [250.0, -HALF]], "left": None, "right": "E2"},
        {"id": "E2", "points": [[-150.0, -HALF - LANE_W], [250.0, -HALF - LANE_W]], "left": "E1"},
        {"id": "W1", "points": [[250.0, HALF], [-150.0, HALF]], "right": "W2"},
        {"id": "W2", "points": [[250.0, HALF + LANE_W], [-150.0, HALF + LANE_W]], "left": "W1"},
    ]
    # same shoulder spots in both scenes; only the participant kind differs
    spots = [("p1", (10.0, -9.5, math.pi / 2)), ("p2", (60.0, 9.5, -math.pi / 2))]
    parts = []
    for pname, pose in spots:
        if participant_role == "rsu":
            parts.append(rsu(pname, pose))
        else:
            parts.append({"name": pname, "role": "spectator", "pose": list(pose), "speed": 0.0,
                          "sensor": {"fov": 120.0, "range": 50.0}})
    ego_doc = ego("E1", 50.0, 8.0)
    return {
        "name": name,
        "description": description,
        "dt": 0.05,
        "map": {"lanes": lanes},
        "agents": [ego_doc] + parts,
        "pipeline": {"perception": "oracle", "participants": [p for p, _ in spots], "v_des": 8.0,
                     "goal": {"lane": "E1", "index": -1}},
        "termination": {"timeout": 15.0, "collision": True, "goal": True},
        "background_traffic": {"region": [-150.0, -7.0, 250.0, 7.0], "count": 40, "min_gap": 4.0,
                               "speed": 8.0, "seed": 2024},
    }


def build_all():
    docs = {}
    docs["coop1"] = coop("coop1", "Collision avoidance with an RSU: a parked firetruck hides a vehicle "
                         "crossing from the left; an elevated roadside unit shares its detections.",
                         [rsu()], ["rsu"])
    docs["coop2"] = coop("coop2", "Same intersection as coop1 with a parked spectator vehicle on the far "
                         "side of the junction instead of the roadside unit.",
                         [spectator()], ["spectator"])
    docs["coop3"] = arterial("coop3", "Object detection in heavy traffic with two parked spectator vehicles "
                             "sharing detections.", "spectator", "ground")
    docs["coop4"] = arterial("coop4", "The coop3 traffic scene with the spectator vehicles replaced by "
                             "elevated roadside units at the same spots.", "rsu", "elevated")
    jam_lane = {"id": "N2", "points": [[HALF + LANE_W, 4.0], [HALF + LANE_W, 100.0]]}
    variants = {"coop5": (10, 8.0), "coop6": (10, 10.0), "coop7": (7, 8.0), "coop8": (7, 10.0)}
    for name, (count, speed) in variants.items():
        docs[name] = coop(
            name, f"Intersection with an RSU and a spectator vehicle; {count} queued vehicles on the "
            f"outbound lanes obstruct the spectator's view; crossing vehicle at {speed:g} m/s.",
            [rsu(), spectator()], ["rsu", "spectator"],
            traffic={"region": [0.0, 6.5, 7.0, 66.5], "count": count, "min_gap": 1.0, "speed": 0.0},
            incoming_speed=speed, extra_lanes=[jam_lane])
    two_lane = straight(["A", "B"], 250.0, [-HALF, HALF])
    two_lane[0]["left"] = "B"
    two_lane[1]["right"] = "A"
    docs["pipeline1"] = pipeline(
        "pipeline1", "The ego vehicle overtakes two slow vehicles ahead using the free left lane.",
        two_lane, [ego("A", 10.0, 8.0, PIPELINE_SENSOR), lead("lead1", "A", 40.0, 4.0), lead("lead2", "A", 75.0, 4.0)],
        timeout=45.0)
    docs["pipeline2"] = pipeline(
        "pipeline2", "The ego vehicle follows a slower vehicle on a single lane and keeps a safe distance.",
        straight(["A"], 300.0, [-HALF]), [ego("A", 10.0, 8.0, PIPELINE_SENSOR), lead("lead", "A", 45.0, 6.0)],
        timeout=30.0, adversary="lead")
    docs["pipeline3"] = pipeline(
        "pipeline3", "A traffic light on the route shows red for 4 s, then green.",
        straight(["A"], 200.0, [-HALF]), [ego("A", 40.0, 6.0, PIPELINE_SENSOR)],
        controls=[{"kind": "light", "lane": "A", "s": 60.0, "schedule": [["red", 4.0], ["green", None]]}],
        timeout=30.0)
    docs["pipeline4"] = pipeline(
        "pipeline4", "A stop sign on the route: stop fully, wait, then continue.",
        straight(["A"], 200.0, [-HALF]), [ego("A", 10.0, 10.0, PIPELINE_SENSOR)],
        controls=[{"kind": "stop", "lane": "A", "s": 60.0}], timeout=30.0)
    return docs


def main(argv=None):
    DATA.mkdir(parents=True, exist_ok=True)
    for name, doc in build_all().items():
        spec = from_dict(doc)
        text = yaml.safe_dump(to_dict(spec), sort_keys=False, default_flow_style=None, width=100)
        (DATA / f"{name}.yaml").write_text(text)
        print(f"wrote {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
