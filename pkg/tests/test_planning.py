import math
from itertools import permutations

import numpy as np
import pytest

from coopsim.errors import DomainError, NoRoute
from coopsim.perception import BoundingBox2D, TrafficControlReading
from coopsim.planning import (
    Behavior,
    BehaviorKind,
    BoxTracker,
    OvertakePhase,
    PlannerConfig,
    PlannerMemory,
    RoutePath,
    TrackedBox,
    TriggerZone,
    car_follow_speed,
    must_brake_hard,
    plan_behavior,
    plan_global,
    plan_trajectory,
)
from coopsim.world import AgentState, Lane, LaneGraph, LightState, Pose2D, Role
from conftest import straight_graph, two_lane_graph
from oracles import dijkstra_length


def route_on(graph, lane):
    nodes = graph.lanes[lane].nodes
    return RoutePath(graph, plan_global(graph, nodes[0], nodes[-1]))


def ego_at(x, y=0.0, speed=10.0, yaw=0.0):
    return AgentState(0, Role.EGO, Pose2D(x, y, yaw), speed)


def car(x, y=0.0, vx=None):
    box = BoundingBox2D((x, y), (2.4, 1.0), 0.0)
    return TrackedBox(box, None if vx is None else (vx, 0.0))


class TestGlobalPlanner:
    def test_start_is_goal(self):
        g = straight_graph()
        r = plan_global(g, 3, 3)
        assert r.nodes == (3,) and r.length == 0.0

    def test_prefers_shorter_two_hop_route(self):
        # direct lane bends through a waypoint: 5 + 5 = 10 m; two hops of 4 m each
        g = LaneGraph([(0, 0), (4, 0), (8, 0), (4, 3)],
                      [Lane("hop1", (0, 1)), Lane("hop2", (1, 2)), Lane("bend", (0, 3, 2))])
        r = plan_global(g, 0, 2)
        assert r.nodes == (0, 1, 2) and r.length == pytest.approx(8.0)

    def test_unreachable(self):
        g = LaneGraph([(0, 0), (1, 0), (5, 5)], [Lane("A", (0, 1))])
        with pytest.raises(NoRoute):
            plan_global(g, 0, 2)
        with pytest.raises(DomainError):
            plan_global(g, 0, 9)

    def test_matches_dijkstra_on_random_graphs(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            n = int(rng.integers(2, 51))
            nodes = [tuple(p) for p in rng.uniform(0, 100, size=(n, 2))]
            pairs = {(int(a), int(b)) for a, b in rng.integers(0, n, size=(3 * n, 2)) if a != b}
            lanes = [Lane(f"e{k}", pair) for k, pair in enumerate(sorted(pairs))]
            g = LaneGraph(nodes, lanes)
            edges = [(e.src, e.dst, e.length) for e in g.edges]
            s, t = int(rng.integers(n)), int(rng.integers(n))
            want = dijkstra_length(nodes, edges, s, t)
            if math.isinf(want):
                with pytest.raises(NoRoute):
                    plan_global(g, s, t)
            else:
                assert plan_global(g, s, t).length == pytest.approx(want, abs=1e-9)

    def test_route_arc_length_increases(self):
        g = two_lane_graph()
        r = plan_global(g, g.lanes["R"].nodes[0], g.lanes["R"].nodes[-1])
        assert all(b > a for a, b in zip(r.cumulative, r.cumulative[1:]))


class TestBehavior:
    def setup_method(self):
        self.graph = two_lane_graph()
        self.path = route_on(self.graph, "R")

    def test_default_lane_follow(self):
        assert plan_behavior(ego_at(50), [], self.path).kind is BehaviorKind.LANE_FOLLOW

    def test_trigger_zone_wins_over_geometry(self):
        zone = TriggerZone((200, 40, 210, 60))
        b = plan_behavior(ego_at(50), [car(205, 50)], self.path, trigger_zones=[zone])
        assert b.kind is BehaviorKind.TRIGGER_STOP

    def test_inactive_zone_is_ignored(self):
        zone = TriggerZone((200, 40, 210, 60), t_on=5.0)
        b = plan_behavior(ego_at(50), [car(205, 50)], self.path, trigger_zones=[zone], now=1.0)
        assert b.kind is BehaviorKind.LANE_FOLLOW

    def test_emergency_beats_everything(self):
        zone = TriggerZone((200, 40, 210, 60))
        b = plan_behavior(ego_at(50), [car(50 + 2.4 + 2.4 + 3.0), car(205, 50)], self.path, trigger_zones=[zone])
        assert b.kind is BehaviorKind.EMERGENCY_BRAKE

    def test_slow_lead_with_free_adjacent_lane_overtakes(self):
        lead = car(50 + 4.8 + 15.0, vx=5.0)
        b = plan_behavior(ego_at(50), [lead], self.path)
        assert b.kind is BehaviorKind.OVERTAKE and b.phase is OvertakePhase.SHIFT_OUT
        assert b.lane_offset == pytest.approx(3.5)

    def test_occupied_adjacent_lane_suppresses_overtake(self):
        lead = car(50 + 4.8 + 15.0, vx=5.0)
        b = plan_behavior(ego_at(50), [lead, car(60, 3.5, vx=10.0)], self.path)
        assert b.kind is BehaviorKind.CAR_FOLLOW
        assert b.lead_gap == pytest.approx(15.0)

    def test_overtake_aborts_when_adjacent_fills(self):
        mem = PlannerMemory(phase=OvertakePhase.SHIFT_OUT)
        lead = car(70, vx=5.0)
        b = plan_behavior(ego_at(50, 1.0), [lead, car(55, 3.5, vx=10.0)], self.path, memory=mem)
        assert mem.phase is None and b.kind is BehaviorKind.CAR_FOLLOW

    def test_overtake_phases_progress(self):
        mem = PlannerMemory(phase=OvertakePhase.SHIFT_OUT)
        lead = car(70, vx=5.0)
        b = plan_behavior(ego_at(60, 3.5), [lead], self.path, memory=mem)
        assert b.phase is OvertakePhase.PASS
        b = plan_behavior(ego_at(90, 3.5), [lead], self.path, memory=mem)
        assert b.phase is OvertakePhase.SHIFT_IN and b.lane_offset == 0.0
        b = plan_behavior(ego_at(95, 0.0), [lead], self.path, memory=mem)
        assert mem.phase is None and b.kind is BehaviorKind.LANE_FOLLOW

    def test_red_light_stop_and_green_go(self):
        red = TrafficControlReading("light", LightState.RED, 20.0)
        green = TrafficControlReading("light", LightState.GREEN, 20.0)
        assert plan_behavior(ego_at(50), [], self.path, red).kind is BehaviorKind.STOP_AT_CONTROL
        assert plan_behavior(ego_at(50), [], self.path, green).kind is BehaviorKind.LANE_FOLLOW

    def test_stop_sign_dwell_then_clear(self):
        sign = TrafficControlReading("stop", None, 3.5, s=53.5, lane="R")
        mem = PlannerMemory()
        stopped = ego_at(50, speed=0.0)
        kinds = [plan_behavior(stopped, [], self.path, sign, memory=mem, dt=0.05).kind for _ in range(25)]
        assert kinds[0] is BehaviorKind.STOP_AT_CONTROL
        assert kinds[-1] is BehaviorKind.LANE_FOLLOW
        assert kinds.index(BehaviorKind.LANE_FOLLOW) == 19

    def test_exactly_one_behavior_kind(self):
        b = plan_behavior(ego_at(50), [car(75, vx=9.0)], self.path)
        assert isinstance(b.kind, BehaviorKind)


class TestTrajectory:
    def setup_method(self):
        self.path = route_on(straight_graph(), "A")

    def test_lane_follow_cruise(self):
        t = plan_trajectory(self.path, Behavior(BehaviorKind.LANE_FOLLOW), ego_at(20))
        assert all(abs(y) < 1e-12 for _, y in t.waypoints)
        assert set(t.speeds) == {10.0}
        assert max(math.dist(a, b) for a, b in zip(t.waypoints, t.waypoints[1:])) <= 2.0

    def test_stop_ramp(self):
        b = Behavior(BehaviorKind.STOP_AT_CONTROL, stop_distance=10.0)
        ego = ego_at(20, speed=5.0)
        t = plan_trajectory(self.path, b, ego)
        cfg = PlannerConfig()
        assert t.waypoints[-1][0] == pytest.approx(20 + 10 - cfg.stop_margin - ego.half_extents[0])
        assert t.speeds[-1] == 0.0
        assert all(b <= a for a, b in zip(t.speeds, t.speeds[1:]))

    def test_car_follow_gap_law(self):
        b = Behavior(BehaviorKind.CAR_FOLLOW, lead_gap=12.0, lead_speed=8.0)
        cfg = PlannerConfig(tau_headway=1.6, d_min=5.0)
        t = plan_trajectory(self.path, b, ego_at(20, speed=10.0), cfg)
        assert set(t.speeds) == {8.0}

    def test_gap_law_closes_in_when_far(self):
        cfg = PlannerConfig()
        assert car_follow_speed(5.0, 40.0, 10.0, cfg) == pytest.approx(min(10.0, 5.0 + 0.5 * (40 - 15)))
        assert car_follow_speed(None, math.inf, 3.0, cfg) == cfg.v_des

    def test_brake_behaviors_give_zero_speed(self):
        for kind in (BehaviorKind.EMERGENCY_BRAKE, BehaviorKind.TRIGGER_STOP):
            t = plan_trajectory(self.path, Behavior(kind), ego_at(20))
            assert set(t.speeds) == {0.0}


def test_must_brake_hard():
    ego = ego_at(0, speed=10.0)
    assert must_brake_hard(Behavior(BehaviorKind.TRIGGER_STOP), ego, 4.0)
    assert not must_brake_hard(Behavior(BehaviorKind.LANE_FOLLOW), ego, 4.0)
    far = Behavior(BehaviorKind.STOP_AT_CONTROL, stop_distance=40.0)
    near = Behavior(BehaviorKind.STOP_AT_CONTROL, stop_distance=14.0)
    assert not must_brake_hard(far, ego, 4.0)
    assert must_brake_hard(near, ego, 4.0)


def test_tracker_estimates_velocity():
    tr = BoxTracker()
    for k in range(5):
        out = tr.update([BoundingBox2D((2.0 * k * 0.05 * 10, 0), (2.4, 1.0))], k * 0.05)
    assert out[0].velocity == pytest.approx((20.0, 0.0), rel=1e-6)


def test_tracker_order_free_for_separated_boxes():
    boxes = [BoundingBox2D((30.0 * k, 0), (2.4, 1.0)) for k in range(3)]
    moved = [BoundingBox2D((30.0 * k + 0.5, 0), (2.4, 1.0)) for k in range(3)]
    for perm in permutations(range(3)):
        tr = BoxTracker()
        tr.update(boxes, 0.0)
        out = tr.update([moved[i] for i in perm], 0.05)
        assert all(t.velocity == pytest.approx((10.0, 0.0)) for t in out)
