"""Global routing, behavior selection and trajectory generation."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NoRoute
from .geometry import Polyline, normalize_angle
from .perception import BoundingBox2D, TrafficControlReading
from .world import AgentState, LaneGraph, LightState

ON_LANE_TOL = 0.3
STOPPED_SPEED = 0.05


@dataclass(frozen=True)
class Route:
    nodes: tuple[int, ...]
    cumulative: tuple[float, ...]

    @property
    def length(self) -> float:
        return self.cumulative[-1]


def plan_global(graph: LaneGraph, start: int, goal: int) -> Route:
    """A* over the lane graph with a straight-line heuristic; ties go to the smaller node id."""
    n = len(graph.nodes)
    if not (0 <= start < n and 0 <= goal < n):
        raise DomainError(f"start {start} or goal {goal} not in graph")
    gx, gy = graph.nodes[goal]

    def h(node: int) -> float:
        x, y = graph.nodes[node]
        return math.hypot(gx - x, gy - y)

    g_cost = {start: 0.0}
    parent: dict[int, int] = {}
    heap = [(h(start), start)]
    closed = set()
    while heap:
        _, node = heapq.heappop(heap)
        if node in closed:
            continue
        if node == goal:
            break
        closed.add(node)
        for e in graph.out_edges(node):
            cand = g_cost[node] + e.length
            if cand < g_cost.get(e.dst, math.inf):
                g_cost[e.dst] = cand
                parent[e.dst] = node
                heapq.heappush(heap, (cand + h(e.dst), e.dst))
    else:
        raise NoRoute(f"node {goal} unreachable from {start}")
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()
    cum = [0.0]
    for a, b in zip(path, path[1:]):
        (x0, y0), (x1, y1) = graph.nodes[a], graph.nodes[b]
        cum.append(cum[-1] + math.hypot(x1 - x0, y1 - y0))
    return Route(tuple(path), tuple(cum))


class RoutePath:
    """Route centerline plus the lane bookkeeping needed for lane changes."""

    def __init__(self, graph: LaneGraph, route: Route):
        if len(route.nodes) < 2:
            raise DomainError("route must span at least one edge")
        self.graph = graph
        self.route = route
        self.polyline = Polyline([graph.nodes[i] for i in route.nodes])
        self._seg_lanes = []
        for a, b in zip(route.nodes, route.nodes[1:]):
            lane = next((e.lane for e in graph.out_edges(a) if e.dst == b), "")
            self._seg_lanes.append(lane)

    @property
    def length(self) -> float:
        return self.polyline.length

    def lane_at(self, s: float) -> str:
        i = int(np.searchsorted(self.polyline.cumulative, s, side="right") - 1)
        return self._seg_lanes[min(max(i, 0), len(self._seg_lanes) - 1)]

    def adjacent_offset(self, x: float, y: float, s: float) -> Optional[float]:
        """Signed lateral offset of the overtaking (left, else right) neighbor lane, or None."""
        lane_id = self.lane_at(s)
        lane = self.graph.lanes.get(lane_id)
        if lane is None:
            return None
        for nb in (lane.left, lane.right):
            if nb is None:
                continue
            poly = self.graph.polyline(nb)
            s_nb, _, _ = poly.project(x, y)
            px, py, _ = poly.point_at(s_nb)
            return self.polyline.project(px, py)[1]
        return None


class BehaviorKind(str, Enum):
    LANE_FOLLOW = "LaneFollow"
    CAR_FOLLOW = "CarFollow"
    OVERTAKE = "Overtake"
    STOP_AT_CONTROL = "StopAtControl"
    TRIGGER_STOP = "TriggerStop"
    EMERGENCY_BRAKE = "EmergencyBrake"


class OvertakePhase(str, Enum):
    SHIFT_OUT = "ShiftOut"
    PASS = "Pass"
    SHIFT_IN = "ShiftIn"


@dataclass(frozen=True)
class Behavior:
    kind: BehaviorKind
    lead_gap: Optional[float] = None
    lead_speed: Optional[float] = None
    phase: Optional[OvertakePhase] = None
    stop_distance: Optional[float] = None
    lane_offset: float = 0.0

    def label(self) -> str:
        if self.kind is BehaviorKind.OVERTAKE and self.phase is not None:
            return f"Overtake:{self.phase.value}"
        return self.kind.value


@dataclass(frozen=True)
class PlannerConfig:
    v_des: float = 10.0
    d_emergency: float = 6.0
    d_follow: float = 25.0
    d_overtake: float = 20.0
    delta_v: float = 2.0
    d_control: float = 30.0
    tau_headway: float = 1.5
    d_min: float = 5.0
    gap_gain: float = 0.5
    lane_width: float = 3.5
    a_comfort: float = 3.0
    stop_margin: float = 1.0
    stop_dwell: float = 1.0
    waypoint_spacing: float = 1.0
    horizon: float = 30.0
    pass_back_margin: float = 8.0
    pass_front_margin: float = 10.0
    adjacent_back_window: float = 15.0


@dataclass(frozen=True)
class TriggerZone:
    rect: tuple[float, float, float, float]
    t_on: float = 0.0
    t_off: Optional[float] = None

    def active(self, t: float) -> bool:
        return t >= self.t_on and (self.t_off is None or t <= self.t_off)

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.rect
        return xmin <= x <= xmax and ymin <= y <= ymax


@dataclass(frozen=True)
class TrackedBox:
    box: BoundingBox2D
    velocity: Optional[tuple[float, float]] = None


class BoxTracker:
    """Nearest-neighbor association of fused boxes across ticks to estimate velocities."""

    def __init__(self, gate: float = 3.0, smoothing: float = 0.5, max_age: float = 1.0):
        self.gate = gate
        self.smoothing = smoothing
        self.max_age = max_age
        self._tracks: list[dict] = []

    def update(self, boxes: Sequence[BoundingBox2D], now: float) -> list[TrackedBox]:
        self._tracks = [t for t in self._tracks if now - t["t"] <= self.max_age + 1e-9]
        pairs = []
        for bi, b in enumerate(boxes):
            for ti, t in enumerate(self._tracks):
                d = math.hypot(b.center[0] - t["c"][0], b.center[1] - t["c"][1])
                if d <= self.gate:
                    pairs.append((d, bi, ti))
        pairs.sort()
        used_b, used_t = set(), set()
        match = {}
        for d, bi, ti in pairs:
            if bi in used_b or ti in used_t:
                continue
            used_b.add(bi)
            used_t.add(ti)
            match[bi] = ti
        new_tracks = []
        out = []
        for bi, b in enumerate(boxes):
            vel = None
            if bi in match:
                t = self._tracks[match[bi]]
                elapsed = now - t["t"]
                if elapsed > 0:
                    raw = ((b.center[0] - t["c"][0]) / elapsed, (b.center[1] - t["c"][1]) / elapsed)
                    if t["v"] is None:
                        vel = raw
                    else:
                        a = self.smoothing
                        vel = (t["v"][0] + a * (raw[0] - t["v"][0]), t["v"][1] + a * (raw[1] - t["v"][1]))
                else:
                    vel = t["v"]
            new_tracks.append({"c": b.center, "t": now, "v": vel})
            out.append(TrackedBox(b, vel))
        unmatched = [t for ti, t in enumerate(self._tracks) if ti not in used_t]
        self._tracks = new_tracks + unmatched
        return out


@dataclass
class PlannerMemory:
    phase: Optional[OvertakePhase] = None
    cleared_stops: set = field(default_factory=set)
    stopped_for: float = 0.0


@dataclass(frozen=True)
class _BoxInRoute:
    s: float
    lateral: float
    s_near: float
    s_far: float
    speed: Optional[float]


def _route_frame(path: RoutePath, boxes: Sequence[TrackedBox]) -> list[_BoxInRoute]:
    out = []
    for tb in boxes:
        b = tb.box
        s, lat, tangent = path.polyline.project(*b.center)
        d = normalize_angle(b.yaw - tangent)
        reach = b.half_extents[0] * abs(math.cos(d)) + b.half_extents[1] * abs(math.sin(d))
        speed = None
        if tb.velocity is not None:
            speed = tb.velocity[0] * math.cos(tangent) + tb.velocity[1] * math.sin(tangent)
        out.append(_BoxInRoute(s, lat, s - reach, s + reach, speed))
    return out


def _wants_overtake(lead: _BoxInRoute, gap: float, adj: Optional[float], cfg: PlannerConfig) -> bool:
    slower = lead.speed is not None and lead.speed < cfg.v_des - cfg.delta_v
    return slower and gap <= cfg.d_overtake and adj is not None


def plan_behavior(ego: AgentState, boxes: Sequence[TrackedBox | BoundingBox2D], path: RoutePath,
                  control: Optional[TrafficControlReading] = None,
                  trigger_zones: Sequence[TriggerZone] = (), cfg: PlannerConfig = PlannerConfig(), *,
                  memory: Optional[PlannerMemory] = None, now: float = 0.0, dt: float = 0.05) -> Behavior:
    """Pick exactly one behavior by fixed priority.

    EmergencyBrake > TriggerStop > StopAtControl > Overtake > CarFollow > LaneFollow.
    ``memory`` carries the overtake phase and cleared stop signs between ticks.
    """
    memory = memory if memory is not None else PlannerMemory()
    tracked = [b if isinstance(b, TrackedBox) else TrackedBox(b) for b in boxes]
    s_ego, lat_ego, _ = path.polyline.project(ego.pose.x, ego.pose.y)
    hl = ego.half_extents[0]
    front, rear = s_ego + hl, s_ego - hl
    half_w = cfg.lane_width / 2.0
    in_route = _route_frame(path, tracked)
    adj = path.adjacent_offset(ego.pose.x, ego.pose.y, s_ego)

    # the corridor the ego currently occupies
    cur_off = 0.0
    if adj is not None and abs(lat_ego - adj) < abs(lat_ego):
        cur_off = adj

    def ahead_in(offset: float) -> list[_BoxInRoute]:
        return [b for b in in_route if abs(b.lateral - offset) <= half_w and b.s > s_ego]

    def adjacent_occupied() -> bool:
        lo = s_ego - cfg.adjacent_back_window
        hi = s_ego + cfg.d_overtake + cfg.adjacent_back_window
        return any(abs(b.lateral - adj) <= half_w and lo <= b.s <= hi for b in in_route)

    aborted = False
    if memory.phase in (OvertakePhase.SHIFT_OUT, OvertakePhase.PASS):
        if adj is None or adjacent_occupied():
            memory.phase = None
            aborted = True

    ahead_cur = ahead_in(cur_off)
    if any(b.s_near - front <= cfg.d_emergency for b in ahead_cur):
        return Behavior(BehaviorKind.EMERGENCY_BRAKE, lane_offset=cur_off)

    for zone in trigger_zones:
        if zone.active(now) and any(zone.contains(*tb.box.center) for tb in tracked):
            return Behavior(BehaviorKind.TRIGGER_STOP, lane_offset=cur_off)

    if control is not None and control.distance <= cfg.d_control and control.distance - hl > 0.0:
        key = (control.lane, round(control.s, 6))
        must_stop = False
        if control.kind == "light":
            must_stop = control.state in (LightState.RED, LightState.YELLOW)
        elif key not in memory.cleared_stops:
            must_stop = True
            if ego.speed < STOPPED_SPEED and control.distance - hl <= cfg.stop_margin + 1.5:
                memory.stopped_for += dt
                if memory.stopped_for >= cfg.stop_dwell - 1e-9:
                    memory.cleared_stops.add(key)
                    memory.stopped_for = 0.0
                    must_stop = False
            else:
                memory.stopped_for = 0.0
        if must_stop:
            return Behavior(BehaviorKind.STOP_AT_CONTROL, stop_distance=control.distance, lane_offset=0.0)

    lead_route = min(ahead_in(0.0), key=lambda b: b.s, default=None)

    def lead_behavior(lead: Optional[_BoxInRoute]) -> Behavior:
        if lead is None:
            return Behavior(BehaviorKind.CAR_FOLLOW, lead_gap=math.inf, lead_speed=None)
        return Behavior(BehaviorKind.CAR_FOLLOW, lead_gap=lead.s_near - front, lead_speed=lead.speed)

    if aborted:
        return lead_behavior(lead_route)

    if memory.phase is OvertakePhase.SHIFT_OUT and abs(lat_ego - adj) < ON_LANE_TOL:
        memory.phase = OvertakePhase.PASS
    if memory.phase is OvertakePhase.PASS:
        lo, hi = rear - cfg.pass_back_margin, front + cfg.pass_front_margin
        blocking = [b for b in in_route if abs(b.lateral) <= half_w and b.s_far >= lo and b.s_near <= hi]
        if not blocking:
            memory.phase = OvertakePhase.SHIFT_IN
    if memory.phase is OvertakePhase.SHIFT_IN and abs(lat_ego) < ON_LANE_TOL:
        memory.phase = None
    if memory.phase is OvertakePhase.SHIFT_IN:
        # merging back: keep distance to whoever is ahead in the home lane, or go around them too
        if lead_route is not None:
            gap = lead_route.s_near - front
            if _wants_overtake(lead_route, gap, adj, cfg) and not adjacent_occupied():
                memory.phase = OvertakePhase.SHIFT_OUT
                return Behavior(BehaviorKind.OVERTAKE, phase=memory.phase, lane_offset=adj)
            return Behavior(BehaviorKind.OVERTAKE, lead_gap=gap, lead_speed=lead_route.speed,
                            phase=memory.phase, lane_offset=0.0)
        return Behavior(BehaviorKind.OVERTAKE, phase=memory.phase, lane_offset=0.0)
    if memory.phase is not None:
        return Behavior(BehaviorKind.OVERTAKE, phase=memory.phase, lane_offset=adj)

    lead = min(ahead_cur, key=lambda b: b.s, default=None)
    if lead is not None:
        gap = lead.s_near - front
        if cur_off == 0.0 and _wants_overtake(lead, gap, adj, cfg) and not adjacent_occupied():
            memory.phase = OvertakePhase.SHIFT_OUT
            return Behavior(BehaviorKind.OVERTAKE, phase=memory.phase, lane_offset=adj)
        if gap <= cfg.d_follow:
            return Behavior(BehaviorKind.CAR_FOLLOW, lead_gap=gap, lead_speed=lead.speed)
    return Behavior(BehaviorKind.LANE_FOLLOW)


def must_brake_hard(behavior: Behavior, ego: AgentState, a_max: float, cfg: PlannerConfig = PlannerConfig()) -> bool:
    """True when only full braking still stops the ego in time.

    EmergencyBrake and TriggerStop always qualify; StopAtControl once the
    full-braking distance reaches what is left before the stop point.
    """
    if behavior.kind in (BehaviorKind.EMERGENCY_BRAKE, BehaviorKind.TRIGGER_STOP):
        return True
    if behavior.kind is BehaviorKind.STOP_AT_CONTROL:
        remaining = behavior.stop_distance - cfg.stop_margin - ego.half_extents[0]
        return ego.speed * ego.speed / (2.0 * a_max) >= remaining
    return False


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple[tuple[float, float], ...]
    speeds: tuple[float, ...]

    def __post_init__(self):
        if len(self.waypoints) < 1 or len(self.waypoints) != len(self.speeds):
            raise DomainError("trajectory needs matching, non-empty waypoints and speeds")

    def __len__(self) -> int:
        return len(self.waypoints)


def car_follow_speed(lead_speed: Optional[float], gap: float, ego_speed: float, cfg: PlannerConfig) -> float:
    """Gap law: match the lead inside the desired gap, close in proportionally outside it."""
    if not math.isfinite(gap):
        return cfg.v_des
    v_lead = ego_speed if lead_speed is None else max(0.0, lead_speed)
    desired = max(cfg.d_min, cfg.tau_headway * ego_speed)
    if gap < desired:
        return min(cfg.v_des, v_lead)
    return min(cfg.v_des, v_lead + cfg.gap_gain * (gap - desired))


def plan_trajectory(path: RoutePath, behavior: Behavior, ego: AgentState,
                    cfg: PlannerConfig = PlannerConfig()) -> Trajectory:
    s_ego, lat_ego, _ = path.polyline.project(ego.pose.x, ego.pose.y)
    step = cfg.waypoint_spacing
    horizon = max(cfg.horizon, 3.0 * ego.speed)
    target = behavior.lane_offset
    kind = behavior.kind

    s_end = s_ego + horizon
    if kind is BehaviorKind.STOP_AT_CONTROL:
        s_end = s_ego + behavior.stop_distance - cfg.stop_margin - ego.half_extents[0]
    n = max(1, int(math.ceil((s_end - s_ego) / step)) + 1) if s_end > s_ego else 1
    s_vals = [min(s_ego + k * step, s_end) for k in range(n)] if s_end > s_ego else [s_ego]

    blend = max(10.0, 1.5 * ego.speed)
    lane_change = abs(target - lat_ego) > 0.5
    pts = []
    for s in s_vals:
        off = target
        if lane_change:
            off = lat_ego + (target - lat_ego) * min(1.0, (s - s_ego) / blend)
        x, y, heading = path.polyline.point_at(s)
        pts.append((x - off * math.sin(heading), y + off * math.cos(heading)))

    if kind in (BehaviorKind.EMERGENCY_BRAKE, BehaviorKind.TRIGGER_STOP):
        speeds = [0.0] * len(s_vals)
    elif kind is BehaviorKind.STOP_AT_CONTROL:
        speeds = []
        for s in s_vals:
            remaining = s_end - s
            v = 0.0 if remaining <= 0.3 else min(cfg.v_des, math.sqrt(2.0 * cfg.a_comfort * remaining))
            speeds.append(v)
        speeds[-1] = 0.0
    elif kind is BehaviorKind.CAR_FOLLOW or (kind is BehaviorKind.OVERTAKE and behavior.lead_gap is not None):
        v = car_follow_speed(behavior.lead_speed, behavior.lead_gap, ego.speed, cfg)
        speeds = [v] * len(s_vals)
    else:
        speeds = [cfg.v_des] * len(s_vals)
    return Trajectory(tuple(pts), tuple(speeds))
