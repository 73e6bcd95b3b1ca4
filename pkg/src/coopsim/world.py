"""Simulated world: clock, lane graph, agents, obstacles and the vehicle motion model."""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, OverlapError, PlacementExhausted
from .geometry import Polyline, normalize_angle, rect_corners, rect_gap, rects_overlap

DEFAULT_DT = 0.05
V_MAX = 25.0
MAX_STEER = 0.6
VEHICLE_HALF_EXTENTS = (2.4, 1.0)
DEFAULT_WHEELBASE = 2.5
SPAWN_ATTEMPTS_PER_AGENT = 100


class Role(str, Enum):
    EGO = "ego"
    SPECTATOR = "spectator"
    RSU = "rsu"
    BACKGROUND = "background"
    PEDESTRIAN = "pedestrian"


class Height(str, Enum):
    GROUND = "ground"
    ELEVATED = "elevated"


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    def compose(self, offset: "Pose2D") -> "Pose2D":
        """Pose of ``offset`` (given in this pose's frame) in the world frame."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return Pose2D(self.x + c * offset.x - s * offset.y,
                      self.y + s * offset.x + c * offset.y,
                      self.yaw + offset.yaw)


@dataclass(frozen=True)
class AgentState:
    id: int
    role: Role
    pose: Pose2D
    speed: float = 0.0
    half_extents: tuple[float, float] = VEHICLE_HALF_EXTENTS
    mount_height: Height = Height.GROUND
    wheelbase: float = DEFAULT_WHEELBASE

    def __post_init__(self):
        if self.half_extents[0] <= 0 or self.half_extents[1] <= 0:
            raise DomainError(f"agent {self.id}: half_extents must be positive, got {self.half_extents}")
        if self.role is Role.RSU and self.speed != 0.0:
            raise DomainError(f"agent {self.id}: RSU speed must be 0")

    def corners(self) -> np.ndarray:
        return rect_corners(self.pose.x, self.pose.y, *self.half_extents, self.pose.yaw)

    @property
    def occludes(self) -> bool:
        # RSUs are pole-mounted and are treated as non-blocking
        return self.role is not Role.RSU


@dataclass(frozen=True)
class Obstacle:
    pose: Pose2D
    half_extents: tuple[float, float]
    height: Height = Height.GROUND
    name: str = ""

    def corners(self) -> np.ndarray:
        return rect_corners(self.pose.x, self.pose.y, *self.half_extents, self.pose.yaw)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    length: float
    lane: str


@dataclass(frozen=True)
class Lane:
    id: str
    nodes: tuple[int, ...]
    left: Optional[str] = None
    right: Optional[str] = None


class LightState(str, Enum):
    RED = "red"
    YELLOW = "yellow"
    GREEN = "green"


@dataclass(frozen=True)
class ControlPoint:
    """Traffic light or stop sign attached to a lane at arc length ``s`` (the stop line)."""

    kind: str  # "light" | "stop"
    lane: str
    s: float
    x: float
    y: float
    schedule: tuple[tuple[LightState, Optional[float]], ...] = ()

    def state_at(self, t: float) -> Optional[LightState]:
        if self.kind != "light":
            return None
        start = 0.0
        for state, duration in self.schedule:
            if duration is None or t < start + duration:
                return state
            start += duration
        return self.schedule[-1][0]


class LaneGraph:
    def __init__(self, nodes: Iterable[tuple[float, float]], lanes: Iterable[Lane],
                 extra_edges: Iterable[tuple[int, int]] = (), controls: Iterable[ControlPoint] = ()):
        self.nodes: list[tuple[float, float]] = [(float(x), float(y)) for x, y in nodes]
        self.lanes: dict[str, Lane] = {}
        self.edges: list[Edge] = []
        self._polylines: dict[str, Polyline] = {}
        for lane in lanes:
            if lane.id in self.lanes:
                raise DomainError(f"duplicate lane id {lane.id!r}")
            if len(lane.nodes) < 2:
                raise DomainError(f"lane {lane.id!r} needs at least two nodes")
            for n in lane.nodes:
                if not 0 <= n < len(self.nodes):
                    raise DomainError(f"lane {lane.id!r} references missing node {n}")
            poly = Polyline([self.nodes[n] for n in lane.nodes])
            if not poly.is_simple():
                raise DomainError(f"lane {lane.id!r} self-intersects")
            self.lanes[lane.id] = lane
            self._polylines[lane.id] = poly
            for a, b in zip(lane.nodes, lane.nodes[1:]):
                self.edges.append(Edge(a, b, self._dist(a, b), lane.id))
        for lane in self.lanes.values():
            for nb in (lane.left, lane.right):
                if nb is not None and nb not in self.lanes:
                    raise DomainError(f"lane {lane.id!r} neighbor {nb!r} is undefined")
        for a, b in extra_edges:
            self.edges.append(Edge(a, b, self._dist(a, b), ""))
        self.controls: tuple[ControlPoint, ...] = tuple(controls)
        self._out: dict[int, list[Edge]] = {}
        for e in self.edges:
            self._out.setdefault(e.src, []).append(e)

    @classmethod
    def from_polylines(cls, lanes: dict[str, list[tuple[float, float]]],
                       neighbors: Optional[dict[str, tuple[Optional[str], Optional[str]]]] = None,
                       connections: Iterable[tuple[str, str]] = ()) -> "LaneGraph":
        """Build a graph from coordinate polylines; identical coordinates share a node."""
        neighbors = neighbors or {}
        nodes: list[tuple[float, float]] = []
        index: dict[tuple[float, float], int] = {}
        lane_objs = []
        for lane_id, pts in lanes.items():
            ids = []
            for p in pts:
                key = (float(p[0]), float(p[1]))
                if key not in index:
                    index[key] = len(nodes)
                    nodes.append(key)
                ids.append(index[key])
            left, right = neighbors.get(lane_id, (None, None))
            lane_objs.append(Lane(lane_id, tuple(ids), left, right))
        by_id = {lane.id: lane for lane in lane_objs}
        extra = [(by_id[a].nodes[-1], by_id[b].nodes[0]) for a, b in connections]
        return cls(nodes, lane_objs, extra)

    def _dist(self, a: int, b: int) -> float:
        (x0, y0), (x1, y1) = self.nodes[a], self.nodes[b]
        return math.hypot(x1 - x0, y1 - y0)

    def out_edges(self, node: int) -> list[Edge]:
        return self._out.get(node, [])

    def polyline(self, lane_id: str) -> Polyline:
        return self._polylines[lane_id]

    def nearest_lane(self, x: float, y: float, yaw: Optional[float] = None) -> tuple[str, float, float]:
        """Closest lane to a point as (lane id, arc length, lateral offset).

        With ``yaw`` given, lanes running against the heading are skipped.
        """
        best = None
        for lane_id, poly in self._polylines.items():
            s, lat, heading = poly.project(x, y)
            if yaw is not None and abs(normalize_angle(heading - yaw)) > math.pi / 2:
                continue
            overshoot = max(0.0, -s, s - poly.length)
            key = (math.hypot(lat, overshoot), lane_id)
            if best is None or key < best[0]:
                best = (key, lane_id, s, lat)
        if best is None:
            raise DomainError("no lane matches the query")
        return best[1], best[2], best[3]

    def with_controls(self, controls: Iterable[ControlPoint]) -> "LaneGraph":
        g = copy.copy(self)
        g.controls = tuple(controls)
        return g


@dataclass
class WorldState:
    lane_graph: LaneGraph
    dt: float = DEFAULT_DT
    tick: int = 0
    agents: dict[int, AgentState] = field(default_factory=dict)
    static_obstacles: list[Obstacle] = field(default_factory=list)
    weather_factor: float = 1.0
    next_id: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise DomainError("dt must be positive")

    @property
    def time(self) -> float:
        return self.tick * self.dt

    def advance(self) -> None:
        self.tick += 1

    def update_agent(self, state: AgentState) -> None:
        self.agents[state.id] = state


def _footprint_conflict(world: WorldState, corners: np.ndarray, min_gap: float = 0.0) -> bool:
    for other in world.agents.values():
        oc = other.corners()
        if min_gap > 0.0:
            if rect_gap(corners, oc) < min_gap:
                return True
        elif rects_overlap(corners, oc):
            return True
    return False


def spawn_by_location(world: WorldState, role: Role, pose: Pose2D, *,
                      half_extents: tuple[float, float] = VEHICLE_HALF_EXTENTS,
                      speed: float = 0.0, mount_height: Height = Height.GROUND,
                      wheelbase: float = DEFAULT_WHEELBASE) -> int:
    """Place one agent at ``pose``; raises OverlapError if it would intersect another agent."""
    if role is Role.RSU:
        speed = 0.0
    agent = AgentState(world.next_id, role, pose, speed, tuple(half_extents), mount_height, wheelbase)
    if _footprint_conflict(world, agent.corners()):
        raise OverlapError(f"{role.value} at ({pose.x}, {pose.y}) overlaps an existing agent")
    world.agents[agent.id] = agent
    world.next_id += 1
    return agent.id


def spawn_by_range(world: WorldState, region: tuple[float, float, float, float], count: int,
                   min_gap: float, rng: np.random.Generator, *,
                   half_extents: tuple[float, float] = VEHICLE_HALF_EXTENTS,
                   speed: float = 0.0) -> list[int]:
    """Scatter ``count`` background vehicles on lanes inside an axis-aligned region.

    Candidates are drawn uniformly in the region, snapped to the nearest lane
    centerline with the lane heading, and rejected if the footprint comes
    closer than ``min_gap`` to any agent or static obstacle. On failure the
    world is left untouched.
    """
    if count < 0:
        raise DomainError("count must be non-negative")
    xmin, ymin, xmax, ymax = region
    graph = world.lane_graph
    placed: list[int] = []
    attempts = 0
    budget = SPAWN_ATTEMPTS_PER_AGENT * count
    while len(placed) < count:
        if attempts >= budget:
            for aid in placed:
                del world.agents[aid]
            world.next_id -= len(placed)
            raise PlacementExhausted(f"placed {len(placed)} of {count} agents in {budget} attempts")
        attempts += 1
        x = rng.uniform(xmin, xmax)
        y = rng.uniform(ymin, ymax)
        lane_id, s, _ = graph.nearest_lane(x, y)
        poly = graph.polyline(lane_id)
        if not 0.0 <= s <= poly.length:
            continue
        px, py, heading = poly.point_at(s)
        if not (xmin <= px <= xmax and ymin <= py <= ymax):
            continue
        corners = rect_corners(px, py, *half_extents, heading)
        if _footprint_conflict(world, corners, min_gap if min_gap > 0 else 0.0):
            continue
        if any(rect_gap(corners, ob.corners()) < max(min_gap, 1e-12) for ob in world.static_obstacles):
            continue
        aid = world.next_id
        world.agents[aid] = AgentState(aid, Role.BACKGROUND, Pose2D(px, py, heading), speed, tuple(half_extents))
        world.next_id += 1
        placed.append(aid)
    return placed


def step_kinematics(state: AgentState, control: tuple[float, float], dt: float, *,
                    v_max: float = V_MAX, max_steer: float = MAX_STEER) -> AgentState:
    """One explicit-Euler step of the kinematic bicycle model."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    if state.role is Role.RSU:
        return state
    accel, steer = control
    steer = min(max(steer, -max_steer), max_steer)
    p = state.pose
    v = state.speed
    x = p.x + v * math.cos(p.yaw) * dt
    y = p.y + v * math.sin(p.yaw) * dt
    yaw = p.yaw + (v / state.wheelbase) * math.tan(steer) * dt
    new_speed = min(max(v + accel * dt, 0.0), v_max)
    return replace(state, pose=Pose2D(x, y, yaw), speed=new_speed)


def set_weather(world: WorldState, factor: float) -> WorldState:
    if not 0.0 < factor <= 1.0:
        raise DomainError(f"weather factor must be in (0, 1], got {factor}")
    world.weather_factor = float(factor)
    return world
