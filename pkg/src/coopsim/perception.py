"""Detection frames from visibility, plus traffic-control sensing."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError
from .geometry import normalize_angle
from .sensing import SensorConfig, line_of_sight, sensor_pose, visible_targets, world_occluders
from .world import AgentState, LightState, WorldState

MIN_NOISY_HALF_EXTENT = 0.2


@dataclass(frozen=True)
class BoundingBox2D:
    center: tuple[float, float]
    half_extents: tuple[float, float]
    yaw: float = 0.0

    def __post_init__(self):
        if self.half_extents[0] <= 0 or self.half_extents[1] <= 0:
            raise DomainError(f"box half_extents must be positive, got {self.half_extents}")
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    @classmethod
    def of_agent(cls, agent: AgentState) -> "BoundingBox2D":
        return cls((agent.pose.x, agent.pose.y), tuple(agent.half_extents), agent.pose.yaw)

    def to_list(self) -> list[float]:
        return [self.center[0], self.center[1], self.half_extents[0], self.half_extents[1], self.yaw]


@dataclass(frozen=True)
class Detection:
    box: BoundingBox2D
    confidence: float = 1.0
    truth_id: Optional[int] = None


@dataclass(frozen=True)
class DetectionFrame:
    source_id: int
    stamp: float
    detections: tuple[Detection, ...] = ()

    def __post_init__(self):
        if self.stamp < 0:
            raise DomainError("frame stamp must be non-negative")

    def __len__(self) -> int:
        return len(self.detections)


class PerceptionMode(str, Enum):
    ORACLE = "oracle"
    NOISY = "noisy"


@dataclass(frozen=True)
class PerceptionConfig:
    mode: PerceptionMode = PerceptionMode.ORACLE
    p_detect: float = 1.0
    sigma_pos: float = 0.0
    sigma_ext: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_detect <= 1.0:
            raise DomainError("p_detect must be in [0, 1]")
        if self.sigma_pos < 0 or self.sigma_ext < 0:
            raise DomainError("noise sigmas must be non-negative")
        if self.mode is PerceptionMode.ORACLE and (self.p_detect != 1.0 or self.sigma_pos or self.sigma_ext):
            raise DomainError("oracle perception has p_detect 1 and no jitter")

    @classmethod
    def oracle(cls) -> "PerceptionConfig":
        return cls()

    @classmethod
    def noisy(cls, p_detect: float = 0.9, sigma_pos: float = 0.3, sigma_ext: float = 0.1) -> "PerceptionConfig":
        return cls(PerceptionMode.NOISY, p_detect, sigma_pos, sigma_ext)


def perceive(observer: AgentState, sensor: SensorConfig, cfg: PerceptionConfig, world: WorldState,
             rng: Optional[np.random.Generator] = None) -> DetectionFrame:
    """Detection frame for one observer at the current world time.

    Noisy mode draws, per visible target in order: one inclusion uniform, and
    for included targets two center jitters, two extent jitters and a
    confidence. Oracle mode draws nothing.
    """
    ids = visible_targets(observer, sensor, world)
    dets = []
    if cfg.mode is PerceptionMode.ORACLE:
        for tid in ids:
            dets.append(Detection(BoundingBox2D.of_agent(world.agents[tid]), 1.0, tid))
        return DetectionFrame(observer.id, world.time, tuple(dets))
    if rng is None:
        raise DomainError("noisy perception needs an rng")
    for tid in ids:
        if rng.random() >= cfg.p_detect:
            continue
        a = world.agents[tid]
        jx, jy, ex, ey = rng.normal(0.0, 1.0, size=4)
        conf = rng.uniform(0.5, 1.0)
        box = BoundingBox2D(
            (a.pose.x + cfg.sigma_pos * jx, a.pose.y + cfg.sigma_pos * jy),
            (max(MIN_NOISY_HALF_EXTENT, a.half_extents[0] + cfg.sigma_ext * ex),
             max(MIN_NOISY_HALF_EXTENT, a.half_extents[1] + cfg.sigma_ext * ey)),
            a.pose.yaw)
        dets.append(Detection(box, float(conf), tid))
    return DetectionFrame(observer.id, world.time, tuple(dets))


@dataclass(frozen=True)
class TrafficControlReading:
    kind: str  # "light" | "stop"
    state: Optional[LightState]
    distance: float
    s: float = field(default=0.0, compare=False)
    lane: str = field(default="", compare=False)


def sense_traffic_control(observer: AgentState, world: WorldState,
                          sensor: Optional[SensorConfig] = None) -> Optional[TrafficControlReading]:
    """Nearest light or stop sign ahead on the observer's lane, in range and in sight.

    Distance is measured along the lane from the observer's center to the stop line.
    """
    graph = world.lane_graph
    if not graph.controls:
        return None
    sensor = sensor or SensorConfig(fov=360.0)
    sp = sensor_pose(observer, sensor)
    lane_id, s_obs, _ = graph.nearest_lane(observer.pose.x, observer.pose.y, observer.pose.yaw)
    eff_range = sensor.range * world.weather_factor
    occluders = None
    best = None
    for cp in graph.controls:
        if cp.lane != lane_id:
            continue
        ahead = cp.s - s_obs
        if ahead <= 0.0 or ahead > eff_range:
            continue
        if best is not None and ahead >= best[0]:
            continue
        if occluders is None:
            occluders = world_occluders(world, exclude=[observer.id])
        if not line_of_sight((sp.x, sp.y), (cp.x, cp.y), occluders, sensor.mount_height):
            continue
        best = (ahead, cp)
    if best is None:
        return None
    ahead, cp = best
    return TrafficControlReading(cp.kind, cp.state_at(world.time), ahead, cp.s, cp.lane)
