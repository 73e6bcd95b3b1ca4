"""What an agent's sensors can physically see, and localization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, SingularInnovation
from .geometry import normalize_angle, segments_blocked
from .world import AgentState, Height, Obstacle, Pose2D, Role, WorldState

DEFAULT_PROCESS_NOISE = 0.1
DEFAULT_GPS_SIGMA = 0.5
RANGE_EPS = 1e-9


@dataclass(frozen=True)
class SensorConfig:
    fov: float = 90.0  # degrees, full angle
    range: float = 50.0
    mount_offset: Pose2D = field(default_factory=lambda: Pose2D(0.0, 0.0, 0.0))
    mount_height: Height = Height.GROUND

    def __post_init__(self):
        if not 0.0 < self.fov <= 360.0:
            raise DomainError(f"fov must be in (0, 360], got {self.fov}")
        if self.range <= 0.0:
            raise DomainError(f"range must be positive, got {self.range}")


def _blocks(height: Height, sensor_height: Height) -> bool:
    return not (sensor_height is Height.ELEVATED and height is Height.GROUND)


def _occluder_array(occluders: Iterable[Obstacle], sensor_height: Height) -> np.ndarray:
    rows = [(o.pose.x, o.pose.y, o.half_extents[0], o.half_extents[1], o.pose.yaw)
            for o in occluders if _blocks(o.height, sensor_height)]
    return np.array(rows, dtype=float).reshape(-1, 5)


def line_of_sight(p0: Sequence[float], p1: Sequence[float], occluders: Iterable[Obstacle],
                  sensor_height: Height = Height.GROUND) -> bool:
    """True iff no blocking occluder's interior meets the open segment p0-p1.

    Elevated sensors look over Ground occluders.
    """
    rects = _occluder_array(occluders, sensor_height)
    if len(rects) == 0:
        return True
    return not bool(segments_blocked([p0], [p1], rects)[0].any())


def agent_as_occluder(agent: AgentState) -> Obstacle:
    return Obstacle(agent.pose, agent.half_extents, Height.GROUND, name=f"agent:{agent.id}")


def world_occluders(world: WorldState, exclude: Iterable[int] = ()) -> list[Obstacle]:
    skip = set(exclude)
    obs = list(world.static_obstacles)
    obs.extend(agent_as_occluder(a) for a in world.agents.values() if a.occludes and a.id not in skip)
    return obs


def sensor_pose(observer: AgentState, sensor: SensorConfig) -> Pose2D:
    return observer.pose.compose(sensor.mount_offset)


def visible_targets(observer: AgentState, sensor: SensorConfig, world: WorldState) -> list[int]:
    """Ids of agents whose center is in range, inside the FOV cone and in line of sight.

    Sorted by ascending distance, ties by id. RSUs are infrastructure and are
    never reported as targets.
    """
    sp = sensor_pose(observer, sensor)
    eff_range = sensor.range * world.weather_factor
    half_fov = math.radians(sensor.fov) / 2.0
    cands = []
    for a in world.agents.values():
        if a.id == observer.id or a.role is Role.RSU:
            continue
        dx, dy = a.pose.x - sp.x, a.pose.y - sp.y
        d = math.hypot(dx, dy)
        if d > eff_range + RANGE_EPS:
            continue
        if sensor.fov < 360.0 and d > 0.0:
            if abs(normalize_angle(math.atan2(dy, dx) - sp.yaw)) > half_fov + 1e-12:
                continue
        cands.append((d, a.id))
    if not cands:
        return []
    cands.sort()
    # occluder rows: static first, then every occluding agent; own footprints masked per target
    static = [o for o in world.static_obstacles if _blocks(o.height, sensor.mount_height)]
    movers = [a for a in world.agents.values() if a.occludes and a.id != observer.id]
    if sensor.mount_height is Height.ELEVATED:
        movers = []
    rows = [(o.pose.x, o.pose.y, o.half_extents[0], o.half_extents[1], o.pose.yaw) for o in static]
    rows += [(a.pose.x, a.pose.y, a.half_extents[0], a.half_extents[1], a.pose.yaw) for a in movers]
    rects = np.array(rows, dtype=float).reshape(-1, 5)
    targets = np.array([(world.agents[i].pose.x, world.agents[i].pose.y) for _, i in cands])
    origin = np.repeat([[sp.x, sp.y]], len(cands), axis=0)
    blocked = segments_blocked(origin, targets, rects)
    if movers:
        mover_ids = np.array([a.id for a in movers])
        own = np.zeros_like(blocked)
        own[:, len(static):] = mover_ids[None, :] == np.array([i for _, i in cands])[:, None]
        blocked &= ~own
    clear = ~blocked.any(axis=1)
    return [i for (_, i), ok in zip(cands, clear) if ok]


# -- localization -------------------------------------------------------------

@dataclass(frozen=True)
class LocalizationEstimate:
    position: tuple[float, float]
    velocity: tuple[float, float]
    covariance: np.ndarray  # 4x4 over (x, y, vx, vy)

    @property
    def state(self) -> np.ndarray:
        return np.array([*self.position, *self.velocity], dtype=float)


def _transition(dt: float) -> np.ndarray:
    F = np.eye(4)
    F[0, 2] = F[1, 3] = dt
    return F


def _process_noise(dt: float, q: float) -> np.ndarray:
    # continuous white-noise acceleration, discretized per axis
    block = q * np.array([[dt**3 / 3.0, dt**2 / 2.0], [dt**2 / 2.0, dt]])
    Q = np.zeros((4, 4))
    for axis in (0, 1):
        idx = [axis, axis + 2]
        Q[np.ix_(idx, idx)] = block
    return Q


_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


def kalman_update(est: LocalizationEstimate, gps_measurement: Sequence[float], sigma_gps: float,
                  dt: float, q: float = DEFAULT_PROCESS_NOISE) -> LocalizationEstimate:
    """Constant-velocity predict, then a GPS position update (Joseph form)."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    if sigma_gps < 0 or q < 0:
        raise DomainError("noise levels must be non-negative")
    F = _transition(dt)
    x = F @ est.state
    P = F @ est.covariance @ F.T + _process_noise(dt, q)
    R = np.eye(2) * sigma_gps**2
    S = _H @ P @ _H.T + R
    z = np.asarray(gps_measurement, dtype=float)
    innovation = z - _H @ x
    if abs(np.linalg.det(S)) < 1e-300:
        # noiseless and already consistent: the prediction is the measurement
        if np.all(np.abs(innovation) <= 1e-12):
            P = 0.5 * (P + P.T)
            return LocalizationEstimate((float(z[0]), float(z[1])), (float(x[2]), float(x[3])), P)
        raise SingularInnovation("innovation covariance is singular")
    K = np.linalg.solve(S, _H @ P).T
    x = x + K @ innovation
    I_KH = np.eye(4) - K @ _H
    P = I_KH @ P @ I_KH.T + K @ R @ K.T
    P = 0.5 * (P + P.T)
    return LocalizationEstimate((float(x[0]), float(x[1])), (float(x[2]), float(x[3])), P)


def initial_estimate(position: Sequence[float], sigma: float = 10.0, sigma_v: float = 5.0) -> LocalizationEstimate:
    cov = np.diag([sigma**2, sigma**2, sigma_v**2, sigma_v**2])
    return LocalizationEstimate((float(position[0]), float(position[1])), (0.0, 0.0), cov)


def oracle_localization(agent: AgentState) -> LocalizationEstimate:
    vx = agent.speed * math.cos(agent.pose.yaw)
    vy = agent.speed * math.sin(agent.pose.yaw)
    return LocalizationEstimate((agent.pose.x, agent.pose.y), (vx, vy), np.zeros((4, 4)))
