"""PID trajectory tracking with rule-based overrides."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError
from .geometry import Polyline
from .planning import Trajectory
from .world import AgentState

A_MAX = 4.0
S_MAX = 0.6


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0


LONGITUDINAL_GAINS = PidGains(0.8, 0.1, 0.05)
LATERAL_GAINS = PidGains(1.2, 0.0, 0.2)


@dataclass(frozen=True)
class PidState:
    gains: PidGains
    limit: float
    integral: float = 0.0
    prev_error: Optional[float] = None

    @classmethod
    def longitudinal(cls, a_max: float = A_MAX) -> "PidState":
        return cls(LONGITUDINAL_GAINS, a_max)

    @classmethod
    def lateral(cls, s_max: float = S_MAX) -> "PidState":
        return cls(LATERAL_GAINS, s_max)


def pid_step(state: PidState, error: float, dt: float) -> tuple[float, PidState]:
    """One PID update; the integral is clamped so ki * integral stays within the output limit."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    g = state.gains
    integral = state.integral + error * dt
    if g.ki > 0.0:
        bound = state.limit / g.ki
        integral = min(max(integral, -bound), bound)
    else:
        integral = 0.0
    deriv = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    out = g.kp * error + g.ki * integral + g.kd * deriv
    out = min(max(out, -state.limit), state.limit)
    return out, replace(state, integral=integral, prev_error=error)


class OverrideKind(str, Enum):
    NONE = "none"
    STOP_MODE = "stop"
    STEER_LIMIT = "steer_limit"


@dataclass(frozen=True)
class Override:
    kind: OverrideKind = OverrideKind.NONE
    max_steer: float = S_MAX

    @classmethod
    def stop(cls) -> "Override":
        return cls(OverrideKind.STOP_MODE)

    @classmethod
    def steer_limit(cls, max_steer: float) -> "Override":
        return cls(OverrideKind.STEER_LIMIT, abs(max_steer))


NO_OVERRIDE = Override()


@dataclass(frozen=True)
class ControllerConfig:
    a_max: float = A_MAX
    s_max: float = S_MAX
    lookahead_min: float = 3.0
    lookahead_time: float = 0.5


def lookahead_error(ego: AgentState, traj: Trajectory, lookahead: float) -> tuple[float, int]:
    """Bearing of the lookahead point in the ego frame, and the index of the nearest waypoint."""
    pts = np.asarray(traj.waypoints, dtype=float)
    index = np.arange(len(pts))
    if len(pts) > 1:
        keep = np.concatenate(([True], np.hypot(*np.diff(pts, axis=0).T) > 1e-9))
        pts, index = pts[keep], index[keep]
    d = np.hypot(pts[:, 0] - ego.pose.x, pts[:, 1] - ego.pose.y)
    near = int(np.argmin(d))
    if len(pts) - near < 2:
        if len(pts) >= 2:
            poly = Polyline(pts[-2:])
            s0, _, _ = poly.project(ego.pose.x, ego.pose.y)
            px, py, _ = poly.point_at(max(s0, poly.length) + lookahead)
        else:
            return 0.0, int(index[near])
    else:
        poly = Polyline(pts[near:])
        s0, _, _ = poly.project(ego.pose.x, ego.pose.y)
        px, py, _ = poly.point_at(s0 + lookahead)
    c, s = math.cos(ego.pose.yaw), math.sin(ego.pose.yaw)
    rx, ry = px - ego.pose.x, py - ego.pose.y
    lx = c * rx + s * ry
    ly = -s * rx + c * ry
    return math.atan2(ly, lx), int(index[near])


def control_step(ego: AgentState, trajectory: Trajectory, override: Override,
                 pid_states: tuple[PidState, PidState], dt: float,
                 cfg: ControllerConfig = ControllerConfig()) -> tuple[float, float, tuple[PidState, PidState]]:
    """Accel and steer commands for one tick, plus updated (longitudinal, lateral) PID states."""
    if len(trajectory) == 0:
        raise DomainError("empty trajectory")
    long_state, lat_state = pid_states
    lookahead = max(cfg.lookahead_min, cfg.lookahead_time * ego.speed)
    heading_err, near = lookahead_error(ego, trajectory, lookahead)
    speed_err = trajectory.speeds[near] - ego.speed
    accel, long_state = pid_step(long_state, speed_err, dt)
    steer, lat_state = pid_step(lat_state, heading_err, dt)
    accel = min(max(accel, -cfg.a_max), cfg.a_max)
    steer = min(max(steer, -cfg.s_max), cfg.s_max)
    if override.kind is OverrideKind.STOP_MODE:
        accel, steer = -cfg.a_max, 0.0
    elif override.kind is OverrideKind.STEER_LIMIT:
        steer = min(max(steer, -override.max_steer), override.max_steer)
    return accel, steer, (long_state, lat_state)


class Controller:
    """Holds one agent's PID states between ticks."""

    def __init__(self, cfg: ControllerConfig = ControllerConfig()):
        self.cfg = cfg
        self.states = (PidState.longitudinal(cfg.a_max), PidState.lateral(cfg.s_max))
        self.override = NO_OVERRIDE

    def step(self, ego: AgentState, trajectory: Trajectory, dt: float) -> tuple[float, float]:
        accel, steer, self.states = control_step(ego, trajectory, self.override, self.states, dt, self.cfg)
        return accel, steer
