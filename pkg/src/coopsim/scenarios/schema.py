"""Scenario document schema.

A scenario is a nested mapping (YAML on disk). Every section forbids unknown
keys; cross references (lanes, agent names) are checked after parsing and
reported with the path of the offending field.
"""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..world import Height, LightState, Role

Vec2 = tuple[float, float]
Vec3 = tuple[float, float, float]
Rect = tuple[float, float, float, float]


class _Doc(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LaneDoc(_Doc):
    id: str
    points: tuple[Vec2, ...] = Field(min_length=2)
    left: Optional[str] = None
    right: Optional[str] = None


class ControlDoc(_Doc):
    kind: Literal["light", "stop"]
    lane: str
    s: float = Field(ge=0)
    # (state, duration seconds); a null duration holds forever
    schedule: tuple[tuple[LightState, Optional[float]], ...] = ()

    @model_validator(mode="after")
    def _schedule(self):
        if self.kind == "light" and not self.schedule:
            raise ValueError("a light needs a phase schedule")
        if self.kind == "stop" and self.schedule:
            raise ValueError("a stop sign has no schedule")
        return self


class ObstacleDoc(_Doc):
    name: str = ""
    pose: Vec3
    half_extents: Vec2
    height: Height = Height.GROUND

    @field_validator("half_extents")
    @classmethod
    def _positive(cls, v):
        if min(v) <= 0:
            raise ValueError("half_extents must be positive")
        return v


class MapDoc(_Doc):
    lanes: tuple[LaneDoc, ...] = Field(min_length=1)
    connections: tuple[tuple[str, str], ...] = ()
    controls: tuple[ControlDoc, ...] = ()
    obstacles: tuple[ObstacleDoc, ...] = ()


class SensorDoc(_Doc):
    fov: float = Field(default=90.0, gt=0, le=360)
    range: float = Field(default=50.0, gt=0)
    offset: Vec3 = (0.0, 0.0, 0.0)
    height: Optional[Height] = None


class PerceptionDoc(_Doc):
    mode: Literal["oracle", "noisy"] = "oracle"
    p_detect: Optional[float] = Field(default=None, ge=0, le=1)
    sigma_pos: Optional[float] = Field(default=None, ge=0)
    sigma_ext: Optional[float] = Field(default=None, ge=0)


class ChannelDoc(_Doc):
    latency: str = "none"
    drop_rate: float = Field(default=0.0, ge=0, le=1)
    seed: int = 0

    @field_validator("latency")
    @classmethod
    def _latency(cls, v):
        from ..edge_ai import parse_latency

        parse_latency(v)
        return v


class AgentDoc(_Doc):
    name: str
    role: Role
    lane: Optional[str] = None
    s: Optional[float] = None
    pose: Optional[Vec3] = None
    speed: float = Field(default=0.0, ge=0)
    half_extents: Vec2 = (2.4, 1.0)
    sensor: Optional[SensorDoc] = None
    perception: Optional[PerceptionDoc] = None
    # piecewise-constant (time, speed) schedule along ``lane``
    script: Optional[tuple[tuple[float, float], ...]] = None
    channel: Optional[ChannelDoc] = None

    @model_validator(mode="after")
    def _placement(self):
        if (self.pose is None) == (self.lane is None):
            raise ValueError("give exactly one of 'pose' or 'lane' (+ 's')")
        if self.lane is not None and self.s is None:
            raise ValueError("'lane' placement needs 's'")
        if min(self.half_extents) <= 0:
            raise ValueError("half_extents must be positive")
        if self.script is not None:
            if self.lane is None:
                raise ValueError("a scripted agent must be placed on a lane")
            times = [t for t, _ in self.script]
            if not times or times[0] != 0.0:
                raise ValueError("script must start at t=0")
            if any(b < a for a, b in zip(times, times[1:])):
                raise ValueError("script times must be non-decreasing")
            if any(v < 0 for _, v in self.script):
                raise ValueError("script speeds must be non-negative")
        if self.role is Role.RSU and self.speed != 0.0:
            raise ValueError("an RSU has speed 0")
        return self


class GoalDoc(_Doc):
    lane: str
    index: int = -1


class FusionDoc(_Doc):
    iou_threshold: float = Field(default=0.3, gt=0, le=1)
    stale_horizon: float = Field(default=1.0, ge=0)


class PlannerDoc(_Doc):
    d_emergency: Optional[float] = Field(default=None, ge=0)
    d_follow: Optional[float] = Field(default=None, ge=0)
    d_overtake: Optional[float] = Field(default=None, ge=0)
    delta_v: Optional[float] = Field(default=None, ge=0)
    d_control: Optional[float] = Field(default=None, ge=0)
    tau_headway: Optional[float] = Field(default=None, ge=0)
    d_min: Optional[float] = Field(default=None, ge=0)
    lane_width: Optional[float] = Field(default=None, gt=0)


class PipelineDoc(_Doc):
    perception: Literal["oracle", "noisy"] = "oracle"
    participants: tuple[str, ...] = ()
    fusion: FusionDoc = FusionDoc()
    v_des: float = Field(default=10.0, gt=0)
    goal: GoalDoc
    planner: PlannerDoc = PlannerDoc()


class TriggerZoneDoc(_Doc):
    rect: Rect
    t_on: float = 0.0
    t_off: Optional[float] = None

    @model_validator(mode="after")
    def _rect(self):
        x0, y0, x1, y1 = self.rect
        if x1 <= x0 or y1 <= y0:
            raise ValueError("rect must be [xmin, ymin, xmax, ymax] with positive size")
        if self.t_off is not None and self.t_off < self.t_on:
            raise ValueError("t_off before t_on")
        return self


class TerminationDoc(_Doc):
    timeout: float = Field(gt=0)
    collision: bool = True
    goal: bool = True


class TrafficDoc(_Doc):
    region: Rect
    count: int = Field(ge=0)
    min_gap: float = Field(default=2.0, ge=0)
    speed: float = Field(default=0.0, ge=0)
    # fixed placement seed; null derives it from the episode seed
    seed: Optional[int] = None


class ScenarioSpec(_Doc):
    name: str
    description: str = ""
    dt: float = Field(default=0.05, gt=0)
    weather: float = Field(default=1.0, gt=0, le=1)
    map: MapDoc
    agents: tuple[AgentDoc, ...] = Field(min_length=1)
    pipeline: PipelineDoc
    channel: ChannelDoc = ChannelDoc()
    trigger_zones: tuple[TriggerZoneDoc, ...] = ()
    termination: TerminationDoc
    background_traffic: Optional[TrafficDoc] = None
    adversary: Optional[str] = None

    @property
    def ego(self) -> AgentDoc:
        return next(a for a in self.agents if a.role is Role.EGO)

    def agent(self, name: str) -> AgentDoc:
        return next(a for a in self.agents if a.name == name)
