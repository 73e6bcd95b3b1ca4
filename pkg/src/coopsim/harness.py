"""Episode execution, metrics, batch statistics and output files."""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .control import Controller, Override
from .edge_ai import Channel, ChannelConfig, FusionConfig, fuse, parse_latency
from .errors import DomainError, IoError
from .geometry import Polyline, rect_gap, rects_overlap
from .perception import DetectionFrame, PerceptionConfig, perceive, sense_traffic_control
from .planning import (BehaviorKind, BoxTracker, PlannerConfig, PlannerMemory, RoutePath, TriggerZone,
                       must_brake_hard, plan_behavior, plan_global, plan_trajectory)
from .scenarios.schema import AgentDoc, ScenarioSpec
from .sensing import SensorConfig
from .world import (ControlPoint, Height, LaneGraph, Obstacle, Pose2D, Role, WorldState, spawn_by_location,
                    spawn_by_range, step_kinematics)

CSV_SCHEMA_VERSION = 1
SUMMARY_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "tick", "time", "ego_x", "ego_y", "ego_yaw", "ego_speed", "behavior", "fused_count",
    "ego_detections", "source_detections", "adversary_seen_by_ego", "adversary_in_fused",
    "sent", "dropped", "delivered", "adversary_gap",
)
GOAL_TOLERANCE = 1.0
DEFAULT_EPISODES = 30
PARTICIPANT_SETS = ("none", "vehicle", "rsu", "both")
TRAFFIC_STREAM_ID = -1


def substream(seed: int, agent_id: int, purpose: str, extra: int = 0) -> np.random.Generator:
    """Independent generator for one (episode seed, agent, purpose) triple."""
    if seed < 0:
        raise DomainError("seeds must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([seed, agent_id + 1, zlib.crc32(purpose.encode()), extra]))


# -- overrides --------------------------------------------------------------------

@dataclass(frozen=True)
class Overrides:
    latency: Optional[str] = None
    drop: Optional[float] = None
    participants: Optional[str] = None
    perception: Optional[str] = None

    def echo(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def participants_for(spec: ScenarioSpec, which: str) -> tuple[str, ...]:
    if which not in PARTICIPANT_SETS:
        raise DomainError(f"participants must be one of {PARTICIPANT_SETS}, got {which!r}")
    roles = {"none": (), "vehicle": (Role.SPECTATOR,), "rsu": (Role.RSU,),
             "both": (Role.SPECTATOR, Role.RSU)}[which]
    return tuple(a.name for a in spec.agents if a.role in roles and a.sensor is not None)


def apply_overrides(spec: ScenarioSpec, ov: Overrides) -> ScenarioSpec:
    """Copy of ``spec`` with the run-time overrides applied to channels and the ego pipeline."""
    chan_update = {}
    if ov.latency is not None:
        parse_latency(ov.latency)
        chan_update["latency"] = ov.latency
    if ov.drop is not None:
        if not 0.0 <= ov.drop <= 1.0:
            raise DomainError(f"drop rate must be in [0, 1], got {ov.drop}")
        chan_update["drop_rate"] = float(ov.drop)
    update = {}
    agents = spec.agents
    if chan_update:
        update["channel"] = spec.channel.model_copy(update=chan_update)
        agents = tuple(a.model_copy(update={"channel": a.channel.model_copy(update=chan_update)})
                       if a.channel is not None else a for a in agents)
    pipe_update = {}
    if ov.participants is not None:
        pipe_update["participants"] = participants_for(spec, ov.participants)
    if ov.perception is not None:
        if ov.perception not in ("oracle", "noisy"):
            raise DomainError(f"perception must be 'oracle' or 'noisy', got {ov.perception!r}")
        pipe_update["perception"] = ov.perception
        agents = tuple(a.model_copy(update={"perception": None}) for a in agents)
    if pipe_update:
        update["pipeline"] = spec.pipeline.model_copy(update=pipe_update)
    update["agents"] = agents
    return spec.model_copy(update=update)


# -- world construction -----------------------------------------------------------

def build_graph(spec: ScenarioSpec) -> LaneGraph:
    m = spec.map
    graph = LaneGraph.from_polylines(
        {lane.id: list(lane.points) for lane in m.lanes},
        {lane.id: (lane.left, lane.right) for lane in m.lanes},
        m.connections)
    controls = []
    for c in m.controls:
        x, y, _ = graph.polyline(c.lane).point_at(c.s)
        controls.append(ControlPoint(c.kind, c.lane, c.s, x, y, tuple(c.schedule)))
    return graph.with_controls(controls)


def sensor_config(doc: AgentDoc) -> Optional[SensorConfig]:
    if doc.sensor is None:
        return None
    s = doc.sensor
    height = s.height or (Height.ELEVATED if doc.role is Role.RSU else Height.GROUND)
    return SensorConfig(s.fov, s.range, Pose2D(*s.offset), height)


def perception_config(spec: ScenarioSpec, doc: AgentDoc) -> PerceptionConfig:
    p = doc.perception
    mode = p.mode if p is not None else spec.pipeline.perception
    if mode == "oracle":
        return PerceptionConfig.oracle()
    base = PerceptionConfig.noisy()
    if p is None:
        return base
    return PerceptionConfig.noisy(
        base.p_detect if p.p_detect is None else p.p_detect,
        base.sigma_pos if p.sigma_pos is None else p.sigma_pos,
        base.sigma_ext if p.sigma_ext is None else p.sigma_ext)


def planner_config(spec: ScenarioSpec) -> PlannerConfig:
    fields = {k: v for k, v in spec.pipeline.planner.model_dump().items() if v is not None}
    return PlannerConfig(v_des=spec.pipeline.v_des, **fields)


class LaneMotion:
    """Scripted travel along a lane polyline with a piecewise-constant speed schedule."""

    def __init__(self, polyline: Polyline, s0: float, schedule: Sequence[tuple[float, float]]):
        self.polyline = polyline
        self.s0 = s0
        self.schedule = tuple(schedule)

    def speed_at(self, t: float) -> float:
        v = self.schedule[0][1]
        for ti, vi in self.schedule:
            if ti <= t:
                v = vi
        return v

    def s_at(self, t: float) -> float:
        s = self.s0
        for i, (ti, vi) in enumerate(self.schedule):
            t_next = self.schedule[i + 1][0] if i + 1 < len(self.schedule) else math.inf
            if t <= ti:
                break
            s += vi * (min(t, t_next) - ti)
        return s

    def pose_at(self, t: float) -> tuple[Pose2D, float]:
        x, y, heading = self.polyline.point_at(self.s_at(t))
        return Pose2D(x, y, heading), self.speed_at(t)


@dataclass
class Participant:
    agent_id: int
    name: str
    sensor: SensorConfig
    perception: PerceptionConfig
    channel: Channel
    rng: np.random.Generator


@dataclass
class EpisodeSetup:
    world: WorldState
    ids: dict[str, int]
    motions: dict[int, LaneMotion]
    participants: list[Participant]
    ego_sensor: SensorConfig
    ego_perception: PerceptionConfig
    ego_rng: np.random.Generator
    adversary: Optional[int]


def _agent_pose(graph: LaneGraph, doc: AgentDoc) -> Pose2D:
    if doc.pose is not None:
        return Pose2D(*doc.pose)
    x, y, heading = graph.polyline(doc.lane).point_at(doc.s)
    return Pose2D(x, y, heading)


def build_episode(spec: ScenarioSpec, seed: int) -> EpisodeSetup:
    """World at t = 0: ego first (id 0), listed agents next, background traffic last."""
    graph = build_graph(spec)
    world = WorldState(graph, dt=spec.dt, weather_factor=spec.weather)
    world.static_obstacles = [Obstacle(Pose2D(*o.pose), tuple(o.half_extents), o.height, o.name)
                              for o in spec.map.obstacles]
    ordered = [spec.ego] + [a for a in spec.agents if a.role is not Role.EGO]
    ids: dict[str, int] = {}
    motions: dict[int, LaneMotion] = {}
    sensors: dict[str, SensorConfig] = {}
    for doc in ordered:
        sensor = sensor_config(doc)
        height = sensor.mount_height if sensor is not None else Height.GROUND
        aid = spawn_by_location(world, doc.role, _agent_pose(graph, doc), half_extents=tuple(doc.half_extents),
                                speed=doc.speed, mount_height=height)
        ids[doc.name] = aid
        if sensor is not None:
            sensors[doc.name] = sensor
        if doc.role in (Role.EGO, Role.RSU):
            continue
        if doc.script is not None:
            motions[aid] = LaneMotion(graph.polyline(doc.lane), doc.s, doc.script)
        elif doc.lane is not None and doc.speed > 0:
            motions[aid] = LaneMotion(graph.polyline(doc.lane), doc.s, ((0.0, doc.speed),))

    traffic = spec.background_traffic
    if traffic is not None and traffic.count > 0:
        if traffic.seed is not None:
            rng = substream(traffic.seed, TRAFFIC_STREAM_ID, "traffic")
        else:
            rng = substream(seed, TRAFFIC_STREAM_ID, "traffic")
        placed = spawn_by_range(world, tuple(traffic.region), traffic.count, traffic.min_gap, rng,
                                speed=traffic.speed)
        if traffic.speed > 0:
            for aid in placed:
                a = world.agents[aid]
                lane_id, s, _ = graph.nearest_lane(a.pose.x, a.pose.y, a.pose.yaw)
                motions[aid] = LaneMotion(graph.polyline(lane_id), s, ((0.0, traffic.speed),))

    participants = []
    for name in spec.pipeline.participants:
        doc = spec.agent(name)
        aid = ids[name]
        chan_doc = doc.channel or spec.channel
        cfg = ChannelConfig(parse_latency(chan_doc.latency), chan_doc.drop_rate, chan_doc.seed)
        channel = Channel(cfg, substream(seed, aid, "channel", chan_doc.seed))
        participants.append(Participant(aid, name, sensors[name], perception_config(spec, doc), channel,
                                        substream(seed, aid, "perception")))
    ego = spec.ego
    return EpisodeSetup(
        world, ids, motions, participants, sensors[ego.name], perception_config(spec, ego),
        substream(seed, ids[ego.name], "perception"),
        ids[spec.adversary] if spec.adversary is not None else None)


# -- metrics ------------------------------------------------------------------------

def min_distance_update(ego_corners: np.ndarray, other_corners: np.ndarray) -> float:
    """Gap between two oriented rectangles; 0 when they touch or overlap."""
    return rect_gap(np.asarray(ego_corners, dtype=float), np.asarray(other_corners, dtype=float))


@dataclass(frozen=True)
class TickRecord:
    tick: int
    time: float
    ego_x: float
    ego_y: float
    ego_yaw: float
    ego_speed: float
    behavior: str
    fused_count: int
    ego_detections: int
    source_detections: tuple[tuple[int, int], ...]
    adversary_seen_by_ego: bool
    adversary_in_fused: bool
    sent: int
    dropped: int
    delivered: int
    adversary_gap: Optional[float]

    def csv_row(self) -> list[str]:
        def num(v: Optional[float]) -> str:
            return "" if v is None else f"{v:.6f}"
        return [
            str(self.tick), f"{self.time:.4f}", num(self.ego_x), num(self.ego_y), num(self.ego_yaw),
            num(self.ego_speed), self.behavior, str(self.fused_count), str(self.ego_detections),
            ";".join(f"{s}:{n}" for s, n in self.source_detections),
            str(int(self.adversary_seen_by_ego)), str(int(self.adversary_in_fused)),
            str(self.sent), str(self.dropped), str(self.delivered), num(self.adversary_gap),
        ]


@dataclass
class EpisodeResult:
    scenario: str
    seed: int
    collision: bool
    min_distance: float
    ticks: int
    termination: str
    log: list[TickRecord] = field(default_factory=list)
    first_adversary_detection: Optional[int] = None
    trigger_tick: Optional[int] = None

    def __post_init__(self):
        if self.collision:
            self.min_distance = 0.0

    @property
    def fused_counts(self) -> list[int]:
        return [r.fused_count for r in self.log]

    @property
    def ego_counts(self) -> list[int]:
        return [r.ego_detections for r in self.log]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.log:
            w.writerow(r.csv_row())
        return buf.getvalue()


# -- episode loop -------------------------------------------------------------------

def _route_for(graph: LaneGraph, spec: ScenarioSpec) -> RoutePath:
    ego = spec.ego
    goal_lane = graph.lanes[spec.pipeline.goal.lane]
    goal = goal_lane.nodes[spec.pipeline.goal.index]
    lane_id = ego.lane
    if lane_id is None:
        lane_id, _, _ = graph.nearest_lane(ego.pose[0], ego.pose[1], ego.pose[2])
    start = graph.lanes[lane_id].nodes[0]
    return RoutePath(graph, plan_global(graph, start, goal))


def _near(p: Pose2D, ha: tuple[float, float], q: Pose2D, hb: tuple[float, float]) -> bool:
    return math.hypot(p.x - q.x, p.y - q.y) <= math.hypot(*ha) + math.hypot(*hb)


def _collides(world: WorldState, ego_id: int) -> bool:
    ego = world.agents[ego_id]
    ego_c = ego.corners()
    for a in world.agents.values():
        if a.id == ego_id or a.role is Role.RSU or not _near(ego.pose, ego.half_extents, a.pose, a.half_extents):
            continue
        if rects_overlap(ego_c, a.corners()):
            return True
    return any(rects_overlap(ego_c, o.corners()) for o in world.static_obstacles
               if _near(ego.pose, ego.half_extents, o.pose, o.half_extents))


def _safety_gap(world: WorldState, ego_id: int, adversary: Optional[int]) -> float:
    ego_c = world.agents[ego_id].corners()
    if adversary is not None:
        return min_distance_update(ego_c, world.agents[adversary].corners())
    gaps = [min_distance_update(ego_c, a.corners()) for a in world.agents.values()
            if a.id != ego_id and a.role is not Role.RSU]
    return min(gaps, default=math.inf)


def run_episode(spec: ScenarioSpec, seed: int) -> EpisodeResult:
    """Run one seeded episode to termination.

    Tick order: perceive, transmit, poll and fuse, plan, control, move,
    then advance the clock, move scripted agents and check for contact.
    """
    setup = build_episode(spec, seed)
    world = setup.world
    ego_id = setup.ids[spec.ego.name]
    adversary = setup.adversary
    graph = world.lane_graph
    path = _route_for(graph, spec)
    pcfg = planner_config(spec)
    fcfg = FusionConfig(spec.pipeline.fusion.iou_threshold, spec.pipeline.fusion.stale_horizon)
    zones = [TriggerZone(tuple(z.rect), z.t_on, z.t_off) for z in spec.trigger_zones]
    controller = Controller()
    tracker = BoxTracker()
    memory = PlannerMemory()
    max_ticks = int(math.floor(spec.termination.timeout / spec.dt + 1e-9))

    log: list[TickRecord] = []
    collision = _collides(world, ego_id)
    min_gap = 0.0 if collision else _safety_gap(world, ego_id, adversary)
    termination = "collision" if collision and spec.termination.collision else None
    first_seen = None
    trigger_tick = None
    latest: dict[int, DetectionFrame] = {}

    while termination is None:
        now = world.time
        ego = world.agents[ego_id]
        own = perceive(ego, setup.ego_sensor, setup.ego_perception, world, setup.ego_rng)
        frames = [own]
        sent = dropped = delivered = 0
        per_source = []
        for p in setup.participants:
            frame = perceive(world.agents[p.agent_id], p.sensor, p.perception, world, p.rng)
            item = p.channel.send(frame, now)
            sent += 1
            dropped += int(item.dropped)
            for got in p.channel.poll(now):
                delivered += 1
                dets = tuple(d for d in got.detections if d.truth_id != ego_id)
                per_source.append((got.source_id, len(dets)))
                held = latest.get(got.source_id)
                if held is None or got.stamp >= held.stamp:
                    latest[got.source_id] = DetectionFrame(got.source_id, got.stamp, dets)
        # newest frame per source, until it ages past the stale horizon
        frames.extend(latest[k] for k in sorted(latest))
        fused = fuse(frames, fcfg, now)
        tracked = tracker.update(fused, now)

        control = sense_traffic_control(ego, world, setup.ego_sensor) if graph.controls else None
        behavior = plan_behavior(ego, tracked, path, control, zones, pcfg, memory=memory, now=now, dt=world.dt)
        traj = plan_trajectory(path, behavior, ego, pcfg)
        hard = must_brake_hard(behavior, ego, controller.cfg.a_max, pcfg)
        controller.override = Override.stop() if hard else Override()
        accel, steer = controller.step(ego, traj, world.dt)

        adv_seen = adversary is not None and any(d.truth_id == adversary for d in own.detections)
        adv_fused = adversary is not None and any(
            d.truth_id == adversary for f in frames for d in f.detections)
        if adv_seen and first_seen is None:
            first_seen = world.tick
        if behavior.kind is BehaviorKind.TRIGGER_STOP and trigger_tick is None:
            trigger_tick = world.tick
        adv_gap = None
        if adversary is not None:
            adv_gap = min_distance_update(ego.corners(), world.agents[adversary].corners())
        log.append(TickRecord(world.tick, now, ego.pose.x, ego.pose.y, ego.pose.yaw, ego.speed,
                              behavior.label(), len(fused), len(own), tuple(per_source), adv_seen, adv_fused,
                              sent, dropped, delivered, adv_gap))

        world.update_agent(step_kinematics(ego, (accel, steer), world.dt))
        world.advance()
        t = world.time
        for aid, motion in setup.motions.items():
            pose, speed = motion.pose_at(t)
            a = world.agents[aid]
            world.update_agent(type(a)(a.id, a.role, pose, speed, a.half_extents, a.mount_height, a.wheelbase))

        if _collides(world, ego_id):
            collision = True
            min_gap = 0.0
            if spec.termination.collision:
                termination = "collision"
                break
        else:
            min_gap = min(min_gap, _safety_gap(world, ego_id, adversary))
        ego = world.agents[ego_id]
        if spec.termination.goal:
            s, _, _ = path.polyline.project(ego.pose.x, ego.pose.y)
            if s >= path.length - GOAL_TOLERANCE:
                termination = "goal"
                break
        if world.tick >= max_ticks:
            termination = "timeout"

    return EpisodeResult(spec.name, seed, collision, min_gap, len(log), termination, log, first_seen, trigger_tick)


# -- batches --------------------------------------------------------------------------

@dataclass
class BatchStats:
    n_total: int
    n_cf: int
    min_distance_mean: Optional[float]
    min_distance_std: Optional[float]
    fused_count_mean: list[float]
    ego_count_mean: list[float]
    seeds: list[int]
    results: list[EpisodeResult] = field(default_factory=list, repr=False)

    @property
    def success_rate(self) -> float:
        return self.n_cf * 100 / self.n_total

    @classmethod
    def from_results(cls, results: Sequence[EpisodeResult]) -> "BatchStats":
        if not results:
            raise DomainError("a batch needs at least one episode")
        results = sorted(results, key=lambda r: r.seed)
        n_total = len(results)
        n_cf = sum(1 for r in results if not r.collision)
        dists = [r.min_distance for r in results]
        mean = std = None
        if all(math.isfinite(d) for d in dists):
            mean = math.fsum(dists) / n_total
            std = statistics.stdev(dists) if n_total > 1 else 0.0
        return cls(n_total, n_cf, mean, std, _series_mean([r.fused_counts for r in results]),
                   _series_mean([r.ego_counts for r in results]), [r.seed for r in results], list(results))


def _series_mean(series: list[list[int]]) -> list[float]:
    """Per-tick mean over the episodes still running at that tick."""
    longest = max((len(s) for s in series), default=0)
    out = []
    for k in range(longest):
        vals = [s[k] for s in series if len(s) > k]
        out.append(sum(vals) / len(vals))
    return out


def run_batch(spec: ScenarioSpec, n: int = DEFAULT_EPISODES, base_seed: int = 0,
              overrides: Overrides = Overrides()) -> BatchStats:
    """Episodes with seeds base_seed .. base_seed + n - 1 under the given overrides."""
    if n < 1:
        raise DomainError("n must be at least 1")
    spec = apply_overrides(spec, overrides)
    return BatchStats.from_results([run_episode(spec, base_seed + i) for i in range(n)])


# -- outputs ----------------------------------------------------------------------------

def summary_dict(stats: BatchStats, spec: ScenarioSpec, overrides: Overrides = Overrides()) -> dict:
    effective = apply_overrides(spec, overrides)
    return {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "generator": f"coopsim {__version__}",
        "scenario": spec.name,
        "config": {
            "overrides": overrides.echo(),
            "latency": parse_latency(effective.channel.latency).spec(),
            "drop_rate": effective.channel.drop_rate,
            "participants": list(effective.pipeline.participants),
            "perception": effective.pipeline.perception,
            "dt": effective.dt,
            "timeout": effective.termination.timeout,
        },
        "seeds": stats.seeds,
        "n_total": stats.n_total,
        "n_cf": stats.n_cf,
        "success_rate": stats.success_rate,
        "min_distance_mean": stats.min_distance_mean,
        "min_distance_std": stats.min_distance_std,
        "std_kind": "sample",
        "episodes": [
            {"seed": r.seed, "collision": r.collision,
             "min_distance": r.min_distance if math.isfinite(r.min_distance) else None,
             "ticks": r.ticks, "termination": r.termination,
             "first_adversary_detection_tick": r.first_adversary_detection,
             "trigger_tick": r.trigger_tick}
            for r in stats.results
        ],
        "fused_count_mean": stats.fused_count_mean,
        "ego_count_mean": stats.ego_count_mean,
    }


def detections_svg(series: dict[str, Sequence[float]], dt: float, width: int = 640, height: int = 320) -> str:
    """Static line plot of detected-object count over time, one polyline per setting."""
    pad = 40
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd")
    n_max = max((len(v) for v in series.values()), default=1)
    y_max = max((max(v) for v in series.values() if len(v)), default=1.0) or 1.0
    t_max = max(n_max - 1, 1) * dt

    def sx(i: int) -> float:
        return pad + (i * dt / t_max) * (width - 2 * pad)

    def sy(v: float) -> float:
        return height - pad - (v / y_max) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" font-size="12" text-anchor="middle">time [s] (0 to {t_max:.2f})</text>',
        f'<text x="12" y="{pad - 10}" font-size="12">detected objects (max {y_max:g})</text>',
    ]
    for k, (name, vals) in enumerate(series.items()):
        pts = " ".join(f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(vals))
        color = colors[k % len(colors)]
        parts.append(f'<polyline data-setting="{name}" fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{pts}"/>')
        parts.append(f'<text x="{width - pad - 100}" y="{pad + 14 * k}" font-size="11" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_outputs(stats: BatchStats, spec: ScenarioSpec, out_dir, overrides: Overrides = Overrides()) -> list[Path]:
    """Write episode_<i>.csv, summary.json and detections.svg into ``out_dir``."""
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for i, r in enumerate(stats.results):
            p = out / f"episode_{i}.csv"
            p.write_text(r.to_csv())
            written.append(p)
        p = out / "summary.json"
        p.write_text(json.dumps(summary_dict(stats, spec, overrides), indent=2) + "\n")
        written.append(p)
        p = out / "detections.svg"
        p.write_text(detections_svg({"fused": stats.fused_count_mean, "ego-only": stats.ego_count_mean}, spec.dt))
        written.append(p)
    except OSError as exc:
        raise IoError(str(exc.filename or out), exc.strerror or str(exc)) from exc
    return written

