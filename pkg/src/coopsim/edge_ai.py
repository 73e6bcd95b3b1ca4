"""V2X channel with transmission latency and frame loss, and late fusion of boxes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .errors import ClockRegression, DomainError
from .geometry import iou_corners, normalize_angle, rect_corners
from .perception import BoundingBox2D, DetectionFrame

# delivery comparisons tolerate float error from tick * dt arithmetic
TIME_EPS = 1e-9


@dataclass(frozen=True)
class NoLatency:
    def spec(self) -> str:
        return "none"


@dataclass(frozen=True)
class Deterministic:
    delay: float

    def __post_init__(self):
        if self.delay < 0:
            raise DomainError("latency must be non-negative")

    def spec(self) -> str:
        return f"det:{self.delay!r}"


@dataclass(frozen=True)
class UniformRandom:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise DomainError("uniform latency needs 0 <= lo <= hi")

    def spec(self) -> str:
        return f"uniform:{self.lo!r},{self.hi!r}"


LatencyModel = Union[NoLatency, Deterministic, UniformRandom]


def parse_latency(text: Union[str, float, int, None]) -> LatencyModel:
    """Parse ``none``, ``det:0.3`` (or a bare number) and ``uniform:0.1,0.5``."""
    if text is None:
        return NoLatency()
    if isinstance(text, (int, float)):
        return Deterministic(float(text)) if text > 0 else NoLatency()
    t = text.strip().lower()
    if t in ("none", "0", ""):
        return NoLatency()
    kind, _, arg = t.partition(":")
    try:
        if kind in ("det", "deterministic"):
            return Deterministic(float(arg))
        if kind in ("uniform", "uni"):
            lo, hi = (float(v) for v in arg.split(","))
            return UniformRandom(lo, hi)
        return Deterministic(float(t))
    except ValueError as exc:
        raise DomainError(f"bad latency spec {text!r}") from exc


@dataclass(frozen=True)
class ChannelConfig:
    latency: LatencyModel = field(default_factory=NoLatency)
    drop_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_rate <= 1.0:
            raise DomainError("drop_rate must be in [0, 1]")


@dataclass
class InFlightFrame:
    frame: DetectionFrame
    send_time: float
    deliver_time: float
    dropped: bool
    seq: int
    delivered: bool = False


@dataclass(frozen=True)
class ChannelEvent:
    kind: str  # send | drop | deliver
    time: float
    seq: int
    source_id: int
    stamp: float


class Channel:
    """One directed link carrying detection frames to a receiver.

    Loss and latency are both decided at send time from two private RNG
    streams, so the drop pattern does not depend on the latency model.
    """

    def __init__(self, config: ChannelConfig, rng: Optional[np.random.Generator] = None):
        self.config = config
        if rng is None:
            rng = np.random.default_rng(config.seed)
        drop_seed, lat_seed = rng.integers(0, 2**63 - 1, size=2)
        self._drop_rng = np.random.default_rng(int(drop_seed))
        self._lat_rng = np.random.default_rng(int(lat_seed))
        self._queue: list[InFlightFrame] = []
        self._last_poll = -math.inf
        self.events: list[ChannelEvent] = []
        self.n_sent = 0
        self.n_dropped = 0
        self.n_delivered = 0

    @property
    def n_in_flight(self) -> int:
        return self.n_sent - self.n_dropped - self.n_delivered

    def _sample_latency(self) -> float:
        lat = self.config.latency
        if isinstance(lat, Deterministic):
            return lat.delay
        if isinstance(lat, UniformRandom):
            return float(self._lat_rng.uniform(lat.lo, lat.hi))
        return 0.0

    def send(self, frame: DetectionFrame, now: float, latency: Optional[float] = None) -> InFlightFrame:
        """Enqueue ``frame``; ``latency`` overrides the sampled delay for this message only."""
        if abs(now - frame.stamp) > TIME_EPS:
            raise DomainError(f"frame stamped {frame.stamp} sent at {now}")
        dropped = bool(self._drop_rng.random() < self.config.drop_rate)
        sampled = self._sample_latency()
        delay = sampled if latency is None else float(latency)
        item = InFlightFrame(frame, now, now + delay, dropped, self.n_sent)
        self.n_sent += 1
        self.events.append(ChannelEvent("send", now, item.seq, frame.source_id, frame.stamp))
        if dropped:
            self.n_dropped += 1
            self.events.append(ChannelEvent("drop", now, item.seq, frame.source_id, frame.stamp))
        else:
            self._queue.append(item)
        return item

    def poll(self, now: float) -> list[DetectionFrame]:
        if now < self._last_poll:
            raise ClockRegression(f"poll at {now} after poll at {self._last_poll}")
        self._last_poll = now
        due = [f for f in self._queue if f.deliver_time <= now + TIME_EPS]
        if not due:
            return []
        self._queue = [f for f in self._queue if f.deliver_time > now + TIME_EPS]
        due.sort(key=lambda f: (f.deliver_time, f.seq))
        for f in due:
            f.delivered = True
            self.n_delivered += 1
            self.events.append(ChannelEvent("deliver", now, f.seq, f.frame.source_id, f.frame.stamp))
        return [f.frame for f in due]

    def drain_events(self) -> list[ChannelEvent]:
        out, self.events = self.events, []
        return out


def channel_send(channel: Channel, frame: DetectionFrame, now: float) -> None:
    channel.send(frame, now)


def channel_poll(channel: Channel, now: float) -> list[DetectionFrame]:
    return channel.poll(now)


# -- fusion ---------------------------------------------------------------------

def box_corners(box: BoundingBox2D) -> np.ndarray:
    return rect_corners(box.center[0], box.center[1], box.half_extents[0], box.half_extents[1], box.yaw)


def oriented_iou(a: BoundingBox2D, b: BoundingBox2D) -> float:
    """Intersection over union of two oriented boxes via convex polygon clipping."""
    ra = math.hypot(*a.half_extents)
    rb = math.hypot(*b.half_extents)
    if math.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1]) >= ra + rb:
        return 0.0
    return iou_corners(box_corners(a), box_corners(b))


@dataclass(frozen=True)
class FusionConfig:
    iou_threshold: float = 0.3
    stale_horizon: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise DomainError("iou_threshold must be in (0, 1]")
        if self.stale_horizon < 0:
            raise DomainError("stale_horizon must be non-negative")


def _mean(values: list[float]) -> float:
    # anchored at the first value so that k equal inputs give that value exactly
    v0 = values[0]
    return v0 + math.fsum(v - v0 for v in values) / len(values)


def _circular_mean(angles: list[float]) -> float:
    a0 = angles[0]
    s = math.fsum(math.sin(a - a0) for a in angles)
    c = math.fsum(math.cos(a - a0) for a in angles)
    return normalize_angle(a0 + math.atan2(s, c))


def fuse_boxes(boxes: list[BoundingBox2D]) -> BoundingBox2D:
    return BoundingBox2D(
        (_mean([b.center[0] for b in boxes]), _mean([b.center[1] for b in boxes])),
        (_mean([b.half_extents[0] for b in boxes]), _mean([b.half_extents[1] for b in boxes])),
        _circular_mean([b.yaw for b in boxes]))


def fuse(frames: Iterable[DetectionFrame], cfg: FusionConfig = FusionConfig(),
         now: Optional[float] = None) -> list[BoundingBox2D]:
    """Greedy seed-first late fusion.

    Frames older than ``now - stale_horizon`` are dropped. Detections are
    pooled in (source id, list) order; each still-unclustered detection seeds
    a cluster that absorbs every unclustered detection whose IoU with the
    seed reaches the threshold. Each cluster is averaged into one box.
    """
    frames = list(frames)
    if now is not None:
        frames = [f for f in frames if f.stamp >= now - cfg.stale_horizon - TIME_EPS]
    frames.sort(key=lambda f: f.source_id)
    pool = [d.box for f in frames for d in f.detections]
    taken = [False] * len(pool)
    out = []
    for i, seed in enumerate(pool):
        if taken[i]:
            continue
        taken[i] = True
        members = [seed]
        for j in range(i + 1, len(pool)):
            if not taken[j] and oriented_iou(seed, pool[j]) >= cfg.iou_threshold:
                taken[j] = True
                members.append(pool[j])
        out.append(seed if len(members) == 1 else fuse_boxes(members))
    return out
