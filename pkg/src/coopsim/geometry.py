"""Planar geometry on oriented rectangles.

Rectangles are given by center, half-extents (half-length along heading,
half-width across it) and yaw. Corner arrays are (4, 2) and counter-clockwise.
"""
from __future__ import annotations

import bisect
import math
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.remainder(angle, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    return a


def rect_corners(cx: float, cy: float, half_length: float, half_width: float, yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    local = ((-half_length, -half_width), (half_length, -half_width),
             (half_length, half_width), (-half_length, half_width))
    return np.array([(cx + c * lx - s * ly, cy + s * lx + c * ly) for lx, ly in local], dtype=float)


def polygon_area(poly: Sequence[Sequence[float]]) -> float:
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return 0.5 * acc


def clip_polygon(subject: list[tuple[float, float]], clipper: np.ndarray) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clipping of ``subject`` by the convex CCW polygon ``clipper``."""
    output = list(subject)
    m = len(clipper)
    for i in range(m):
        if not output:
            break
        ax, ay = clipper[i]
        bx, by = clipper[(i + 1) % m]
        ex, ey = bx - ax, by - ay

        def side(p):
            return ex * (p[1] - ay) - ey * (p[0] - ax)

        inp = output
        output = []
        prev = inp[-1]
        sp = side(prev)
        for cur in inp:
            sc = side(cur)
            if sc >= 0.0:
                if sp < 0.0:
                    output.append(_cross_point(prev, cur, sp, sc))
                output.append(cur)
            elif sp >= 0.0:
                output.append(_cross_point(prev, cur, sp, sc))
            prev, sp = cur, sc
    return output


def _cross_point(p, q, sp, sq):
    t = sp / (sp - sq)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def intersection_area(a: np.ndarray, b: np.ndarray) -> float:
    poly = clip_polygon([tuple(p) for p in a], b)
    return max(0.0, polygon_area(poly))


def iou_corners(a: np.ndarray, b: np.ndarray) -> float:
    area_a = polygon_area(a)
    area_b = polygon_area(b)
    inter = intersection_area(a, b)
    union = area_a + area_b - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def rects_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    """Separating-axis test. Touching rectangles count as overlapping."""
    pa = [(float(x), float(y)) for x, y in a]
    pb = [(float(x), float(y)) for x, y in b]
    for poly in (pa, pb):
        n = len(poly)
        for i in range(n):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % n]
            nx, ny = y0 - y1, x1 - x0
            da = [nx * x + ny * y for x, y in pa]
            db = [nx * x + ny * y for x, y in pb]
            if max(da) < min(db) or max(db) < min(da):
                return False
    return True


def _points_to_edges(points: np.ndarray, poly: np.ndarray) -> float:
    """Smallest distance from any of ``points`` to the closed boundary of ``poly``."""
    a = poly
    d = np.roll(poly, -1, axis=0) - poly
    denom = np.einsum("ij,ij->i", d, d)
    rel = points[:, None, :] - a[None, :, :]
    t = np.einsum("pij,ij->pi", rel, d) / np.where(denom > 0.0, denom, 1.0)
    t = np.clip(t, 0.0, 1.0)
    q = a[None, :, :] + t[:, :, None] * d[None, :, :]
    diff = points[:, None, :] - q
    return float(np.sqrt(np.einsum("pik,pik->pi", diff, diff).min()))


def rect_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance between two convex quadrilaterals; 0 when they overlap."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if rects_overlap(a, b):
        return 0.0
    return min(_points_to_edges(a, b), _points_to_edges(b, a))


def segment_blocked_by_rect(p0, p1, cx, cy, half_length, half_width, yaw, eps: float = 1e-9) -> bool:
    """True iff the open segment p0-p1 passes through the open interior of the rectangle.

    Grazing a corner or running along an edge does not count.
    """
    blocked = segments_blocked(
        np.asarray([p0], dtype=float), np.asarray([p1], dtype=float),
        np.array([[cx, cy, half_length, half_width, yaw]], dtype=float), eps=eps)
    return bool(blocked[0, 0])


def segments_blocked(p0: np.ndarray, p1: np.ndarray, rects: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """Vectorized open-segment vs open-rectangle test.

    p0, p1: (S, 2) segment endpoints. rects: (R, 5) rows of (cx, cy, hl, hw, yaw).
    Returns an (S, R) boolean array.
    """
    p0 = np.asarray(p0, dtype=float).reshape(-1, 2)
    p1 = np.asarray(p1, dtype=float).reshape(-1, 2)
    rects = np.asarray(rects, dtype=float).reshape(-1, 5)
    if len(p0) == 0 or len(rects) == 0:
        return np.zeros((len(p0), len(rects)), dtype=bool)
    cx, cy, hl, hw, yaw = (rects[:, k][None, :] for k in range(5))
    c, s = np.cos(yaw), np.sin(yaw)
    # segment start and direction in each rectangle's local frame
    rx = p0[:, 0:1] - cx
    ry = p0[:, 1:2] - cy
    dx = (p1[:, 0] - p0[:, 0])[:, None]
    dy = (p1[:, 1] - p0[:, 1])[:, None]
    lx0 = c * rx + s * ry
    ly0 = -s * rx + c * ry
    ldx = c * dx + s * dy
    ldy = -s * dx + c * dy

    t_lo = np.zeros(lx0.shape)
    t_hi = np.ones(lx0.shape)
    ok = np.ones(lx0.shape, dtype=bool)
    for o, d, h in ((lx0, ldx, hl), (ly0, ldy, hw)):
        h = np.broadcast_to(h, o.shape)
        par = np.abs(d) < 1e-15
        ok &= ~par | (np.abs(o) < h)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ta = (-h - o) / d
            tb = (h - o) / d
        enter = np.where(par, -np.inf, np.minimum(ta, tb))
        leave = np.where(par, np.inf, np.maximum(ta, tb))
        t_lo = np.maximum(t_lo, enter)
        t_hi = np.minimum(t_hi, leave)
    length = np.hypot(dx, dy)
    return ok & ((t_hi - t_lo) * length > eps)


def point_in_rect_interior(px: float, py: float, cx: float, cy: float, half_length: float,
                           half_width: float, yaw: float) -> bool:
    c, s = math.cos(yaw), math.sin(yaw)
    rx, ry = px - cx, py - cy
    lx = c * rx + s * ry
    ly = -s * rx + c * ry
    return abs(lx) < half_length and abs(ly) < half_width


class Polyline:
    """Piecewise-linear path with arc-length parametrization."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(pts) < 2:
            raise ValueError("polyline needs at least two points")
        seg = np.diff(pts, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seg_len <= 0.0):
            raise ValueError("polyline has repeated consecutive points")
        self.points = pts
        self._seg = seg
        self._seg_len = seg_len
        self.cumulative = np.concatenate(([0.0], np.cumsum(seg_len)))
        self.length = float(self.cumulative[-1])
        self._cum_list = self.cumulative.tolist()
        self._seg_list = [(float(p[0]), float(p[1]), float(d[0]), float(d[1]), float(n), math.atan2(d[1], d[0]))
                          for p, d, n in zip(pts[:-1], seg, seg_len)]

    def project(self, x: float, y: float) -> tuple[float, float, float]:
        """Return (arc length, signed lateral offset [left positive], tangent heading).

        Points beyond either end are extrapolated along the end segments.
        """
        if len(self._seg_list) <= 16:
            return self._project_small(x, y)
        rel = np.array([x, y]) - self.points[:-1]
        t = np.einsum("ij,ij->i", rel, self._seg) / self._seg_len**2
        t_clamped = np.clip(t, 0.0, 1.0)
        near = self.points[:-1] + t_clamped[:, None] * self._seg
        dist = np.hypot(near[:, 0] - x, near[:, 1] - y)
        i = int(np.argmin(dist))
        ti = float(t_clamped[i])
        # extrapolate only past the free ends
        if i == 0 and t[0] < 0.0:
            ti = float(t[0])
        if i == len(dist) - 1 and t[i] > 1.0:
            ti = float(t[i])
        sx, sy = self._seg[i] / self._seg_len[i]
        s = float(self.cumulative[i] + ti * self._seg_len[i])
        lateral = float(sx * rel[i, 1] - sy * rel[i, 0])
        return s, lateral, math.atan2(sy, sx)

    def _project_small(self, x: float, y: float) -> tuple[float, float, float]:
        # scalar twin of the vectorized path, faster for short polylines
        last = len(self._seg_list) - 1
        best = None
        for i, (x0, y0, dx, dy, length, _) in enumerate(self._seg_list):
            rx, ry = x - x0, y - y0
            t = (rx * dx + ry * dy) / (length * length)
            tc = min(max(t, 0.0), 1.0)
            dist = math.hypot(x0 + tc * dx - x, y0 + tc * dy - y)
            if best is None or dist < best[0]:
                best = (dist, i, t, tc, rx, ry)
        _, i, t, ti, rx, ry = best
        if (i == 0 and t < 0.0) or (i == last and t > 1.0):
            ti = t
        x0, y0, dx, dy, length, heading = self._seg_list[i]
        lateral = (dx * ry - dy * rx) / length
        return self._cum_list[i] + ti * length, lateral, heading

    def point_at(self, s: float) -> tuple[float, float, float]:
        """Point and heading at arc length ``s`` (extrapolated linearly past the ends)."""
        i = bisect.bisect_right(self._cum_list, s) - 1
        i = min(max(i, 0), len(self._seg_list) - 1)
        x0, y0, dx, dy, length, heading = self._seg_list[i]
        u = (s - self._cum_list[i]) / length
        return x0 + u * dx, y0 + u * dy, heading

    def is_simple(self) -> bool:
        n = len(self.points) - 1
        for i in range(n):
            for j in range(i + 2, n):
                if _segments_cross(self.points[i], self.points[i + 1], self.points[j], self.points[j + 1]):
                    return False
        return True


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    def on_seg(p, q, r):
        return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])

    return ((o1 == 0 and on_seg(a, b, c)) or (o2 == 0 and on_seg(a, b, d))
            or (o3 == 0 and on_seg(c, d, a)) or (o4 == 0 and on_seg(c, d, b)))
