"""Independent reference implementations used to cross-check the simulator."""
from __future__ import annotations

import math

import networkx as nx
import numpy as np
from shapely.geometry import Polygon


def box_polygon(cx, cy, hl, hw, yaw) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    local = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
    return np.array([(cx + c * u - s * v, cy + s * u + c * v) for u, v in local])


def _column_spans(poly: np.ndarray, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertical extent of a convex polygon along each line x = xs[i] (empty gives lo > hi)."""
    lo = np.full(xs.shape, np.inf)
    hi = np.full(xs.shape, -np.inf)
    for k in range(len(poly)):
        (x0, y0), (x1, y1) = poly[k], poly[(k + 1) % len(poly)]
        if x0 == x1:
            continue
        a, b = min(x0, x1), max(x0, x1)
        inside = (xs >= a) & (xs <= b)
        y = y0 + (xs - x0) * (y1 - y0) / (x1 - x0)
        lo = np.where(inside, np.minimum(lo, y), lo)
        hi = np.where(inside, np.maximum(hi, y), hi)
    return lo, hi


def sampled_iou(pa: np.ndarray, pb: np.ndarray, columns: int = 4000) -> float:
    """IoU by midpoint sampling along x; each column's overlap is measured exactly along y."""
    x0 = min(pa[:, 0].min(), pb[:, 0].min())
    x1 = max(pa[:, 0].max(), pb[:, 0].max())
    h = (x1 - x0) / columns
    xs = x0 + h * (np.arange(columns) + 0.5)
    la, ha = _column_spans(pa, xs)
    lb, hb = _column_spans(pb, xs)
    len_a = np.clip(ha - la, 0.0, None)
    len_b = np.clip(hb - lb, 0.0, None)
    inter = np.clip(np.minimum(ha, hb) - np.maximum(la, lb), 0.0, None)
    union = len_a + len_b - inter
    return float(inter.sum() / union.sum())


def polygon_distance(pa: np.ndarray, pb: np.ndarray) -> float:
    return float(Polygon(pa).distance(Polygon(pb)))


def sampled_los(p0, p1, rects, step: float = 1e-3) -> tuple[bool, float]:
    """Sight line check by sampling at ``step`` spacing.

    Returns (clear, depth): depth is the deepest sampled penetration into any
    rectangle interior, so callers can skip cases too close to call.
    """
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    length = float(np.hypot(*(p1 - p0)))
    n = max(2, int(math.ceil(length / step)) + 1)
    t = np.linspace(0.0, 1.0, n)[1:-1]
    pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    depth = 0.0
    for cx, cy, hl, hw, yaw in rects:
        c, s = math.cos(yaw), math.sin(yaw)
        dx, dy = pts[:, 0] - cx, pts[:, 1] - cy
        u = c * dx + s * dy
        v = -s * dx + c * dy
        pen = np.minimum(hl - np.abs(u), hw - np.abs(v))
        if len(pen):
            depth = max(depth, float(pen.max()))
    return depth <= 0.0, depth


def dijkstra_length(nodes, edges, start, goal) -> float:
    g = nx.DiGraph()
    g.add_nodes_from(range(len(nodes)))
    for a, b, w in edges:
        if not g.has_edge(a, b) or g[a][b]["weight"] > w:
            g.add_edge(a, b, weight=w)
    try:
        return nx.dijkstra_path_length(g, start, goal)
    except nx.NetworkXNoPath:
        return math.inf
