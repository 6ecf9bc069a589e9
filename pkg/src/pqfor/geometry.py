"""Small planar geometry kernel: hulls, areas, clipping, projections."""
from __future__ import annotations

import numpy as np

EPS = 1e-12


def cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain. Returns CCW vertices without repetition.

    Degenerate inputs come back as one point or a two-point segment.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= EPS:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= EPS:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 2:
        # all points collinear and coincident up to EPS
        return np.array([pts[0], pts[-1]])
    return hull


def shoelace_area(ring) -> float:
    """Signed area of a closed ring (positive for CCW)."""
    ring = np.asarray(ring, dtype=float)
    if len(ring) < 3:
        return 0.0
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def clip_halfplane(ring: np.ndarray, normal, offset: float, eps: float = 1e-12) -> np.ndarray:
    """Clip a convex ring to ``normal . x <= offset`` (Sutherland-Hodgman).

    Vertices within ``eps`` of the line count as inside and are kept
    untouched, so vertices placed exactly on the clip line survive intact.
    """
    ring = np.asarray(ring, dtype=float)
    if len(ring) == 0:
        return ring
    normal = np.asarray(normal, dtype=float)
    scale = max(np.linalg.norm(normal), EPS)
    d = (ring @ normal - offset) / scale
    tol = eps * max(1.0, float(np.abs(ring).max()))
    inside = d <= tol
    out = []
    n = len(ring)
    for i in range(n):
        j = (i + 1) % n
        p, q = ring[i], ring[j]
        if inside[i]:
            out.append(p)
        if n > 1 and (d[i] < -tol and d[j] > tol or d[i] > tol and d[j] < -tol):
            s = d[i] / (d[i] - d[j])
            out.append(p + s * (q - p))
    return dedupe_ring(np.array(out).reshape(-1, 2))


def dedupe_ring(ring: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    if len(ring) <= 1:
        return ring
    scale = max(1.0, float(np.abs(ring).max()))
    keep = [0]
    for i in range(1, len(ring)):
        if np.max(np.abs(ring[i] - ring[keep[-1]])) > tol * scale:
            keep.append(i)
    if len(keep) > 1 and np.max(np.abs(ring[keep[-1]] - ring[keep[0]])) <= tol * scale:
        keep.pop()
    return ring[keep]


def project_convex(ring: np.ndarray, pts: np.ndarray):
    """Nearest point of a convex ring (possibly degenerate) for many points.

    Returns ``(projected, distance)`` with shapes (N, 2) and (N,).
    """
    pts = np.asarray(pts, dtype=float)
    k = len(ring)
    if k == 1:
        proj = np.broadcast_to(ring[0], pts.shape).copy()
        return proj, np.hypot(*(pts - proj).T)
    a = ring
    b = np.roll(ring, -1, axis=0)
    if k == 2:
        a, b = ring[:1], ring[1:]
    e = b - a  # (E, 2)
    len2 = np.einsum("ij,ij->i", e, e)
    rel = pts[:, None, :] - a[None, :, :]  # (N, E, 2)
    t = np.einsum("nej,ej->ne", rel, e) / np.where(len2 > 0, len2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    cand = a[None] + t[..., None] * e[None]
    d2 = np.sum((pts[:, None, :] - cand) ** 2, axis=2)
    best = np.argmin(d2, axis=1)
    rows = np.arange(len(pts))
    proj = cand[rows, best]
    dist = np.sqrt(d2[rows, best])
    if k >= 3:
        cr = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        inside = np.all(cr >= 0.0, axis=1)
        proj[inside] = pts[inside]
        dist[inside] = 0.0
    return proj, dist


def point_in_polygon(ring, pts) -> np.ndarray:
    """Even-odd ray casting for a simple (possibly non-convex) ring.

    Points exactly on an edge may fall either way; callers needing a
    tolerance band should combine with :func:`distance_to_ring`.
    """
    ring = np.asarray(ring, dtype=float)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if len(ring) < 3:
        return np.zeros(len(pts), dtype=bool)
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x1, y1 = ring[:, 0][None], ring[:, 1][None]
    x2, y2 = np.roll(ring[:, 0], -1)[None], np.roll(ring[:, 1], -1)[None]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    hits = straddle & (x < xint)
    return (np.sum(hits, axis=1) % 2) == 1


def distance_to_ring(ring, pts) -> np.ndarray:
    """Distance from points to the closed polyline ``ring``."""
    ring = np.asarray(ring, dtype=float)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if len(ring) == 1:
        return np.hypot(*(pts - ring[0]).T)
    a = ring
    b = np.roll(ring, -1, axis=0)
    e = b - a
    len2 = np.einsum("ij,ij->i", e, e)
    rel = pts[:, None, :] - a[None]
    t = np.clip(np.einsum("nej,ej->ne", rel, e) / np.where(len2 > 0, len2, 1.0), 0.0, 1.0)
    cand = a[None] + t[..., None] * e[None]
    return np.sqrt(np.min(np.sum((pts[:, None, :] - cand) ** 2, axis=2), axis=1))


def is_simple(ring) -> bool:
    """True if no two non-adjacent edges of the closed ring intersect."""
    ring = np.asarray(ring, dtype=float)
    n = len(ring)
    if n < 4:
        return True
    for i in range(n):
        p1, p2 = ring[i], ring[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            q1, q2 = ring[j], ring[(j + 1) % n]
            d1, d2 = cross(p1, p2, q1), cross(p1, p2, q2)
            d3, d4 = cross(q1, q2, p1), cross(q1, q2, p2)
            if d1 * d2 < 0 and d3 * d4 < 0:
                return False
    return True
