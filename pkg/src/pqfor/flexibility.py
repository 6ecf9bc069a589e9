"""PQ flexibility polygons for loads, DER and EV chargers.

A :class:`PQPolygon` is a union of convex cells in the (P, Q) plane, in MW
and Mvar, consumption-positive: P > 0 charges/consumes, P < 0 feeds in.
Circular capability limits are replaced by an inscribed polygon, so every
cell vertex lies on or inside the true capability curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry

__all__ = [
    "PQPolygon",
    "EVChargerSpec",
    "FPU",
    "FPU_KINDS",
    "ev_ac_polygon",
    "ev_dc_polygon",
    "ev_polygon",
    "box_polygon",
    "contains",
    "project",
    "minkowski_sum",
    "cos_phi_limit",
]

FPU_KINDS = ("residential_load", "industrial_load", "wind", "pv", "ev_ac", "ev_dc")

CIRCLE_VERTICES = 64
COS_PHI_THRESHOLD_KVA = 13.8
CHARGE_BAND = 0.05  # fraction of P_n below which charging Q is unregulated
DISCHARGE_BAND = 0.2  # same for feed-in


class PQPolygon:
    """Union of convex CCW cells; immutable."""

    __slots__ = ("cells", "bbox", "_is_box")

    def __init__(self, cells):
        rings = []
        for c in cells:
            ring = geometry.dedupe_ring(np.asarray(c, dtype=float).reshape(-1, 2))
            if len(ring) == 0:
                continue
            if len(ring) >= 3 and geometry.shoelace_area(ring) < 0:
                ring = ring[::-1]
            ring.setflags(write=False)
            rings.append(ring)
        if not rings:
            raise ValueError("polygon needs at least one non-empty cell")
        self.cells = tuple(rings)
        allv = np.vstack(rings)
        self.bbox = (float(allv[:, 0].min()), float(allv[:, 0].max()),
                     float(allv[:, 1].min()), float(allv[:, 1].max()))
        self._is_box = len(rings) == 1 and _is_axis_box(rings[0], self.bbox)

    def __repr__(self):
        return f"PQPolygon({len(self.cells)} cells, bbox={self.bbox})"

    def __eq__(self, other):
        return (isinstance(other, PQPolygon) and len(self.cells) == len(other.cells)
                and all(a.shape == b.shape and np.array_equal(a, b) for a, b in zip(self.cells, other.cells)))

    def __hash__(self):
        return hash(tuple(c.tobytes() for c in self.cells))

    @property
    def vertices(self) -> np.ndarray:
        return np.vstack(self.cells)

    @property
    def is_box(self) -> bool:
        """Single axis-aligned rectangle (projection is a clip)."""
        return self._is_box

    @property
    def is_point(self) -> bool:
        p0, p1, q0, q1 = self.bbox
        return p0 == p1 and q0 == q1

    @property
    def area(self) -> float:
        """Sum of cell areas (cells of the built-in shapes only share edges)."""
        return float(sum(geometry.shoelace_area(c) for c in self.cells))

    def convex_hull(self) -> np.ndarray:
        return geometry.convex_hull(self.vertices)

    # -- queries -------------------------------------------------------------

    def project_many(self, pts) -> tuple[np.ndarray, np.ndarray]:
        """Nearest points of the union for an (N, 2) array; lowest cell wins ties."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if self._is_box:
            p0, p1, q0, q1 = self.bbox
            proj = np.column_stack([np.clip(pts[:, 0], p0, p1), np.clip(pts[:, 1], q0, q1)])
            return proj, np.hypot(*(pts - proj).T)
        best_p, best_d = geometry.project_convex(self.cells[0], pts)
        for cell in self.cells[1:]:
            p, d = geometry.project_convex(cell, pts)
            better = d < best_d
            best_p[better] = p[better]
            best_d[better] = d[better]
        return best_p, best_d

    def contains_many(self, pts, tol: float = 0.0) -> np.ndarray:
        return self.project_many(pts)[1] <= tol

    def q_bounds(self, p: float):
        """(q_min, q_max) of the feasible vertical slice at ``p``, or None."""
        lo, hi = math.inf, -math.inf
        for cell in self.cells:
            s = _slice_cell(cell, p)
            if s is not None:
                lo, hi = min(lo, s[0]), max(hi, s[1])
        return None if lo > hi else (lo, hi)

    def support(self, direction) -> np.ndarray:
        """A vertex maximizing ``<v, direction>``."""
        v = self.vertices
        return v[int(np.argmax(v @ np.asarray(direction, dtype=float)))]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform samples over the region (rejection from the bounding box).

        Zero-area regions are sampled uniformly along their segments.
        """
        p0, p1, q0, q1 = self.bbox
        if self.is_point:
            return np.tile([p0, q0], (n, 1))
        if self.area <= 0:
            return self._sample_segments(rng, n)
        if self._is_box:
            return np.column_stack([rng.uniform(p0, p1, n), rng.uniform(q0, q1, n)])
        out = np.empty((0, 2))
        while len(out) < n:
            m = max(2 * (n - len(out)), 16)
            cand = np.column_stack([rng.uniform(p0, p1, m), rng.uniform(q0, q1, m)])
            out = np.vstack([out, cand[self.contains_many(cand, 0.0)]])
        return out[:n]

    def _sample_segments(self, rng, n):
        segs = []
        for c in self.cells:
            ring = c if len(c) > 1 else np.vstack([c, c])
            for i in range(len(ring) if len(ring) > 2 else 1):
                segs.append((ring[i], ring[(i + 1) % len(ring)]))
        lengths = np.array([np.hypot(*(b - a)) for a, b in segs])
        pick = rng.choice(len(segs), size=n, p=lengths / lengths.sum())
        t = rng.uniform(0.0, 1.0, n)
        a = np.array([segs[k][0] for k in pick])
        b = np.array([segs[k][1] for k in pick])
        return a + t[:, None] * (b - a)

    def translate(self, offset) -> "PQPolygon":
        off = np.asarray(offset, dtype=float)
        return PQPolygon([c + off for c in self.cells])

    def scale(self, factor: float) -> "PQPolygon":
        return PQPolygon([c * factor for c in self.cells])


def _is_axis_box(ring, bbox) -> bool:
    p0, p1, q0, q1 = bbox
    if len(ring) not in (1, 2, 4):
        return False
    return all((x in (p0, p1)) and (y in (q0, q1)) for x, y in ring) and (
        len(ring) != 2 or p0 == p1 or q0 == q1)


def _slice_cell(cell, p):
    if len(cell) == 1:
        return (cell[0, 1], cell[0, 1]) if abs(cell[0, 0] - p) <= 1e-12 else None
    qs = []
    n = len(cell)
    edges = [(0, 1)] if n == 2 else [(i, (i + 1) % n) for i in range(n)]
    for i, j in edges:
        (x1, y1), (x2, y2) = cell[i], cell[j]
        if min(x1, x2) - 1e-12 <= p <= max(x1, x2) + 1e-12:
            if abs(x2 - x1) < 1e-15:
                qs += [y1, y2]
            else:
                s = (p - x1) / (x2 - x1)
                qs.append(y1 + s * (y2 - y1))
    return (min(qs), max(qs)) if qs else None


def contains(poly: PQPolygon, point, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return bool(poly.contains_many(np.asarray(point, dtype=float)[None, :], tol)[0])


def project(poly: PQPolygon, point) -> tuple[float, float]:
    p, _ = poly.project_many(np.asarray(point, dtype=float)[None, :])
    return float(p[0, 0]), float(p[0, 1])


def box_polygon(p_min: float, p_max: float, q_min: float, q_max: float) -> PQPolygon:
    if p_min > p_max or q_min > q_max:
        raise ValueError("box bounds are inverted")
    return PQPolygon([[(p_min, q_min), (p_max, q_min), (p_max, q_max), (p_min, q_max)]])


def minkowski_sum(polys) -> PQPolygon:
    """Minkowski sum of the convex hulls of ``polys``."""
    polys = list(polys)
    if not polys:
        raise ValueError("minkowski_sum needs at least one polygon")
    acc = polys[0].convex_hull()
    for poly in polys[1:]:
        h = poly.convex_hull()
        acc = geometry.convex_hull((acc[:, None, :] + h[None, :, :]).reshape(-1, 2))
    return PQPolygon([acc])


# ---------------------------------------------------------------------------
# EV chargers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EVChargerSpec:
    """Bidirectional charger capability.

    ``s_rated`` is the rating of one charger in kVA; ``units`` identical
    chargers behind the same node are pooled into one scaled polygon. With
    ``zero_q`` the band edges stay those of a single charger, since a pool
    can run one unit while the rest idle.
    """

    s_rated: float
    kind: str = "AC"
    capability_shape: str = "circle"
    low_band_q_policy: str | None = None
    units: int = 1
    p_ratio: float = 1.0  # P_n / S_r
    operating_cos_phi: float = 0.999

    def __post_init__(self):
        if self.kind not in ("AC", "DC"):
            raise ValueError(f"unknown charger kind {self.kind!r}")
        if self.capability_shape not in ("circle", "square"):
            raise ValueError(f"unknown capability shape {self.capability_shape!r}")
        if self.low_band_q_policy is None:
            object.__setattr__(self, "low_band_q_policy", "zero_q" if self.kind == "AC" else "full_circle")
        if self.low_band_q_policy not in ("zero_q", "full_circle"):
            raise ValueError(f"unknown low-band policy {self.low_band_q_policy!r}")
        if self.units < 1:
            raise ValueError("units must be >= 1")
        if not 0 < self.p_ratio <= 1:
            raise ValueError("p_ratio must lie in (0, 1]")

    @property
    def total_kva(self) -> float:
        return self.s_rated * self.units


def cos_phi_limit(spec: EVChargerSpec) -> float:
    if spec.kind == "DC":
        return 0.9
    return 0.9 if spec.s_rated > COS_PHI_THRESHOLD_KVA else 0.95


def _cap_ring(shape: str, s: float, anchors) -> np.ndarray:
    if shape == "square":
        return np.array([(-s, -s), (s, -s), (s, s), (-s, s)])
    ang = 2.0 * math.pi * np.arange(CIRCLE_VERTICES) / CIRCLE_VERTICES
    extra = np.mod(np.asarray(anchors, dtype=float), 2.0 * math.pi)
    ang = np.sort(np.concatenate([ang, extra]))
    keep = np.concatenate([[True], np.diff(ang) > 1e-12])
    ang = ang[keep]
    if ang[-1] - ang[0] > 2.0 * math.pi - 1e-12:
        ang = ang[:-1]
    return np.column_stack([s * np.cos(ang), s * np.sin(ang)])


def ev_polygon(spec: EVChargerSpec) -> PQPolygon:
    if not spec.s_rated > 0:
        raise ValueError("s_rated must be positive")
    s = spec.total_kva / 1000.0  # MVA
    p_n = spec.p_ratio * s
    phi = math.acos(cos_phi_limit(spec))
    slope = math.tan(phi)
    p_band = p_n / spec.units if spec.low_band_q_policy == "zero_q" else p_n
    p_lo = CHARGE_BAND * p_band
    p_hi = DISCHARGE_BAND * p_band

    anchors = [phi, -phi, math.pi - phi, math.pi + phi]
    op = math.acos(spec.operating_cos_phi)
    anchors += [op, -op, math.pi - op, math.pi + op]
    for x in (p_lo, -p_hi):
        if abs(x) <= s:
            a = math.acos(x / s)
            anchors += [a, -a]
    cap = _cap_ring(spec.capability_shape, s, anchors)

    charge = geometry.clip_halfplane(cap, (-1.0, 0.0), -p_lo)
    charge = geometry.clip_halfplane(charge, (-slope, 1.0), 0.0)
    charge = geometry.clip_halfplane(charge, (-slope, -1.0), 0.0)

    discharge = geometry.clip_halfplane(cap, (1.0, 0.0), -p_hi)
    discharge = geometry.clip_halfplane(discharge, (slope, 1.0), 0.0)
    discharge = geometry.clip_halfplane(discharge, (slope, -1.0), 0.0)

    if spec.low_band_q_policy == "zero_q":
        band = np.array([(-p_hi, 0.0), (p_lo, 0.0)])
    else:
        band = geometry.clip_halfplane(cap, (1.0, 0.0), p_lo)
        band = geometry.clip_halfplane(band, (-1.0, 0.0), p_hi)
    return PQPolygon([discharge, band, charge])


def ev_ac_polygon(spec: EVChargerSpec) -> PQPolygon:
    if spec.kind != "AC":
        raise ValueError("ev_ac_polygon needs an AC charger spec")
    return ev_polygon(spec)


def ev_dc_polygon(spec: EVChargerSpec) -> PQPolygon:
    if spec.kind != "DC":
        raise ValueError("ev_dc_polygon needs a DC charger spec")
    return ev_polygon(spec)


# ---------------------------------------------------------------------------
# Flexibility providing units
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FPU:
    name: str
    kind: str
    bus: int
    polygon: PQPolygon
    operating_point: tuple[float, float]
    source: object = None  # box bounds tuple or EVChargerSpec, kept for serialization
    cost: object = None  # optional EPFCurve

    def __post_init__(self):
        if self.kind not in FPU_KINDS:
            raise ValueError(f"FPU {self.name!r}: unknown kind {self.kind!r}")
        op = tuple(float(v) for v in self.operating_point)
        object.__setattr__(self, "operating_point", op)
        if not contains(self.polygon, op, tol=1e-9):
            raise ValueError(f"FPU {self.name!r}: operating point {op} outside its polygon")

    def __eq__(self, other):
        return (isinstance(other, FPU) and self.name == other.name and self.kind == other.kind
                and self.bus == other.bus and self.polygon == other.polygon
                and self.operating_point == other.operating_point and self.source == other.source
                and self.cost == other.cost)

    __hash__ = None

    @classmethod
    def box(cls, name, kind, bus, p_min, p_max, q_min, q_max, operating_point, cost=None):
        bounds = (float(p_min), float(p_max), float(q_min), float(q_max))
        return cls(name, kind, bus, box_polygon(*bounds), operating_point, bounds, cost)

    @classmethod
    def ev(cls, name, bus, spec: EVChargerSpec, operating_point, cost=None):
        kind = "ev_ac" if spec.kind == "AC" else "ev_dc"
        return cls(name, kind, bus, ev_polygon(spec), operating_point, spec, cost)
