"""Expected payment functions for EV active-power flexibility.

``p_norm`` is the activated flexibility normalized to the rated range,
in [-1, 1]; negative values are feed-in by the vehicle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EPFCurve",
    "OccurrenceZone",
    "ZoneConfig",
    "CURVE_KINDS",
    "epf_cost",
    "reactive_cost_factor",
    "classify_zone",
]

CURVE_KINDS = ("linear", "quadratic", "cubic")
ZONE_NAMES = ("i", "ii", "iii", "iv", "v", "vi", "vii")
ZONE_TIERS = {"i": "low", "v": "low", "ii": "mid", "iv": "mid", "vi": "mid", "iii": "high", "vii": "high"}


@dataclass(frozen=True)
class EPFCurve:
    kind: str
    c_p: float

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.c_p < 0:
            raise ValueError("cost factor must be non-negative")

    def __call__(self, p_norm):
        return epf_cost(self, p_norm)


def epf_cost(curve: EPFCurve, p_norm):
    """Cost of activating ``p_norm``; scalar in, scalar out, arrays broadcast."""
    p = np.asarray(p_norm, dtype=float)
    if np.any((p < -1.0) | (p > 1.0)) or np.any(~np.isfinite(p)):
        raise ValueError("p_norm must lie in [-1, 1]")
    c = curve.c_p
    if curve.kind == "linear":
        out = c * (1.0 - p)
    elif curve.kind == "quadratic":
        out = np.where(p < 0.0, c * (p * p + 1.0), c * (p - 1.0) ** 2)
    else:
        out = c * (1.0 - p**3)
    return float(out) if out.ndim == 0 else out


def reactive_cost_factor(c_p: float) -> float:
    if c_p < 0:
        raise ValueError("cost factor must be non-negative")
    return c_p / 100.0


@dataclass(frozen=True)
class OccurrenceZone:
    zone: str
    likelihood_tier: str
    breakpoints: tuple[float, float]


@dataclass(frozen=True)
class ZoneConfig:
    """Eight increasing edges from -1 to 1 delimiting zones i..vii."""

    edges: tuple[float, ...] = tuple(np.linspace(-1.0, 1.0, 8))

    def __post_init__(self):
        e = tuple(float(x) for x in self.edges)
        object.__setattr__(self, "edges", e)
        if len(e) != len(ZONE_NAMES) + 1:
            raise ValueError("zone configuration needs exactly 8 edges")
        if e[0] != -1.0 or e[-1] != 1.0:
            raise ValueError("zones must cover exactly [-1, 1]")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("zone edges must be strictly increasing")

    @property
    def zones(self) -> tuple[OccurrenceZone, ...]:
        return tuple(
            OccurrenceZone(name, ZONE_TIERS[name], (self.edges[k], self.edges[k + 1]))
            for k, name in enumerate(ZONE_NAMES)
        )


def classify_zone(p_norm: float, zones: ZoneConfig = ZoneConfig()) -> OccurrenceZone:
    """Zone containing ``p_norm``; intervals are left-closed, the last one closed."""
    if not -1.0 <= p_norm <= 1.0:
        raise ValueError("p_norm must lie in [-1, 1]")
    k = int(np.searchsorted(zones.edges, p_norm, side="right")) - 1
    return zones.zones[min(k, len(ZONE_NAMES) - 1)]
