import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqfor.monetization import (
    CURVE_KINDS,
    EPFCurve,
    ZoneConfig,
    classify_zone,
    epf_cost,
    reactive_cost_factor,
)

P_GRID = [-1.0, -0.5, 0.0, 0.5, 1.0]


def closed_form(kind, c, p):
    if kind == "linear":
        return c * (1 - p)
    if kind == "quadratic":
        return c * (p * p + 1) if p < 0 else c * (p - 1) ** 2
    return c * (1 - p**3)


@pytest.mark.parametrize("kind", CURVE_KINDS)
@pytest.mark.parametrize("p", P_GRID)
def test_closed_forms(kind, p):
    assert epf_cost(EPFCurve(kind, 35.0), p) == closed_form(kind, 35.0, p)


def test_paper_examples():
    assert epf_cost(EPFCurve("linear", 35.0), 0.0) == 35.0
    c = 12.0
    assert epf_cost(EPFCurve("quadratic", c), -0.5) == 1.25 * c
    assert epf_cost(EPFCurve("quadratic", c), 0.5) == 0.25 * c
    assert epf_cost(EPFCurve("cubic", c), 1.0) == 0.0
    assert epf_cost(EPFCurve("cubic", c), -1.0) == 2 * c


@given(st.sampled_from(CURVE_KINDS), st.floats(0, 1e4))
def test_anchor_points(kind, c):
    curve = EPFCurve(kind, c)
    assert curve(0.0) == c
    assert curve(1.0) == 0.0
    assert curve(-1.0) == 2 * c


@pytest.mark.parametrize("kind", CURVE_KINDS)
def test_monotone_non_increasing(kind):
    p = np.round(np.arange(-1000, 1001) / 1000, 12)
    c = epf_cost(EPFCurve(kind, 35.0), p)
    assert np.all(np.diff(c) <= 1e-12)


def test_quadratic_continuous_at_zero():
    curve = EPFCurve("quadratic", 7.0)
    assert curve(-1e-12) == pytest.approx(7.0)
    assert curve(0.0) == 7.0


def test_reactive_cost_factor():
    assert reactive_cost_factor(35.0) == 0.35
    assert reactive_cost_factor(0.0) == 0.0
    assert reactive_cost_factor(50.0) == 0.5
    with pytest.raises(ValueError):
        reactive_cost_factor(-1.0)


@pytest.mark.parametrize("bad", [1.0001, -1.5, float("nan")])
def test_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        epf_cost(EPFCurve("linear", 1.0), bad)


def test_curve_validation():
    with pytest.raises(ValueError):
        EPFCurve("quartic", 1.0)
    with pytest.raises(ValueError):
        EPFCurve("linear", -1.0)


def test_zone_tiers():
    zones = ZoneConfig()
    assert classify_zone(-0.99).zone == "i" and classify_zone(-0.99).likelihood_tier == "low"
    z3 = zones.zones[2]
    assert classify_zone(sum(z3.breakpoints) / 2).likelihood_tier == "high"
    tiers = {z.zone: z.likelihood_tier for z in zones.zones}
    assert tiers == {"i": "low", "v": "low", "ii": "mid", "iv": "mid", "vi": "mid", "iii": "high", "vii": "high"}


def test_zone_breakpoint_goes_right():
    zones = ZoneConfig()
    edge = zones.edges[3]
    assert classify_zone(edge).zone == "iv"
    assert classify_zone(1.0).zone == "vii"
    assert classify_zone(-1.0).zone == "i"


@given(st.lists(st.floats(-0.999, 0.999), min_size=6, max_size=6, unique=True))
def test_zones_partition(inner):
    edges = [-1.0] + sorted(inner) + [1.0]
    if any(b - a < 1e-9 for a, b in zip(edges, edges[1:])):
        return
    cfg = ZoneConfig(tuple(edges))
    zs = cfg.zones
    assert zs[0].breakpoints[0] == -1.0 and zs[-1].breakpoints[1] == 1.0
    for a, b in zip(zs, zs[1:]):
        assert a.breakpoints[1] == b.breakpoints[0]
    for p in np.linspace(-1, 1, 41):
        z = classify_zone(float(p), cfg)
        lo, hi = z.breakpoints
        assert lo <= p <= hi


@pytest.mark.parametrize("edges", [(0, 1), tuple(np.linspace(-1, 0.9, 8)), (-1, -0.5, -0.6, 0, 0.2, 0.4, 0.6, 1)])
def test_zone_config_validation(edges):
    with pytest.raises(ValueError):
        ZoneConfig(edges)
