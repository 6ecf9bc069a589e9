"""Shared fixtures and independent oracles."""
from __future__ import annotations

import sys

import numpy as np
import pytest

from pqfor.flexibility import FPU
from pqfor.grid import Bus, Grid, Line, build_cigre_mv_grid
from pqfor.powerflow import OperatingLimits
from pqfor.scenario import Scenario


def gauss_seidel(Y, slack, s_cons, tol=1e-12, max_iter=200_000):
    """Textbook Gauss-Seidel power flow; consumption-positive per-unit loads."""
    n = len(Y)
    V = np.ones(n, dtype=complex)
    s_inj = -np.asarray(s_cons, dtype=complex)
    for _ in range(max_iter):
        delta = 0.0
        for k in range(n):
            if k == slack:
                continue
            acc = Y[k] @ V - Y[k, k] * V[k]
            v_new = (np.conj(s_inj[k] / V[k]) - acc) / Y[k, k]
            delta = max(delta, abs(v_new - V[k]))
            V[k] = v_new
        if delta < tol:
            return V
    raise RuntimeError("Gauss-Seidel did not converge")


def random_radial_grid(rng: np.random.Generator, n_bus: int, i_rated: float = 400.0) -> Grid:
    """Random tree of 20 kV lines rooted at slack bus 0."""
    buses = [Bus(0, "B0", 20.0, "slack", "MV")]
    buses += [Bus(k, f"B{k}", 20.0, "pq", "MV") for k in range(1, n_bus)]
    lines = []
    for k in range(1, n_bus):
        parent = int(rng.integers(0, k))
        lines.append(Line(parent, k, float(rng.uniform(0.3, 4.0)), float(rng.uniform(0.1, 0.6)),
                          float(rng.uniform(0.3, 2.5)), float(rng.uniform(0.0, 0.3)), i_rated))
    return Grid(tuple(buses), tuple(lines), ())


def two_bus_grid(i_rated: float = 1000.0, length: float = 2.0) -> Grid:
    """Slack and one load bus joined by a shunt-free line (closed-form solvable)."""
    buses = (Bus(0, "S", 20.0, "slack", "MV"), Bus(1, "L", 20.0, "pq", "MV"))
    return Grid(buses, (Line(0, 1, length, 0.5, 2.0, 0.0, i_rated),), ())


def two_bus_closed_form(grid: Grid, p, q, s_base=25.0):
    """Exact (P_vert, Q_vert, |V1|, I [A]) of the shunt-free two-bus grid.

    With V0 = 1 and load S = P + jQ (pu) at bus 1,
    |V1|^4 + (2(PR + QX) - 1)|V1|^2 + |Z|^2|S|^2 = 0 (high-voltage root).
    """
    ln = grid.lines[0]
    zb = 20.0**2 / s_base
    R = ln.r_per_km * ln.length / zb
    X = 2 * np.pi * grid.frequency * ln.l_per_km * 1e-3 * ln.length / zb
    P = np.asarray(p) / s_base
    Q = np.asarray(q) / s_base
    b = 2 * (P * R + Q * X) - 1.0
    S2 = P**2 + Q**2
    disc = b * b - 4 * (R * R + X * X) * S2
    v2 = (-b + np.sqrt(np.maximum(disc, 0.0))) / 2
    p_vert = (P + R * S2 / v2) * s_base
    q_vert = (Q + X * S2 / v2) * s_base
    i_amp = np.sqrt(S2 / v2) * s_base / (np.sqrt(3) * 20.0) * 1e3
    return p_vert, q_vert, np.sqrt(v2), i_amp


def toy_scenario(p_range=(-2.0, 2.0), q_range=(-0.5, 0.5), op=(0.0, 0.0), limits=OperatingLimits(0.5, 1.5)):
    fpu = FPU.box("flex", "industrial_load", 1, *p_range, *q_range, operating_point=op)
    return Scenario("toy", (fpu,), limits)


@pytest.fixture(scope="session")
def benchmark_grid():
    return build_cigre_mv_grid()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
