import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gauss_seidel, random_radial_grid, two_bus_closed_form, two_bus_grid
from pqfor.grid import admittance_matrix, to_per_unit
from pqfor.powerflow import (
    NonConvergent,
    OperatingLimits,
    PowerFlowModel,
    SolverOptions,
    evaluate_limits,
    solve_power_flow,
    total_losses,
    vertical_interchange,
)


def _random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    grid = random_radial_grid(rng, n)
    loads = {k: (float(rng.uniform(-1.5, 2.0)), float(rng.uniform(-0.5, 0.8))) for k in range(1, n)}
    return grid, loads


@pytest.mark.parametrize("seed", range(20))
def test_newton_matches_gauss_seidel(seed):
    grid, loads = _random_case(seed)
    gpu = to_per_unit(grid)
    model = PowerFlowModel(gpu)
    sol = solve_power_flow(model, loads)
    assert sol.converged
    s = np.zeros(gpu.n_bus, dtype=complex)
    for k, (p, q) in loads.items():
        s[gpu.index(k)] = complex(p, q) / gpu.s_base
    v_gs = gauss_seidel(admittance_matrix(gpu).matrix, gpu.slack, s)
    np.testing.assert_allclose(sol.vm, np.abs(v_gs), atol=1e-7)
    t0 = time.perf_counter()
    solve_power_flow(model, loads)
    assert time.perf_counter() - t0 < 0.010


def test_two_bus_closed_form():
    grid = two_bus_grid()
    for p, q in [(0.0, 0.0), (3.0, 1.0), (-4.0, 0.5), (6.0, -2.0)]:
        sol = solve_power_flow(to_per_unit(grid), {1: (p, q)})
        pv, qv, v1, i_amp = two_bus_closed_form(grid, p, q)
        assert sol.slack_injection == pytest.approx((pv, qv), abs=1e-9)
        assert sol.vm[1] == pytest.approx(v1, abs=1e-10)
        assert sol.line_current[0] == pytest.approx(i_amp, rel=1e-9)


def test_power_balance_on_benchmark(benchmark_grid):
    gpu = to_per_unit(benchmark_grid)
    loads = {b.id: (0.4, 0.1) for b in benchmark_grid.buses if b.kind != "slack"}
    sol = solve_power_flow(gpu, loads)
    p_vert, q_vert = vertical_interchange(sol)
    assert p_vert == pytest.approx(sum(p for p, _ in loads.values()) + total_losses(sol), abs=1e-8)
    assert total_losses(sol) > 0
    assert sol.iterations <= 6  # quadratic convergence from flat start


def test_batch_matches_single(benchmark_grid):
    gpu = to_per_unit(benchmark_grid)
    model = PowerFlowModel(gpu)
    rng = np.random.default_rng(3)
    S = (rng.uniform(-0.02, 0.04, (7, gpu.n_bus)) + 1j * rng.uniform(-0.01, 0.01, (7, gpu.n_bus)))
    S[:, gpu.slack] = 0
    V, status, _ = model.solve(S)
    assert (status == 0).all()
    for k in range(7):
        loads = {bid: (S[k, i].real * 25, S[k, i].imag * 25) for i, bid in enumerate(gpu.bus_ids) if i != gpu.slack}
        np.testing.assert_allclose(solve_power_flow(model, loads).voltage, V[k], atol=1e-9)


def test_nonconvergence_reported(benchmark_grid):
    sol = solve_power_flow(to_per_unit(benchmark_grid), {6: (500.0, 100.0)}, SolverOptions(max_iter=20))
    assert not sol.converged
    with pytest.raises(NonConvergent):
        sol.raise_for_status()
    with pytest.raises(NonConvergent):
        vertical_interchange(sol)


def test_bad_injections(benchmark_grid):
    gpu = to_per_unit(benchmark_grid)
    with pytest.raises(ValueError):
        solve_power_flow(gpu, {0: (1.0, 0.0)})
    with pytest.raises(KeyError):
        solve_power_flow(gpu, {999: (1.0, 0.0)})


def test_limits_inclusive_and_worst_margin():
    grid = two_bus_grid(i_rated=100.0)
    gpu = to_per_unit(grid)
    # find the load that drives the line exactly to its rating
    lo, hi = 0.0, 10.0
    for _ in range(80):
        mid = (lo + hi) / 2
        _, _, _, i_amp = two_bus_closed_form(grid, mid, 0.0)
        lo, hi = (mid, hi) if i_amp < 100.0 else (lo, mid)
    sol = solve_power_flow(gpu, {1: (lo, 0.0)}, SolverOptions(tol=1e-12))
    rep = evaluate_limits(sol, OperatingLimits(0.5, 1.5), gpu)
    assert rep.binding()[0] == "line_current"
    assert abs(rep.worst["line_current"]) < 1e-9
    sol = solve_power_flow(gpu, {1: (lo * 1.01, 0.0)})
    assert not evaluate_limits(sol, OperatingLimits(0.5, 1.5), gpu).feasible


def test_voltage_margin_arithmetic():
    gpu = to_per_unit(two_bus_grid())
    model = PowerFlowModel(gpu)
    q = dict(vm=np.array([[1.0, 0.9]]), line_current=np.array([[10.0]]), trafo_loading=np.zeros((1, 0)))
    m = model.margins(q, OperatingLimits(0.9, 1.1))
    assert m["undervoltage"][0, 0] == 0.0  # exactly on the limit still passes
    assert m["overvoltage"][0, 0] == pytest.approx(0.2 / 1.1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.8, 1.0), st.floats(-0.3, 0.4)), min_size=14, max_size=14))
def test_balance_property(loads):
    from pqfor.grid import build_cigre_mv_grid

    gpu = to_per_unit(build_cigre_mv_grid())
    inj = {k + 1: pq for k, pq in enumerate(loads)}
    sol = solve_power_flow(gpu, inj)
    assert sol.converged
    assert sol.total_losses >= 0
    assert sol.slack_injection[0] == pytest.approx(sum(p for p, _ in loads) + sol.total_losses, abs=1e-7)
