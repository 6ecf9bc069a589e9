import json
import math

import numpy as np
import pytest

from pqfor.grid import (
    HV_MV_TRAFO,
    BenchmarkConfig,
    Bus,
    Grid,
    GridError,
    Line,
    Transformer,
    admittance_matrix,
    build_cigre_mv_grid,
    load_grid,
    save_grid,
    to_per_unit,
)


def test_benchmark_topology(benchmark_grid):
    g = benchmark_grid
    assert g.slack.id == 0
    assert len([b for b in g.buses if b.level == "MV"]) == 14
    assert len([b for b in g.buses if b.level == "LV"]) == 8
    assert len(g.lines) == 13
    assert len(g.transformers) == 9
    assert all(ln.i_rated == 220.0 for ln in g.lines)
    assert g.is_connected()
    # radial: a tree has n - 1 branches
    assert len(g.lines) + len(g.transformers) == len(g.buses) - 1


def test_line_rating_override():
    g = build_cigre_mv_grid(BenchmarkConfig(i_rated=680.0))
    assert {ln.i_rated for ln in g.lines} == {680.0}
    assert {ln.i_rated for ln in build_cigre_mv_grid().with_line_rating(680).lines} == {680.0}


def test_per_unit_line_impedance(benchmark_grid):
    gpu = to_per_unit(benchmark_grid, 25.0)
    k = next(i for i, ln in enumerate(benchmark_grid.lines) if (ln.from_bus, ln.to_bus) == (1, 2))
    zb = 20.0**2 / 25.0
    r = 0.501 * 2.82 / zb
    x = 2 * math.pi * 50 * 2.279e-3 * 2.82 / zb
    assert 1 / gpu.y_series[k] == pytest.approx(complex(r, x), rel=1e-12)
    b = 2 * math.pi * 50 * 0.151e-6 * 2.82 * zb
    assert gpu.y_shunt_f[k] == pytest.approx(0.5j * b, rel=1e-12)


def test_per_unit_transformer(benchmark_grid):
    gpu = to_per_unit(benchmark_grid, 25.0)
    k = gpu.n_lines  # HV/MV transformer comes first among transformers
    z = 1 / gpu.y_series[k]
    assert abs(z) == pytest.approx(HV_MV_TRAFO["v_sc"] / 100, rel=1e-12)
    assert z.real == pytest.approx(25.0 / 1e3 / 25.0, rel=1e-12)
    # MV/LV unit rated 2 MVA: impedance rescaled to the 25 MVA base
    z_lv = 1 / gpu.y_series[k + 1]
    assert abs(z_lv) == pytest.approx(0.08 * 25.0 / 2.0, rel=1e-12)


def test_admittance_matches_incidence_oracle(benchmark_grid):
    gpu = to_per_unit(benchmark_grid)
    Y = admittance_matrix(gpu).matrix
    n, m = gpu.n_bus, gpu.n_branch
    A = np.zeros((m, n))
    A[np.arange(m), gpu.f] = 1.0
    A[np.arange(m), gpu.t] = -1.0
    shunt = np.zeros(n, dtype=complex)
    np.add.at(shunt, gpu.f, gpu.y_shunt_f)
    np.add.at(shunt, gpu.t, gpu.y_shunt_t)
    oracle = A.T @ np.diag(gpu.y_series) @ A + np.diag(shunt)
    np.testing.assert_allclose(Y, oracle, atol=1e-12)
    np.testing.assert_allclose(Y, Y.T, atol=0)


def test_disconnected_grid_rejected():
    buses = (Bus(0, "a", 20, "slack"), Bus(1, "b", 20), Bus(2, "c", 20))
    g = Grid(buses, (Line(0, 1, 1.0, 0.5, 1.0, 0.0, 100),), ())
    assert not g.is_connected()
    with pytest.raises(GridError):
        admittance_matrix(to_per_unit(g))


@pytest.mark.parametrize(
    "make",
    [
        lambda: Line(0, 1, 0.0, 0.5, 1.0, 0.1, 220),
        lambda: Line(0, 0, 1.0, 0.5, 1.0, 0.1, 220),
        lambda: Line(0, 1, 1.0, 0.5, 1.0, 0.1, 0),
        lambda: Bus(0, "x", -20),
        lambda: Transformer(0, 1, 110, 20, 0, 12, 25, 0.5, 0),
        lambda: Transformer(0, 1, 110, 20, 25, 12, 5000, 0.5, 0),
        lambda: Grid((Bus(0, "a", 20, "slack"), Bus(0, "b", 20)), (), ()),
        lambda: Grid((Bus(0, "a", 20, "slack"), Bus(1, "b", 20, "slack")), (), ()),
        lambda: Grid((Bus(0, "a", 20, "slack"),), (Line(0, 5, 1, 0.5, 1, 0.1, 220),), ()),
    ],
)
def test_invalid_elements(make):
    with pytest.raises(GridError):
        make()


def test_nonpositive_base_rejected(benchmark_grid):
    with pytest.raises(GridError):
        to_per_unit(benchmark_grid, 0.0)


def test_grid_file_round_trip(tmp_path, benchmark_grid):
    path = tmp_path / "grid.json"
    save_grid(benchmark_grid, path)
    assert load_grid(path) == benchmark_grid
    data = json.loads(path.read_text())
    assert set(data) >= {"buses", "lines", "transformers"}


def test_grid_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"buses": [\n  {"id": 0,,}]}')
    with pytest.raises(GridError, match="line 2"):
        load_grid(bad)
    bad.write_text('{"buses": []}')
    with pytest.raises(GridError):
        load_grid(bad)
