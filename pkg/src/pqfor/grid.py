"""Cigré European MV benchmark grid, per-unit conversion and nodal admittance.

Units on the physical model follow the usual nameplate conventions
(km, Ohm/km, mH/km, uF/km, kV, MVA, %, kW, A). Everything downstream of
:func:`to_per_unit` works on the system base.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Bus",
    "Line",
    "Transformer",
    "Grid",
    "BenchmarkConfig",
    "PerUnitGrid",
    "NodalAdmittance",
    "GridError",
    "build_cigre_mv_grid",
    "to_per_unit",
    "admittance_matrix",
    "load_grid",
    "save_grid",
]

BUS_KINDS = ("slack", "pq")
BUS_LEVELS = ("HV", "MV", "LV")


class GridError(ValueError):
    """Raised for structurally invalid grid data."""


@dataclass(frozen=True)
class Bus:
    id: int
    name: str
    nominal_voltage: float  # kV
    kind: str = "pq"
    level: str = "MV"

    def __post_init__(self):
        if self.nominal_voltage <= 0:
            raise GridError(f"bus {self.id}: nominal_voltage must be positive")
        if self.kind not in BUS_KINDS:
            raise GridError(f"bus {self.id}: unknown kind {self.kind!r}")
        if self.level not in BUS_LEVELS:
            raise GridError(f"bus {self.id}: unknown level {self.level!r}")


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    length: float  # km
    r_per_km: float  # Ohm/km
    l_per_km: float  # mH/km
    c_per_km: float  # uF/km
    i_rated: float  # A

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise GridError(f"line {self.from_bus}-{self.to_bus}: endpoints coincide")
        if self.length <= 0:
            raise GridError(f"line {self.from_bus}-{self.to_bus}: length must be positive")
        if self.r_per_km < 0 or self.l_per_km < 0 or self.c_per_km < 0:
            raise GridError(f"line {self.from_bus}-{self.to_bus}: negative parameter")
        if self.i_rated <= 0:
            raise GridError(f"line {self.from_bus}-{self.to_bus}: i_rated must be positive")


@dataclass(frozen=True)
class Transformer:
    hv_bus: int
    lv_bus: int
    v_hv: float  # kV
    v_lv: float  # kV
    s_rated: float  # MVA
    v_sc: float  # %
    p_cu: float  # kW
    i_oc: float  # %
    p_fe: float  # kW

    def __post_init__(self):
        if self.s_rated <= 0:
            raise GridError(f"transformer {self.hv_bus}-{self.lv_bus}: s_rated must be positive")
        if not 0 < self.v_sc < 100:
            raise GridError(f"transformer {self.hv_bus}-{self.lv_bus}: v_sc out of (0, 100)")
        if self.p_cu < 0 or self.p_fe < 0 or self.i_oc < 0:
            raise GridError(f"transformer {self.hv_bus}-{self.lv_bus}: negative loss data")
        # series resistance must not exceed the short-circuit impedance
        if self.p_cu / 1000.0 / self.s_rated > self.v_sc / 100.0:
            raise GridError(f"transformer {self.hv_bus}-{self.lv_bus}: p_cu inconsistent with v_sc")


@dataclass(frozen=True)
class Grid:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    transformers: tuple[Transformer, ...]
    frequency: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "transformers", tuple(self.transformers))
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise GridError("bus ids are not unique")
        n_slack = sum(b.kind == "slack" for b in self.buses)
        if n_slack != 1:
            raise GridError(f"grid needs exactly one slack bus, found {n_slack}")
        known = set(ids)
        for ln in self.lines:
            if ln.from_bus not in known or ln.to_bus not in known:
                raise GridError(f"line {ln.from_bus}-{ln.to_bus} references an unknown bus")
        for tr in self.transformers:
            if tr.hv_bus not in known or tr.lv_bus not in known:
                raise GridError(f"transformer {tr.hv_bus}-{tr.lv_bus} references an unknown bus")
        if self.frequency <= 0:
            raise GridError("frequency must be positive")

    @property
    def slack(self) -> Bus:
        return next(b for b in self.buses if b.kind == "slack")

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def with_line_rating(self, i_rated: float) -> "Grid":
        """Copy of the grid with every line re-rated to ``i_rated`` (A)."""
        return replace(self, lines=tuple(replace(ln, i_rated=i_rated) for ln in self.lines))

    def is_connected(self) -> bool:
        index = {b.id: k for k, b in enumerate(self.buses)}
        edges = [(index[l.from_bus], index[l.to_bus]) for l in self.lines]
        edges += [(index[t.hv_bus], index[t.lv_bus]) for t in self.transformers]
        n = len(self.buses)
        if n <= 1:
            return True
        if not edges:
            return False
        rows, cols = zip(*edges)
        adj = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(n, n))
        n_comp, _ = connected_components(adj, directed=False)
        return n_comp == 1

    def to_dict(self) -> dict:
        return {
            "frequency": self.frequency,
            "buses": [asdict(b) for b in self.buses],
            "lines": [asdict(l) for l in self.lines],
            "transformers": [asdict(t) for t in self.transformers],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Grid":
        try:
            return cls(
                buses=tuple(Bus(**b) for b in data["buses"]),
                lines=tuple(Line(**l) for l in data["lines"]),
                transformers=tuple(Transformer(**t) for t in data["transformers"]),
                frequency=float(data.get("frequency", 50.0)),
            )
        except (KeyError, TypeError) as exc:
            raise GridError(f"malformed grid document: {exc}") from exc


def save_grid(grid: Grid, path) -> None:
    Path(path).write_text(json.dumps(grid.to_dict(), indent=2) + "\n")


def load_grid(path) -> Grid:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GridError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return Grid.from_dict(data)


# ---------------------------------------------------------------------------
# Benchmark construction
# ---------------------------------------------------------------------------

# Uniform overhead-line parameters used for every line of the case study.
LINE_R_PER_KM = 0.501
LINE_L_PER_KM = 2.279
LINE_C_PER_KM = 0.151

HV_MV_TRAFO = dict(v_hv=110.0, v_lv=20.0, s_rated=25.0, v_sc=12.0, p_cu=25.0, i_oc=0.5, p_fe=0.0)
MV_LV_TRAFO = dict(v_hv=20.0, v_lv=0.4, s_rated=2.0, v_sc=8.0, p_cu=16.7, i_oc=0.2, p_fe=4.0)

# Published Cigré European MV benchmark line lengths (km); the switch
# branches 6-7, 11-4 and 14-8 are left open (radial operation).
CIGRE_MV_LINES = (
    (1, 2, 2.82),
    (2, 3, 4.42),
    (3, 4, 0.61),
    (4, 5, 0.56),
    (5, 6, 1.54),
    (7, 8, 1.67),
    (8, 9, 0.32),
    (9, 10, 0.77),
    (10, 11, 0.33),
    (3, 8, 1.30),
    (12, 13, 4.89),
    (13, 14, 2.99),
)

# Both MV busbars (1 and 12) hang off the single HV/MV transformer; the
# busbar coupling is modelled as a short line.
BUSBAR_TIE = (1, 12, 0.1)

# MV nodes with an LV sub-grid behind a 20/0.4 kV transformer.
LV_HOST_NODES = (3, 4, 5, 6, 8, 10, 11, 14)
LV_BUS_OFFSET = 100


@dataclass(frozen=True)
class BenchmarkConfig:
    i_rated: float = 220.0
    frequency: float = 50.0
    lv_host_nodes: tuple[int, ...] = LV_HOST_NODES
    line_lengths: dict = field(default_factory=dict)  # {(from, to): km} overrides


def build_cigre_mv_grid(config: BenchmarkConfig | None = None) -> Grid:
    """Adapted Cigré MV benchmark with LV sub-grids at ``config.lv_host_nodes``.

    Bus 0 is the 110 kV slack, buses 1..14 are the MV nodes and LV bus
    ``100 + k`` sits behind MV node ``k``.
    """
    config = config or BenchmarkConfig()
    buses = [Bus(0, "HV", 110.0, "slack", "HV")]
    buses += [Bus(k, f"MV{k}", 20.0, "pq", "MV") for k in range(1, 15)]
    buses += [Bus(LV_BUS_OFFSET + k, f"LV{k}", 0.4, "pq", "LV") for k in config.lv_host_nodes]

    def make_line(f, t, length):
        length = config.line_lengths.get((f, t), length)
        return Line(f, t, length, LINE_R_PER_KM, LINE_L_PER_KM, LINE_C_PER_KM, config.i_rated)

    lines = [make_line(*BUSBAR_TIE)] + [make_line(*spec) for spec in CIGRE_MV_LINES]
    transformers = [Transformer(hv_bus=0, lv_bus=1, **HV_MV_TRAFO)]
    transformers += [
        Transformer(hv_bus=k, lv_bus=LV_BUS_OFFSET + k, **MV_LV_TRAFO) for k in config.lv_host_nodes
    ]
    return Grid(tuple(buses), tuple(lines), tuple(transformers), config.frequency)


# ---------------------------------------------------------------------------
# Per-unit model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PerUnitGrid:
    """Branch-level per-unit model of a :class:`Grid`.

    Branch arrays cover lines first, then transformers. Shunt admittances
    are given per branch end; a transformer carries its magnetizing branch
    at the HV (from) end.
    """

    grid: Grid
    s_base: float
    bus_ids: tuple[int, ...]
    slack: int  # bus index
    v_base: np.ndarray  # kV per bus
    f: np.ndarray
    t: np.ndarray
    y_series: np.ndarray
    y_shunt_f: np.ndarray
    y_shunt_t: np.ndarray
    i_base_f: np.ndarray  # A per pu current at the from end
    i_base_t: np.ndarray
    n_lines: int

    @property
    def n_bus(self) -> int:
        return len(self.bus_ids)

    @property
    def n_branch(self) -> int:
        return len(self.f)

    def index(self, bus_id: int) -> int:
        return self.bus_ids.index(bus_id)

    @property
    def line_rating(self) -> np.ndarray:
        return np.array([ln.i_rated for ln in self.grid.lines], dtype=float)

    @property
    def trafo_rating(self) -> np.ndarray:
        return np.array([tr.s_rated for tr in self.grid.transformers], dtype=float)


def base_impedance(v_kv: float, s_mva: float) -> float:
    return v_kv**2 / s_mva


def to_per_unit(grid: Grid, s_base: float = 25.0) -> PerUnitGrid:
    if not s_base > 0:
        raise GridError("s_base must be positive")
    bus_ids = tuple(b.id for b in grid.buses)
    idx = {b: k for k, b in enumerate(bus_ids)}
    v_base = np.array([b.nominal_voltage for b in grid.buses], dtype=float)
    omega = 2.0 * math.pi * grid.frequency

    f, t, ys, ysf, yst, ibf, ibt = [], [], [], [], [], [], []
    for ln in grid.lines:
        vb = grid.bus(ln.from_bus).nominal_voltage
        zb = base_impedance(vb, s_base)
        r = ln.r_per_km * ln.length / zb
        x = omega * ln.l_per_km * 1e-3 * ln.length / zb
        b = omega * ln.c_per_km * 1e-6 * ln.length * zb
        f.append(idx[ln.from_bus])
        t.append(idx[ln.to_bus])
        ys.append(1.0 / complex(r, x) if (r or x) else complex(0.0, 0.0))
        ysf.append(0.5j * b)
        yst.append(0.5j * b)
        i_base = s_base / (math.sqrt(3.0) * vb) * 1e3
        ibf.append(i_base)
        ibt.append(i_base)

    for tr in grid.transformers:
        s_ratio = s_base / tr.s_rated
        z = tr.v_sc / 100.0
        r = tr.p_cu / 1e3 / tr.s_rated
        x = math.sqrt(z**2 - r**2)
        g_m = tr.p_fe / 1e3 / tr.s_rated
        y_m = tr.i_oc / 100.0
        b_m = math.sqrt(max(y_m**2 - g_m**2, 0.0))
        f.append(idx[tr.hv_bus])
        t.append(idx[tr.lv_bus])
        ys.append(1.0 / (complex(r, x) * s_ratio))
        ysf.append(complex(g_m, -b_m) / s_ratio)
        yst.append(0j)
        ibf.append(s_base / (math.sqrt(3.0) * grid.bus(tr.hv_bus).nominal_voltage) * 1e3)
        ibt.append(s_base / (math.sqrt(3.0) * grid.bus(tr.lv_bus).nominal_voltage) * 1e3)

    return PerUnitGrid(
        grid=grid,
        s_base=float(s_base),
        bus_ids=bus_ids,
        slack=idx[grid.slack.id],
        v_base=v_base,
        f=np.array(f, dtype=int),
        t=np.array(t, dtype=int),
        y_series=np.array(ys, dtype=complex),
        y_shunt_f=np.array(ysf, dtype=complex),
        y_shunt_t=np.array(yst, dtype=complex),
        i_base_f=np.array(ibf, dtype=float),
        i_base_t=np.array(ibt, dtype=float),
        n_lines=len(grid.lines),
    )


@dataclass(frozen=True, eq=False)
class NodalAdmittance:
    bus_ids: tuple[int, ...]
    matrix: np.ndarray  # complex, per-unit

    @property
    def dimension(self) -> int:
        return len(self.bus_ids)


def admittance_matrix(grid_pu: PerUnitGrid) -> NodalAdmittance:
    """Assemble the bus admittance matrix from the per-unit branch model."""
    if not grid_pu.grid.is_connected():
        raise GridError("grid is not connected")
    for ln in grid_pu.grid.lines:
        if ln.length <= 0:
            raise GridError("zero-length line")
    n = grid_pu.n_bus
    f, t = grid_pu.f, grid_pu.t
    ys = grid_pu.y_series
    Y = np.zeros((n, n), dtype=complex)
    np.add.at(Y, (f, f), ys + grid_pu.y_shunt_f)
    np.add.at(Y, (t, t), ys + grid_pu.y_shunt_t)
    np.add.at(Y, (f, t), -ys)
    np.add.at(Y, (t, f), -ys)
    return NodalAdmittance(grid_pu.bus_ids, Y)
