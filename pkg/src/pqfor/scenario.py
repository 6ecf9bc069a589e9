"""FPU scenarios of the case study, EV fleet sizing and scenario files."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .flexibility import FPU, FPU_KINDS, EVChargerSpec, PQPolygon
from .grid import Grid
from .monetization import EPFCurve
from .powerflow import OperatingLimits

__all__ = [
    "EVPenetrationSpec",
    "Scenario",
    "ScenarioError",
    "UnknownScenario",
    "ParseError",
    "UnknownFPUKind",
    "SCENARIO_IDS",
    "EV_CASES",
    "derive_ev_fleet",
    "build_scenario",
    "load_scenario_file",
    "save_scenario_file",
    "load_base_fpus",
]

SCENARIO_IDS = ("0", "0a", "1", "1a", "2", "2a", "3", "3a")

# EV share per case and the MV nodes with a 600 kVA DC station.
EV_CASES = {
    0: (0.0, ()),
    1: (0.10, (2,)),
    2: (0.20, (2, 4)),
    3: (0.30, (2, 4, 7)),
}
DC_STATION_KVA = 600.0
AC_CHARGER_KVA = 11.0
OPERATING_COS_PHI = 0.999
DER_KINDS = ("wind", "pv")


class ScenarioError(ValueError):
    pass


class UnknownScenario(ScenarioError):
    pass


class ParseError(ScenarioError):
    pass


class UnknownFPUKind(ParseError):
    pass


@dataclass(frozen=True)
class EVPenetrationSpec:
    simultaneity: float = 0.7  # g_oc
    peak_household_power: float = 15.0  # kW
    max_node_load: float = 0.5  # MW
    ev_share: float = 0.1
    ev_ac_rating: float = AC_CHARGER_KVA  # kVA per vehicle

    def __post_init__(self):
        if not 0 < self.simultaneity <= 1:
            raise ValueError("simultaneity must lie in (0, 1]")
        if not 0 <= self.ev_share <= 1:
            raise ValueError("ev_share must lie in [0, 1]")
        if self.peak_household_power <= 0 or self.max_node_load <= 0:
            raise ValueError("household peak and node load must be positive")


def derive_ev_fleet(spec: EVPenetrationSpec) -> tuple[int, int, float]:
    """(households, EVs, total AC rating in kVA) behind one LV node.

    The household count is rounded up to the next multiple of ten
    (0.5 MW / (0.7 * 15 kW) = 47.6 -> 50); one car per household.
    """
    if spec.simultaneity <= 0:
        raise ValueError("simultaneity must be positive")
    raw = spec.max_node_load * 1e3 / (spec.simultaneity * spec.peak_household_power)
    households = 10 * math.ceil(raw / 10.0 - 1e-9)
    evs = int(round(households * spec.ev_share))
    return households, evs, evs * spec.ev_ac_rating


@dataclass(frozen=True, eq=True)
class Scenario:
    id: str
    fpus: tuple[FPU, ...]
    limits: OperatingLimits = OperatingLimits()
    line_rating_override: float | None = None
    der_available: bool = False
    ev_case: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fpus", tuple(self.fpus))
        names = [f.name for f in self.fpus]
        if len(set(names)) != len(names):
            raise ScenarioError("FPU names must be unique within a scenario")
        if self.ev_case not in EV_CASES:
            raise ScenarioError(f"unknown EV case {self.ev_case}")

    def fpu(self, name: str) -> FPU:
        for f in self.fpus:
            if f.name == name:
                return f
        raise KeyError(name)

    def with_line_rating(self, i_rated: float | None) -> "Scenario":
        return Scenario(self.id, self.fpus, self.limits, i_rated, self.der_available, self.ev_case)

    def apply_to_grid(self, grid: Grid) -> Grid:
        if self.line_rating_override is None:
            return grid
        return grid.with_line_rating(self.line_rating_override)


def parse_scenario_id(sid: str) -> tuple[bool, int]:
    if sid not in SCENARIO_IDS:
        raise UnknownScenario(f"unknown scenario {sid!r}; expected one of {', '.join(SCENARIO_IDS)}")
    return sid.endswith("a"), int(sid[0])


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fpu_to_dict(f: FPU) -> dict:
    d = {"name": f.name, "kind": f.kind, "bus": f.bus, "operating_point": list(f.operating_point)}
    if isinstance(f.source, EVChargerSpec):
        d["ev"] = asdict(f.source)
    elif isinstance(f.source, tuple):
        d["box"] = list(f.source)
    else:
        d["cells"] = [c.tolist() for c in f.polygon.cells]
    if f.cost is not None:
        d["cost"] = {"kind": f.cost.kind, "c_p": f.cost.c_p}
    return d


def _fpu_from_dict(d: dict, where: str) -> FPU:
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object")
    name = d.get("name", where)
    try:
        kind = d["kind"]
        if kind not in FPU_KINDS:
            raise UnknownFPUKind(f"{where} ({name}): unknown FPU kind {kind!r}")
        bus = int(d["bus"])
        op = tuple(float(v) for v in d["operating_point"])
        if len(op) != 2:
            raise ParseError(f"{where} ({name}).operating_point: expected [p, q]")
        cost = EPFCurve(**d["cost"]) if d.get("cost") else None
        if "ev" in d:
            return FPU.ev(name, bus, EVChargerSpec(**d["ev"]), op, cost)
        if "box" in d:
            return FPU.box(name, kind, bus, *d["box"], operating_point=op, cost=cost)
        if "cells" in d:
            return FPU(name, kind, bus, PQPolygon(d["cells"]), op, None, cost)
        raise ParseError(f"{where} ({name}): needs one of 'box', 'ev' or 'cells'")
    except ParseError:
        raise
    except KeyError as exc:
        raise ParseError(f"{where} ({name}): missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where} ({name}): {exc}") from exc


def scenario_to_dict(s: Scenario) -> dict:
    d = {
        "id": s.id,
        "limits": {"v_min": s.limits.v_min, "v_max": s.limits.v_max},
        "der_available": s.der_available,
        "ev_case": s.ev_case,
        "fpus": [_fpu_to_dict(f) for f in s.fpus],
    }
    if s.line_rating_override is not None:
        d["i_rated_override"] = s.line_rating_override
    return d


def scenario_from_dict(d: dict) -> Scenario:
    if not isinstance(d, dict):
        raise ParseError("scenario document must be a JSON object")
    try:
        lim = d.get("limits", {})
        limits = OperatingLimits(float(lim.get("v_min", 0.9)), float(lim.get("v_max", 1.1)))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"limits: {exc}") from exc
    fpus = [_fpu_from_dict(f, f"fpus[{k}]") for k, f in enumerate(d.get("fpus", []))]
    override = d.get("i_rated_override")
    try:
        return Scenario(
            id=str(d.get("id", "custom")),
            fpus=tuple(fpus),
            limits=limits,
            line_rating_override=None if override is None else float(override),
            der_available=bool(d.get("der_available", False)),
            ev_case=int(d.get("ev_case", 0)),
        )
    except ScenarioError as exc:
        raise ParseError(str(exc)) from exc


def save_scenario_file(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def load_scenario_file(path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)


# ---------------------------------------------------------------------------
# Case-study scenarios
# ---------------------------------------------------------------------------


def load_base_fpus(path=None) -> tuple[FPU, ...]:
    """Base loads and DER; the packaged defaults unless ``path`` is given."""
    if path is None:
        text = resources.files("pqfor.data").joinpath("cigre_mv_fpus.json").read_text()
    else:
        text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"base FPU file: line {exc.lineno}: {exc.msg}") from exc
    return tuple(_fpu_from_dict(f, f"fpus[{k}]") for k, f in enumerate(data["fpus"]))


def _ev_operating_point(s_kva: float, q_sign: float) -> tuple[float, float]:
    s = s_kva / 1e3
    return s * OPERATING_COS_PHI, q_sign * s * math.sqrt(1.0 - OPERATING_COS_PHI**2)


def build_scenario(sid: str, grid: Grid, base_fpus=None, ev_q_sign: float = 1.0,
                   penetration: EVPenetrationSpec = EVPenetrationSpec()) -> Scenario:
    """Scenario ``sid`` of the case study on ``grid``.

    Loads are always present, DER only for the ``a`` variants. EV case k
    adds an AC pool at every LV bus and 600 kVA DC stations at the MV nodes
    of that case, all operating at rated power and cos phi 0.999.
    """
    der, case = parse_scenario_id(sid)
    base = load_base_fpus() if base_fpus is None else tuple(base_fpus)
    fpus = [f for f in base if f.kind not in DER_KINDS or der]
    share, dc_nodes = EV_CASES[case]
    if case:
        _, evs, _ = derive_ev_fleet(EVPenetrationSpec(
            penetration.simultaneity, penetration.peak_household_power,
            penetration.max_node_load, share, penetration.ev_ac_rating))
        for bus in grid.buses:
            if bus.level == "LV" and evs:
                spec = EVChargerSpec(penetration.ev_ac_rating, "AC", units=evs,
                                     operating_cos_phi=OPERATING_COS_PHI)
                fpus.append(FPU.ev(f"ev_ac_{bus.name}", bus.id, spec,
                                   _ev_operating_point(spec.total_kva, ev_q_sign)))
        for node in dc_nodes:
            spec = EVChargerSpec(DC_STATION_KVA, "DC", operating_cos_phi=OPERATING_COS_PHI)
            fpus.append(FPU.ev(f"ev_dc_MV{node}", node, spec, _ev_operating_point(spec.total_kva, ev_q_sign)))
    return Scenario(sid, tuple(fpus), OperatingLimits(0.9, 1.1), None, der, case)
