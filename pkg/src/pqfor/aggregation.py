"""Feasible operation region (FOR) at the HV/MV interconnection.

The region is traced by a radial sweep around the operating point: for
each search direction a particle swarm moves the concatenated FPU dispatch
(every particle repaired into the FPU polygons) to maximize the interchange
displacement along that direction, rejecting any grid-infeasible state.
A short coordinate-wise line search then pushes the best particle onto the
binding limit.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry
from .grid import Grid, to_per_unit
from .powerflow import CATEGORIES, PowerFlowModel, SolverOptions
from .scenario import Scenario
from .swarm import particle_swarm

__all__ = [
    "AggConfig",
    "LossMapConfig",
    "BoundaryPoint",
    "FORResult",
    "LossMap",
    "NoFeasibleStart",
    "DispatchEvaluator",
    "optimize_direction",
    "compute_for",
    "random_sampling_for",
    "attribute_constraint",
    "dispatch_for_target",
    "loss_map",
]

LABELS = CATEGORIES + ("fpu_limit",)
_CHUNK = 256
VERIFY_TOL = 1e-7


class NoFeasibleStart(RuntimeError):
    """The scenario operating point itself violates a grid limit."""


@dataclass(frozen=True)
class AggConfig:
    directions: int = 72
    swarm_size: int = 50
    iterations: int = 150
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    perpendicular_penalty: float = 0.3
    seed: int = 42
    binding_margin: float = 0.005
    refine_passes: int = 2

    def __post_init__(self):
        if self.directions < 8:
            raise ValueError("directions must be >= 8")
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.iterations < 0 or self.refine_passes < 0:
            raise ValueError("iteration counts must be non-negative")


@dataclass(frozen=True)
class BoundaryPoint:
    pq: tuple[float, float]
    theta: float
    dispatch: tuple[tuple[float, float], ...]
    binding: str
    margin: float
    losses: float = 0.0


@dataclass(frozen=True)
class FORResult:
    boundary: tuple[BoundaryPoint, ...]
    area: float
    operating_point_pq: tuple[float, float]
    scenario_id: str
    config: AggConfig
    fpu_names: tuple[str, ...] = ()
    operating_losses: float = 0.0

    @property
    def ring(self) -> np.ndarray:
        return np.array([bp.pq for bp in self.boundary], dtype=float).reshape(-1, 2)

    def contains(self, pts, inflate: float = 0.0, tol: float = 1e-9) -> np.ndarray:
        """Point-in-FOR test; ``inflate`` scales the ring about the operating point."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c = np.asarray(self.operating_point_pq)
        ring = c + (1.0 + inflate) * (self.ring - c)
        return geometry.point_in_polygon(ring, pts) | (geometry.distance_to_ring(ring, pts) <= tol)

    def label_counts(self) -> dict:
        counts = {k: 0 for k in LABELS}
        for bp in self.boundary:
            counts[bp.binding] += 1
        return counts

    @property
    def diameter(self) -> float:
        r = self.ring
        if len(r) < 2:
            return 0.0
        d = r[:, None, :] - r[None, :, :]
        return float(np.sqrt(np.max(np.sum(d * d, axis=2))))


# ---------------------------------------------------------------------------
# Dispatch evaluation
# ---------------------------------------------------------------------------


@dataclass
class EvalBatch:
    pq: np.ndarray  # (B, 2) MW, Mvar
    losses: np.ndarray  # (B,)
    worst: np.ndarray  # (B, 4) smallest margin per category
    converged: np.ndarray  # (B,)
    V: np.ndarray  # (B, n) complex bus voltages

    @property
    def min_margin(self) -> np.ndarray:
        return self.worst.min(axis=1)

    def feasible(self, tol: float = 0.0) -> np.ndarray:
        return self.converged & (self.min_margin >= -tol)


class DispatchEvaluator:
    """Maps FPU dispatch vectors to interchange, losses and limit margins.

    A dispatch vector is ``[p_0, q_0, p_1, q_1, ...]`` in MW/Mvar following
    ``scenario.fpus``.
    """

    def __init__(self, scenario: Scenario, grid: Grid, options: SolverOptions = SolverOptions(),
                 s_base: float = 25.0):
        self.scenario = scenario
        self.grid = scenario.apply_to_grid(grid)
        self.model = PowerFlowModel(to_per_unit(self.grid, s_base))
        self.options = options
        self.limits = scenario.limits
        self.fpus = scenario.fpus
        g = self.model.grid_pu
        self.incidence = np.zeros((len(self.fpus), g.n_bus))
        for j, f in enumerate(self.fpus):
            if f.bus not in g.bus_ids:
                raise ValueError(f"FPU {f.name!r} sits on unknown bus {f.bus}")
            k = g.index(f.bus)
            if k == g.slack:
                raise ValueError(f"FPU {f.name!r} sits on the slack bus")
            self.incidence[j, k] = 1.0
        self.x0 = np.array([c for f in self.fpus for c in f.operating_point], dtype=float)
        self.dim = len(self.x0)
        lo = np.array([b for f in self.fpus for b in (f.polygon.bbox[0], f.polygon.bbox[2])])
        hi = np.array([b for f in self.fpus for b in (f.polygon.bbox[1], f.polygon.bbox[3])])
        self.lo, self.hi = lo, hi
        # identical polygons are projected together; boxes by one clip
        self._box = np.array([f.polygon.is_box for f in self.fpus], dtype=bool)
        self._box_cols = np.flatnonzero(np.repeat(self._box, 2))
        groups: dict = {}
        for j, f in enumerate(self.fpus):
            if not self._box[j]:
                groups.setdefault(f.polygon, []).append(j)
        self._groups = [(poly, np.array(js)) for poly, js in groups.items()]
        V, status, _ = self.model.solve(self._s_cons(self.x0[None, :]), None, options)
        self.v_start = V[0] if status[0] == 0 else None

    def _s_cons(self, X):
        X = np.atleast_2d(X)
        p = X[:, 0::2] @ self.incidence
        q = X[:, 1::2] @ self.incidence
        return (p + 1j * q) / self.model.grid_pu.s_base

    def solve(self, X, flat: bool = False, v0=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if v0 is None and not flat and self.v_start is not None:
            v0 = self.v_start[None, :]
        return self.model.solve(self._s_cons(X), v0, self.options)

    def evaluate(self, X, flat: bool = False, v0=None) -> EvalBatch:
        """Batch evaluation; ``v0`` optionally warm-starts each row."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if len(X) > _CHUNK:
            parts = [self.evaluate(X[i:i + _CHUNK], flat, None if v0 is None else v0[i:i + _CHUNK])
                     for i in range(0, len(X), _CHUNK)]
            return EvalBatch(*(np.concatenate([getattr(p, a) for p in parts])
                               for a in ("pq", "losses", "worst", "converged", "V")))
        V, status, _ = self.solve(X, flat, v0)
        q = self.model.quantities(V)
        m = self.model.margins(q, self.limits)
        worst = np.column_stack([
            m[c].min(axis=1) if m[c].shape[1] else np.full(len(X), np.inf) for c in CATEGORIES
        ])
        conv = status == 0
        worst[~conv] = -np.inf
        return EvalBatch(q["interchange"], q["losses"], worst, conv, V)

    def repair(self, X) -> np.ndarray:
        X = np.array(X, dtype=float)
        c = self._box_cols
        X[:, c] = np.clip(X[:, c], self.lo[c], self.hi[c])
        B = len(X)
        for poly, js in self._groups:
            P = X.reshape(B, -1, 2)[:, js, :].reshape(-1, 2)
            X.reshape(B, -1, 2)[:, js, :] = poly.project_many(P)[0].reshape(B, len(js), 2)
        return X

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        X = np.empty((n, self.dim))
        for j, f in enumerate(self.fpus):
            X[:, 2 * j:2 * j + 2] = f.polygon.sample(rng, n)
        return X

    def far_targets(self, x, u) -> np.ndarray:
        """Per-FPU nearest polygon point to a far point along ``u`` from ``x``."""
        out = np.empty_like(x)
        for j, f in enumerate(self.fpus):
            p0, p1, q0, q1 = f.polygon.bbox
            reach = 10.0 * (math.hypot(p1 - p0, q1 - q0) + 1e-9)
            out[2 * j:2 * j + 2] = f.polygon.project_many(x[2 * j:2 * j + 2] + reach * u)[0][0]
        return out


# ---------------------------------------------------------------------------
# Directional search
# ---------------------------------------------------------------------------


def _unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def _fitness_fn(ev: DispatchEvaluator, pq0, u, penalty):
    w = np.array([-u[1], u[0]])
    last = {}

    def fitness(X):
        # particles move little per step, so their last solution is a good start
        prev = last.get(len(X))
        v0 = None
        if prev is not None and ev.v_start is not None:
            v0 = np.where(prev.converged[:, None], prev.V, ev.v_start[None, :])
        b = ev.evaluate(X, v0=v0)
        last[len(X)] = b
        d = b.pq - pq0
        f = d @ u - penalty * np.abs(d @ w)
        f[~b.feasible()] = -np.inf
        return f

    return fitness


def _polish(ev, fitness, x, fx, u, passes):
    """Coordinate-wise bracketed line search of each FPU toward its far target."""
    grid = np.linspace(1.0 / 16, 1.0, 16)
    for _ in range(passes):
        targets = ev.far_targets(x, u)
        gain = (targets - x).reshape(-1, 2) @ u
        order = np.argsort(-gain, kind="stable")
        improved = False
        for j in order:
            if gain[j] <= 1e-12:
                continue
            sl = slice(2 * j, 2 * j + 2)
            start, step = x[sl].copy(), targets[sl] - x[sl]
            lo_t, width = 0.0, 1.0
            for _level in range(2):
                ts = lo_t + width * grid
                C = np.repeat(x[None, :], len(ts), axis=0)
                C[:, sl] = ev.fpus[j].polygon.project_many(start + ts[:, None] * step)[0]
                fc = fitness(C)
                k = int(np.argmax(fc))
                if fc[k] > fx:
                    x, fx, improved = C[k].copy(), float(fc[k]), True
                    lo_t = ts[k]
                width = width / 16
        if not improved:
            break
    return x, fx


def optimize_direction(ev: DispatchEvaluator, theta: float, config: AggConfig,
                       rng: np.random.Generator | None = None, pq0=None) -> BoundaryPoint:
    """Best feasible interchange point along search direction ``theta``."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    base = ev.evaluate(ev.x0[None, :], flat=True)
    if not base.feasible()[0]:
        raise NoFeasibleStart("operating point violates grid limits")
    pq0 = base.pq[0] if pq0 is None else np.asarray(pq0)
    u = _unit(theta)
    fitness = _fitness_fn(ev, pq0, u, config.perpendicular_penalty)

    S = config.swarm_size
    target = ev.far_targets(ev.x0, u)
    n_line = max(1, S // 5)
    ts = (np.arange(n_line) + 1.0) / n_line
    line = ev.x0[None, :] + ts[:, None] * (target - ev.x0)[None, :]
    n_rand = max(S - 1 - n_line, 0)
    X0 = np.vstack([ev.x0[None, :], line, ev.sample(rng, n_rand)])[:S]
    X0 = ev.repair(X0)
    vmax = 0.5 * (ev.hi - ev.lo)

    res = particle_swarm(fitness, ev.repair, X0, rng, config.iterations,
                         config.inertia, config.cognitive, config.social, vmax=vmax)
    x, fx = res.best_x, res.best_f
    if config.refine_passes:
        x, fx = _polish(ev, fitness, x, fx, u, config.refine_passes)
    return _boundary_point(ev, x, theta, config.binding_margin)


def _boundary_point(ev, x, theta, binding_margin) -> BoundaryPoint:
    chk = ev.evaluate(x[None, :], flat=True)
    # the fresh solve may differ from the warm-started one at the level of the
    # mismatch tolerance; anything worse falls back to the operating point
    if not chk.feasible(VERIFY_TOL)[0]:
        x = ev.x0.copy()
        chk = ev.evaluate(x[None, :], flat=True)
    label, margin = _label(chk.worst[0], binding_margin)
    return BoundaryPoint(
        pq=(float(chk.pq[0, 0]), float(chk.pq[0, 1])),
        theta=float(theta),
        dispatch=tuple((float(x[2 * j]), float(x[2 * j + 1])) for j in range(len(ev.fpus))),
        binding=label,
        margin=margin,
        losses=float(chk.losses[0]),
    )


def _label(worst, binding_margin):
    k = int(np.argmin(worst))
    margin = float(worst[k])
    return (CATEGORIES[k] if margin <= binding_margin else "fpu_limit"), margin


def attribute_constraint(bp: BoundaryPoint, scenario: Scenario, grid: Grid,
                         binding_margin: float = 0.005, options: SolverOptions = SolverOptions()) -> str:
    """Re-evaluate limits at ``bp.dispatch`` and name what fixes that edge."""
    ev = DispatchEvaluator(scenario, grid, options)
    x = np.array([c for pq in bp.dispatch for c in pq], dtype=float)
    chk = ev.evaluate(x[None, :], flat=True)
    return _label(chk.worst[0], binding_margin)[0]


# ---------------------------------------------------------------------------
# Full sweep
# ---------------------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(scenario, grid, options):
    _WORKER["ev"] = DispatchEvaluator(scenario, grid, options)


def _direction_task(args):
    k, config, pq0 = args
    ev = _WORKER["ev"]
    theta = 2.0 * math.pi * k / config.directions
    rng = np.random.default_rng([config.seed, k])
    return optimize_direction(ev, theta, config, rng, pq0)


def compute_for(scenario: Scenario, grid: Grid, config: AggConfig = AggConfig(),
                options: SolverOptions = SolverOptions(), threads: int = 1) -> FORResult:
    """Trace the FOR with ``config.directions`` evenly spaced searches.

    Each direction draws from its own generator seeded by ``(seed, k)``,
    so the result does not depend on ``threads``.
    """
    ev = DispatchEvaluator(scenario, grid, options)
    base = ev.evaluate(ev.x0[None, :], flat=True)
    if not base.feasible()[0]:
        cat, m = _label(base.worst[0], 0.0)
        raise NoFeasibleStart(f"operating point of scenario {scenario.id!r} violates {cat} (margin {m:.4g})")
    pq0 = base.pq[0]
    tasks = [(k, config, pq0) for k in range(config.directions)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                 initargs=(scenario, grid, options)) as pool:
            boundary = list(pool.map(_direction_task, tasks))
    else:
        _WORKER["ev"] = ev
        try:
            boundary = [_direction_task(t) for t in tasks]
        finally:
            _WORKER.pop("ev", None)
    ring = np.array([bp.pq for bp in boundary])
    return FORResult(
        boundary=tuple(boundary),
        area=abs(geometry.shoelace_area(ring)),
        operating_point_pq=(float(pq0[0]), float(pq0[1])),
        scenario_id=scenario.id,
        config=config,
        fpu_names=tuple(f.name for f in scenario.fpus),
        operating_losses=float(base.losses[0]),
    )


def random_sampling_for(scenario: Scenario, grid: Grid, n_samples: int, seed: int = 0,
                        options: SolverOptions = SolverOptions()):
    """Monte Carlo baseline: feasible interchange cloud and its convex hull."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    ev = DispatchEvaluator(scenario, grid, options)
    rng = np.random.default_rng(seed)
    X = ev.sample(rng, n_samples)
    b = ev.evaluate(X)
    cloud = b.pq[b.feasible()]
    hull = geometry.convex_hull(cloud) if len(cloud) else np.empty((0, 2))
    return cloud, hull


# ---------------------------------------------------------------------------
# Loss map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LossMapConfig:
    resolution: int = 41
    tolerance: float = 0.01  # fraction of the FOR diameter
    corrections: int = 6
    swarm_size: int = 12
    iterations: int = 20
    distance_weight: float = 1e6
    seed: int = 0


@dataclass(frozen=True)
class LossMap:
    p: np.ndarray  # (R*R,) target P_vert
    q: np.ndarray
    loss: np.ndarray  # NaN where infeasible
    feasible: np.ndarray
    resolution: int

    def grid(self, values=None):
        v = self.loss if values is None else values
        return np.asarray(v).reshape(self.resolution, self.resolution)

    def boundary_cells(self) -> np.ndarray:
        """Feasible cells with an infeasible 4-neighbour or on the raster edge."""
        f = self.grid(self.feasible).astype(bool)
        pad = np.pad(f, 1, constant_values=False)
        inner = pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
        return (f & ~inner).ravel()


def _barycentric_dispatch(result: FORResult, dispatch0, targets):
    """Dispatch estimates for targets inside the star-shaped FOR ring.

    Each target is located in a fan triangle (operating point, b_k, b_k+1)
    and its dispatch is the same convex combination of the three
    dispatches. Targets outside every triangle get NaN rows.
    """
    c = np.asarray(result.operating_point_pq)
    ring = result.ring
    D = np.array([np.ravel(bp.dispatch) for bp in result.boundary])
    n = len(ring)
    out = np.full((len(targets), len(dispatch0)), np.nan)
    todo = np.ones(len(targets), dtype=bool)
    for k in range(n):
        a, b = ring[k] - c, ring[(k + 1) % n] - c
        det = a[0] * b[1] - a[1] * b[0]
        if abs(det) < 1e-14:
            continue
        t = targets[todo] - c
        wa = (t[:, 0] * b[1] - t[:, 1] * b[0]) / det
        wb = (a[0] * t[:, 1] - a[1] * t[:, 0]) / det
        w0 = 1.0 - wa - wb
        hit = (wa >= -1e-12) & (wb >= -1e-12) & (w0 >= -1e-12)
        if not hit.any():
            continue
        idx = np.flatnonzero(todo)[hit]
        out[idx] = (w0[hit, None] * dispatch0[None, :] + wa[hit, None] * D[k][None, :]
                    + wb[hit, None] * D[(k + 1) % n][None, :])
        todo[idx] = False
    return out


def dispatch_for_target(ev: DispatchEvaluator, result: FORResult, targets,
                        config: LossMapConfig = LossMapConfig()):
    """Feasible dispatches reaching each target interchange point.

    Distance to the target is minimized first and losses second. Returns
    ``(X, distance, losses, accepted)``.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    tol = config.tolerance * max(result.diameter, 1e-12)
    X = _barycentric_dispatch(result, ev.x0, targets)
    valid = ~np.isnan(X[:, 0])
    X[~valid] = ev.x0
    X = ev.repair(X)
    aim = targets.copy()
    b = ev.evaluate(X)
    for _ in range(config.corrections):
        err = targets - b.pq
        aim = aim + err
        Xn = _barycentric_dispatch(result, ev.x0, aim)
        ok = ~np.isnan(Xn[:, 0]) & valid
        if not ok.any():
            break
        Xn[~ok] = X[~ok]
        Xn = ev.repair(Xn)
        bn = ev.evaluate(Xn)
        dn = np.hypot(*(targets - bn.pq).T)
        do = np.hypot(*(targets - b.pq).T)
        better = ok & bn.feasible() & ((dn < do) | ~b.feasible())
        X[better] = Xn[better]
        b = ev.evaluate(X)
    dist = np.hypot(*(targets - b.pq).T)
    feas = b.feasible()
    losses = b.losses.copy()

    # swarm repair for cells the interpolation could not reach
    retry = np.flatnonzero(valid & ~(feas & (dist <= tol)))
    if config.iterations and len(retry):
        rng = np.random.default_rng(config.seed)
        span = ev.hi - ev.lo
        for i in retry:
            tgt = targets[i]

            def fitness(Xs, tgt=tgt):
                bb = ev.evaluate(Xs)
                d = np.hypot(*(tgt - bb.pq).T)
                f = -(config.distance_weight * d + bb.losses)
                f[~bb.feasible()] = -np.inf
                return f

            seed_x = X[i] if feas[i] else ev.x0
            S = config.swarm_size
            X0 = seed_x[None, :] + 0.05 * span[None, :] * rng.standard_normal((S, ev.dim))
            X0[0] = seed_x
            X0 = ev.repair(X0)
            res = particle_swarm(fitness, ev.repair, X0, rng, config.iterations, vmax=0.25 * span)
            if np.isfinite(res.best_f):
                bb = ev.evaluate(res.best_x[None, :])
                X[i] = res.best_x
                dist[i] = float(np.hypot(*(tgt - bb.pq[0])))
                losses[i] = float(bb.losses[0])
                feas[i] = bool(bb.feasible()[0])
    accepted = valid & feas & (dist <= tol)
    return X, dist, losses, accepted


def loss_map(scenario: Scenario, grid: Grid, for_result: FORResult,
             config: LossMapConfig = LossMapConfig(), options: SolverOptions = SolverOptions()) -> LossMap:
    """Rasterize the FOR bounding box and record losses where reachable."""
    ev = DispatchEvaluator(scenario, grid, options)
    ring = for_result.ring
    R = config.resolution
    ps = np.linspace(ring[:, 0].min(), ring[:, 0].max(), R)
    qs = np.linspace(ring[:, 1].min(), ring[:, 1].max(), R)
    PP, QQ = np.meshgrid(ps, qs, indexing="ij")
    targets = np.column_stack([PP.ravel(), QQ.ravel()])
    inside = for_result.contains(targets, tol=0.0) if len(ring) >= 3 else np.zeros(len(targets), bool)
    loss = np.full(len(targets), np.nan)
    feasible = np.zeros(len(targets), dtype=bool)
    idx = np.flatnonzero(inside)
    if len(idx):
        _, _, losses, ok = dispatch_for_target(ev, for_result, targets[idx], config)
        feasible[idx] = ok
        loss[idx[ok]] = losses[ok]
    return LossMap(targets[:, 0], targets[:, 1], loss, feasible, R)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def for_result_to_dict(result: FORResult, options: SolverOptions | None = None) -> dict:
    config = asdict(result.config)
    if options is not None:
        config.update(pf_tol=options.tol, pf_max_iter=options.max_iter)
    return {
        "scenario": result.scenario_id,
        "area_mw_mvar": result.area,
        "operating_point": list(result.operating_point_pq),
        "operating_losses_mw": result.operating_losses,
        "fpus": list(result.fpu_names),
        "config": config,
        "boundary": [
            {
                "theta_rad": bp.theta,
                "p_mw": bp.pq[0],
                "q_mvar": bp.pq[1],
                "binding": bp.binding,
                "margin": bp.margin,
                "losses_mw": bp.losses,
                "dispatch": [list(d) for d in bp.dispatch],
            }
            for bp in result.boundary
        ],
    }


def for_result_from_dict(d: dict) -> FORResult:
    """Inverse of :func:`for_result_to_dict`; raises ``ValueError`` on bad input."""
    try:
        cfg = {k: v for k, v in d.get("config", {}).items() if k in AggConfig.__dataclass_fields__}
        boundary = tuple(
            BoundaryPoint(
                pq=(float(b["p_mw"]), float(b["q_mvar"])),
                theta=float(b["theta_rad"]),
                dispatch=tuple((float(p), float(q)) for p, q in b["dispatch"]),
                binding=str(b["binding"]),
                margin=float(b["margin"]),
                losses=float(b.get("losses_mw", 0.0)),
            )
            for b in d["boundary"]
        )
        op = d["operating_point"]
        return FORResult(
            boundary=boundary,
            area=float(d["area_mw_mvar"]),
            operating_point_pq=(float(op[0]), float(op[1])),
            scenario_id=str(d["scenario"]),
            config=AggConfig(**cfg),
            fpu_names=tuple(d.get("fpus", ())),
            operating_losses=float(d.get("operating_losses_mw", 0.0)),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed FOR document: {exc!r}") from exc


def for_result_csv(result: FORResult) -> str:
    rows = ["theta_rad,p_mw,q_mvar,binding,margin"]
    rows += [f"{bp.theta!r},{bp.pq[0]!r},{bp.pq[1]!r},{bp.binding},{bp.margin!r}" for bp in result.boundary]
    return "\n".join(rows) + "\n"


def loss_map_csv(lm: LossMap) -> str:
    rows = ["p_mw,q_mvar,loss_mw,feasible"]
    for p, q, loss, ok in zip(lm.p, lm.q, lm.loss, lm.feasible):
        rows.append(f"{float(p)!r},{float(q)!r},{'' if np.isnan(loss) else repr(float(loss))},{str(bool(ok)).lower()}")
    return "\n".join(rows) + "\n"
