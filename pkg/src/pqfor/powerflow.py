"""AC power flow (full Newton-Raphson, polar form) and limit evaluation.

Injections are consumption-positive (MW, Mvar). The solver core works on
batches of operating points so the aggregation layer can evaluate a whole
particle swarm with one call; :func:`solve_power_flow` is the single-case
front end.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import PerUnitGrid, admittance_matrix

__all__ = [
    "SolverOptions",
    "OperatingLimits",
    "PowerFlowSolution",
    "ConstraintReport",
    "PowerFlowError",
    "NonConvergent",
    "SingularJacobian",
    "PowerFlowModel",
    "solve_power_flow",
    "vertical_interchange",
    "evaluate_limits",
    "total_losses",
    "CATEGORIES",
]

CATEGORIES = ("undervoltage", "overvoltage", "line_current", "transformer_loading")

# Magnitudes outside this band mean the iteration has run away.
_VM_RUNAWAY = (0.05, 5.0)


class PowerFlowError(RuntimeError):
    pass


class NonConvergent(PowerFlowError):
    pass


class SingularJacobian(PowerFlowError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8  # max nodal mismatch, pu
    max_iter: int = 50


@dataclass(frozen=True)
class OperatingLimits:
    v_min: float = 0.9
    v_max: float = 1.1

    def __post_init__(self):
        if not 0 < self.v_min < self.v_max:
            raise ValueError("limits must satisfy 0 < v_min < v_max")


class PowerFlowModel:
    """Precomputed matrices for repeated solves on one per-unit grid."""

    def __init__(self, grid_pu: PerUnitGrid):
        self.grid_pu = grid_pu
        self.Y = admittance_matrix(grid_pu).matrix
        n = grid_pu.n_bus
        self.n = n
        self.slack = grid_pu.slack
        self.pq = np.array([k for k in range(n) if k != grid_pu.slack], dtype=int)
        self.Ypq = self.Y[np.ix_(self.pq, self.pq)]
        self.Ypq_s = self.Y[self.pq, grid_pu.slack]
        self.line_rating = grid_pu.line_rating
        self.trafo_rating = grid_pu.trafo_rating

    # -- core solver ---------------------------------------------------------

    def solve(self, s_cons, v0=None, options: SolverOptions = SolverOptions()):
        """Solve a batch of power flows.

        Parameters
        ----------
        s_cons : complex array (B, n)
            Consumption per bus in per-unit (slack column ignored).
        v0 : complex array (B, n), optional
            Start voltages; flat start when omitted.

        Returns
        -------
        V : complex array (B, n)
        status : int array (B,)
            0 converged, 1 iteration cap / runaway, 2 singular Jacobian.
        iterations : int array (B,)
        """
        s_cons = np.atleast_2d(np.asarray(s_cons, dtype=complex))
        B = s_cons.shape[0]
        pq = self.pq
        npq = len(pq)
        s_spec = -s_cons[:, pq]
        if v0 is None:
            V = np.ones((B, self.n), dtype=complex)
        else:
            V = np.array(np.broadcast_to(v0, (B, self.n)), dtype=complex)
            V[:, self.slack] = 1.0
        vs = V[:, self.slack][:, None]
        Vm = np.abs(V[:, pq])
        Va = np.angle(V[:, pq])

        status = np.ones(B, dtype=int)
        iterations = np.zeros(B, dtype=int)
        active = np.ones(B, dtype=bool)
        Ypq, Ypqs = self.Ypq, self.Ypq_s

        for it in range(options.max_iter + 1):
            Vp = Vm * np.exp(1j * Va)
            I = Vp @ Ypq.T + vs * Ypqs
            mis = Vp * np.conj(I) - s_spec
            F = np.concatenate([mis.real, mis.imag], axis=1)
            err = np.max(np.abs(F), axis=1)
            ok = active & (err < options.tol)
            status[ok] = 0
            iterations[ok] = it
            bad = active & ~ok & (~np.isfinite(err) | np.any((Vm < _VM_RUNAWAY[0]) | (Vm > _VM_RUNAWAY[1]), axis=1))
            iterations[bad] = it
            active &= ~(ok | bad)
            if not active.any() or it == options.max_iter:
                iterations[active] = it
                break
            a = np.flatnonzero(active)
            Va_a, Vm_a, Vp_a, I_a = Va[a], Vm[a], Vp[a], I[a]
            Vn = Vp_a / Vm_a
            # dS/dVm and dS/dVa restricted to PQ buses (MATPOWER conventions)
            YV = Ypq[None, :, :] * Vn[:, None, :]
            dS_dVm = Vp_a[:, :, None] * np.conj(YV)
            idx = np.arange(npq)
            dS_dVm[:, idx, idx] += np.conj(I_a) * Vn
            dS_dVa = -1j * Vp_a[:, :, None] * np.conj(Ypq[None, :, :] * Vp_a[:, None, :])
            dS_dVa[:, idx, idx] += 1j * Vp_a * np.conj(I_a)
            J = np.empty((len(a), 2 * npq, 2 * npq))
            J[:, :npq, :npq] = dS_dVa.real
            J[:, :npq, npq:] = dS_dVm.real
            J[:, npq:, :npq] = dS_dVa.imag
            J[:, npq:, npq:] = dS_dVm.imag
            try:
                dx = np.linalg.solve(J, -F[a][:, :, None])[:, :, 0]
                singular = np.zeros(len(a), dtype=bool)
            except np.linalg.LinAlgError:
                dx = np.zeros((len(a), 2 * npq))
                singular = np.zeros(len(a), dtype=bool)
                for k in range(len(a)):
                    try:
                        dx[k] = np.linalg.solve(J[k], -F[a[k]])
                    except np.linalg.LinAlgError:
                        singular[k] = True
            if singular.any():
                s_idx = a[singular]
                status[s_idx] = 2
                iterations[s_idx] = it
                active[s_idx] = False
            Va[a] = Va_a + dx[:, :npq]
            Vm[a] = Vm_a + dx[:, npq:]

        V[:, pq] = Vm * np.exp(1j * Va)
        return V, status, iterations

    # -- derived quantities --------------------------------------------------

    def branch_flows(self, V):
        """Per-branch from/to currents (pu) and complex powers (pu)."""
        g = self.grid_pu
        Vf = V[:, g.f]
        Vt = V[:, g.t]
        If = (Vf - Vt) * g.y_series + Vf * g.y_shunt_f
        It = (Vt - Vf) * g.y_series + Vt * g.y_shunt_t
        return If, It, Vf * np.conj(If), Vt * np.conj(It)

    def slack_power(self, V):
        """Complex power injected at the slack bus (pu)."""
        I = V @ self.Y[self.slack]
        return V[:, self.slack] * np.conj(I)

    def quantities(self, V):
        """Voltage magnitudes, line currents (A), transformer loadings (MVA),
        interchange (MW, Mvar) and losses (MW) for a batch of solutions."""
        g = self.grid_pu
        If, It, Sf, St = self.branch_flows(V)
        nl = g.n_lines
        i_amp = np.maximum(np.abs(If) * g.i_base_f, np.abs(It) * g.i_base_t)
        s_mva = np.maximum(np.abs(Sf), np.abs(St)) * g.s_base
        s_slack = self.slack_power(V) * g.s_base
        losses = np.sum((Sf + St).real, axis=1) * g.s_base
        return dict(
            vm=np.abs(V),
            line_current=i_amp[:, :nl],
            trafo_loading=s_mva[:, nl:],
            interchange=np.stack([s_slack.real, s_slack.imag], axis=1),
            losses=losses,
        )

    def margins(self, q, limits: OperatingLimits):
        """Relative margins (limit - value)/limit per category, batch-wise."""
        vm = np.delete(q["vm"], self.slack, axis=1)
        return dict(
            undervoltage=(vm - limits.v_min) / limits.v_min,
            overvoltage=(limits.v_max - vm) / limits.v_max,
            line_current=(self.line_rating - q["line_current"]) / self.line_rating,
            transformer_loading=(self.trafo_rating - q["trafo_loading"]) / self.trafo_rating,
        )

    def consumption_pu(self, bus_p, bus_q):
        return (np.asarray(bus_p) + 1j * np.asarray(bus_q)) / self.grid_pu.s_base


# ---------------------------------------------------------------------------
# Single-case API
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PowerFlowSolution:
    bus_ids: tuple[int, ...]
    voltage: np.ndarray  # complex pu
    line_current: np.ndarray  # A, larger end
    trafo_loading: np.ndarray  # MVA, larger end
    slack_injection: tuple[float, float]  # MW, Mvar
    total_losses: float  # MW
    iterations: int
    converged: bool
    status: str = "converged"
    mismatch: float = 0.0

    @property
    def vm(self) -> np.ndarray:
        return np.abs(self.voltage)

    @property
    def va(self) -> np.ndarray:
        return np.angle(self.voltage)

    def raise_for_status(self) -> None:
        if self.status == "singular_jacobian":
            raise SingularJacobian("singular Jacobian at the requested operating point")
        if not self.converged:
            raise NonConvergent(f"no convergence after {self.iterations} iterations")


_STATUS = {0: "converged", 1: "non_convergent", 2: "singular_jacobian"}


def _model(grid_pu) -> PowerFlowModel:
    return grid_pu if isinstance(grid_pu, PowerFlowModel) else PowerFlowModel(grid_pu)


def solve_power_flow(grid_pu, injections: dict, options: SolverOptions = SolverOptions(),
                     v0=None) -> PowerFlowSolution:
    """Solve one power flow.

    ``injections`` maps bus id -> (P MW, Q Mvar), consumption-positive.
    Failure to converge is reported through ``converged``/``status``;
    call :meth:`PowerFlowSolution.raise_for_status` to turn it into an error.
    """
    model = _model(grid_pu)
    g = model.grid_pu
    s = np.zeros(model.n, dtype=complex)
    for bus_id, (p, q) in injections.items():
        if bus_id not in g.bus_ids:
            raise KeyError(f"injection at unknown bus {bus_id}")
        k = g.index(bus_id)
        if k == g.slack and (p or q):
            raise ValueError("the slack bus cannot carry a specified injection")
        s[k] += complex(p, q) / g.s_base
    V, status, its = model.solve(s[None, :], None if v0 is None else np.asarray(v0)[None, :], options)
    q = model.quantities(V)
    It = V[0, model.pq] @ model.Ypq.T + V[0, model.slack] * model.Ypq_s
    mis = np.abs(V[0, model.pq] * np.conj(It) + s[model.pq])
    return PowerFlowSolution(
        bus_ids=g.bus_ids,
        voltage=V[0],
        line_current=q["line_current"][0],
        trafo_loading=q["trafo_loading"][0],
        slack_injection=(float(q["interchange"][0, 0]), float(q["interchange"][0, 1])),
        total_losses=float(q["losses"][0]),
        iterations=int(its[0]),
        converged=bool(status[0] == 0),
        status=_STATUS[int(status[0])],
        mismatch=float(mis.max()) if len(mis) else 0.0,
    )


def vertical_interchange(solution: PowerFlowSolution) -> tuple[float, float]:
    """(P_vert, Q_vert) in MW/Mvar; positive P flows from HV into the MV grid."""
    solution.raise_for_status()
    return solution.slack_injection


def total_losses(solution: PowerFlowSolution) -> float:
    """Real power lost in all branches (series and shunt conductance), MW."""
    solution.raise_for_status()
    return solution.total_losses


@dataclass(frozen=True, eq=False)
class ConstraintReport:
    margins: dict  # category -> per-element relative margins
    worst: dict  # category -> smallest margin (inf if category empty)
    feasible: bool

    def binding(self) -> tuple[str, float]:
        """Category with the smallest margin and that margin."""
        cat = min(CATEGORIES, key=lambda c: self.worst[c])
        return cat, self.worst[cat]


def evaluate_limits(solution: PowerFlowSolution, limits: OperatingLimits, grid_pu) -> ConstraintReport:
    """Assess every bus, line and transformer against ``limits`` (inclusive)."""
    solution.raise_for_status()
    model = _model(grid_pu)
    q = dict(
        vm=solution.vm[None, :],
        line_current=solution.line_current[None, :],
        trafo_loading=solution.trafo_loading[None, :],
    )
    m = {k: v[0] for k, v in model.margins(q, limits).items()}
    worst = {k: float(v.min()) if v.size else float("inf") for k, v in m.items()}
    return ConstraintReport(m, worst, all(w >= 0 for w in worst.values()))
