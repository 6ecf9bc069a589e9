"""Global-best particle swarm optimizer (maximization) with a repair hook."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SwarmResult:
    best_x: np.ndarray
    best_f: float
    evaluations: int


def particle_swarm(fitness, repair, x0, rng: np.random.Generator, iterations: int,
                   inertia: float = 0.72, cognitive: float = 1.49, social: float = 1.49,
                   vmax=None, v0=None) -> SwarmResult:
    """Maximize ``fitness`` over repaired positions.

    ``fitness`` maps an (S, D) array to (S,) scores where ``-inf`` marks a
    rejected particle; ``repair`` maps positions back into the feasible box
    of the decision variables. ``x0`` must already be repaired. The best
    particle is tracked over the whole run, ties keep the earlier one.
    """
    x = np.array(x0, dtype=float)
    S, D = x.shape
    v = np.zeros_like(x) if v0 is None else np.array(v0, dtype=float)
    f = fitness(x)
    evaluations = S
    pbest, pbest_f = x.copy(), f.copy()
    g = int(np.argmax(pbest_f))
    gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])

    for _ in range(iterations):
        r1 = rng.random((S, D))
        r2 = rng.random((S, D))
        v = inertia * v + cognitive * r1 * (pbest - x) + social * r2 * (gbest - x)
        if vmax is not None:
            v = np.clip(v, -vmax, vmax)
        x_new = repair(x + v)
        # keep velocity consistent with the repaired move
        v = x_new - x
        x = x_new
        f = fitness(x)
        evaluations += S
        better = f > pbest_f
        pbest[better] = x[better]
        pbest_f[better] = f[better]
        g = int(np.argmax(pbest_f))
        if pbest_f[g] > gbest_f:
            gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
    return SwarmResult(gbest, gbest_f, evaluations)
