"""Linear-approximation trust-region search (the unconstrained COBYLA mechanism).

Keep a simplex of ``m + 1`` points, interpolate the cost by a hyperplane,
step from the best vertex a full trust radius down the fitted slope and drop
the worst vertex.  The radius is halved whenever a step fails to beat the best
cached value and is never enlarged.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .base import DegenerateSimplexError, OptimizerTrace, RunContext, TerminalStatus, _Stop
from .nelder_mead import Simplex

log = logging.getLogger(__name__)

RHO_BEGIN = 1.0
RHO_END = 1e-8
SHRINK = 0.5
COND_LIMIT = 1e12


def fit_hyperplane(simplex: Simplex) -> tuple[np.ndarray, float]:
    """Slope and offset of the affine function interpolating the simplex values."""
    V = simplex.vertices
    k, m = V.shape
    A = np.hstack([V, np.ones((k, 1))])
    edges = V[1:] - V[0]
    if m == 0 or np.linalg.cond(edges) > COND_LIMIT:
        raise DegenerateSimplexError("cannot fit a hyperplane to a degenerate simplex")
    try:
        sol = np.linalg.solve(A, simplex.values)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplexError(str(exc)) from exc
    return sol[:m], float(sol[m])


def cobyla(oracle, initial, N: Optional[int] = None, threshold: Optional[float] = None,
           budget: Optional[int] = None, *, rho_begin: float = RHO_BEGIN, rho_end: float = RHO_END,
           max_iter: Optional[int] = None, max_evals: Optional[int] = None) -> OptimizerTrace:
    """Run the trust-region simplex variant; ``trace.radii`` logs the radius per iteration."""
    if N is not None and N != oracle.shots:
        raise ValueError(f"oracle draws {oracle.shots} shots per call, not {N}")
    if rho_begin <= 0:
        raise ValueError("rho_begin must be positive")
    ctx = RunContext(oracle, threshold, budget, max_evals)
    trace = ctx.trace
    x0 = np.asarray(initial, dtype=float)
    m = x0.shape[0]
    rho = float(rho_begin)

    if not ctx.can_afford(m + 1):
        return ctx.finish(TerminalStatus.BUDGET)

    def seed_simplex(center, center_value, radius):
        verts = center + radius * np.vstack([np.zeros(m), np.eye(m)])
        vals = np.empty(m + 1)
        vals[0] = center_value
        evs = [None]
        for i in range(1, m + 1):
            evs.append(ctx.evaluate(verts[i]))
            vals[i] = evs[i].value
        return Simplex(verts, vals), evs

    try:
        first = ctx.evaluate(x0)
        simplex, evs = seed_simplex(x0, first.value, rho)
        evs[0] = first
        b = int(np.argmin(simplex.values))
        ctx.accept_evaluation(evs[b])

        while True:
            trace.radii.append(rho)
            if rho < rho_end:
                return ctx.finish(TerminalStatus.CONVERGED)
            if max_iter is not None and trace.iterations >= max_iter:
                return ctx.finish(TerminalStatus.CONVERGED)
            trace.iterations += 1

            values = simplex.values
            b = int(np.argmin(values))
            try:
                slope, _ = fit_hyperplane(simplex)
            except DegenerateSimplexError:
                log.info("cobyla: degenerate simplex, re-seeding around best vertex (rho=%g)", rho)
                trace.counters["reseeds"] += 1
                simplex, evs = seed_simplex(simplex.vertices[b].copy(), values[b], rho)
                nb = int(np.argmin(simplex.values))
                if nb != 0:
                    ctx.accept_evaluation(evs[nb])
                continue

            gnorm = float(np.linalg.norm(slope))
            if not gnorm > 0.0:
                rho *= SHRINK
                trace.counters["flat"] += 1
                continue

            w = int(np.argmax(values))
            if w == b:
                w = (b + 1) % (m + 1)
            x_new = simplex.vertices[b] - rho * slope / gnorm
            ev = ctx.evaluate(x_new)
            improved = ev.value < values[b]
            simplex.vertices[w] = x_new
            simplex.values[w] = ev.value
            if improved:
                trace.counters["improve"] += 1
                ctx.accept_evaluation(ev)
            else:
                trace.counters["shrink"] += 1
                rho *= SHRINK
    except _Stop as stop:
        return ctx.finish(stop.status)
