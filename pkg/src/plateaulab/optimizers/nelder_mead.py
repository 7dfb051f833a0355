"""Nelder-Mead simplex search over a noisy zeroth-order oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import DegenerateSimplexError, RunContext, TerminalStatus, _Stop, OptimizerTrace

ALPHA, GAMMA, RHO, SIGMA = 1.0, 2.0, 0.5, 0.5
INITIAL_STEP = 0.1
MIN_DIAMETER = 1e-8


@dataclass
class Simplex:
    """``m + 1`` vertices (rows) with their cached cost values."""

    vertices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        k, m = self.vertices.shape
        if k != m + 1 or self.values.shape != (k,):
            raise ValueError(f"a simplex in {m} dimensions needs {m + 1} vertices and values")

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    def order(self) -> "Simplex":
        """Sort vertices by value, best first (stable, so ties keep their order)."""
        idx = np.argsort(self.values, kind="stable")
        self.vertices = self.vertices[idx]
        self.values = self.values[idx]
        return self

    def centroid(self) -> np.ndarray:
        """Centroid of every vertex except the worst (assumes ordered)."""
        return self.vertices[:-1].mean(axis=0)

    def diameter(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices[1:] - self.vertices[0], axis=1)))

    def check(self, tol: float = 1e-12) -> None:
        edges = self.vertices[1:] - self.vertices[0]
        sv = np.linalg.svd(edges, compute_uv=False)
        if sv[-1] <= tol * max(sv[0], 1.0):
            raise DegenerateSimplexError("simplex vertices are affinely dependent")


def _ordered(simplex: Simplex) -> Simplex:
    s = Simplex(simplex.vertices.copy(), simplex.values.copy()).order()
    s.check()
    return s


def nm_reflect(simplex: Simplex, alpha: float = ALPHA) -> np.ndarray:
    """Reflection of the worst vertex through the centroid of the others."""
    s = _ordered(simplex)
    c = s.centroid()
    return c + alpha * (c - s.vertices[-1])


def nm_expand(simplex: Simplex, reflected: np.ndarray, gamma: float = GAMMA) -> np.ndarray:
    s = _ordered(simplex)
    c = s.centroid()
    return c + gamma * (np.asarray(reflected, dtype=float) - c)


def nm_contract(simplex: Simplex, rho: float = RHO, reflected: Optional[np.ndarray] = None) -> np.ndarray:
    """Inside contraction toward the worst vertex, or outside toward ``reflected`` if given."""
    s = _ordered(simplex)
    c = s.centroid()
    target = s.vertices[-1] if reflected is None else np.asarray(reflected, dtype=float)
    return c + rho * (target - c)


def nm_shrink(simplex: Simplex, sigma: float = SIGMA) -> np.ndarray:
    """All vertices pulled toward the best one; returned in best-first order."""
    s = _ordered(simplex)
    return s.vertices[0] + sigma * (s.vertices - s.vertices[0])


def initial_simplex(x0: np.ndarray, step: float = INITIAL_STEP) -> np.ndarray:
    m = x0.shape[0]
    return np.vstack([x0, x0 + step * np.eye(m)])


def nelder_mead(oracle, initial, N: Optional[int] = None, threshold: Optional[float] = None,
                budget: Optional[int] = None, *, max_iter: Optional[int] = None,
                max_evals: Optional[int] = None, step: float = INITIAL_STEP) -> OptimizerTrace:
    """Minimize through ``oracle`` with the standard coefficients (1, 2, 0.5, 0.5).

    ``N`` must match the oracle's shots per call when given.  Terminates when an
    accepted best vertex has exact cost <= ``threshold``, when the next
    evaluation would exceed ``budget`` shots, or when the simplex diameter
    drops below 1e-8.  ``trace.counters`` tallies the moves taken.
    """
    if N is not None and N != oracle.shots:
        raise ValueError(f"oracle draws {oracle.shots} shots per call, not {N}")
    ctx = RunContext(oracle, threshold, budget, max_evals)
    trace = ctx.trace
    x0 = np.asarray(initial, dtype=float)
    m = x0.shape[0]

    if not ctx.can_afford(m + 1):
        return ctx.finish(TerminalStatus.BUDGET)

    try:
        vertices = initial_simplex(x0, step)
        evals = [ctx.evaluate(v) for v in vertices]
        values = np.array([e.value for e in evals])
        order = np.argsort(values, kind="stable")
        vertices, values = vertices[order], values[order]
        ctx.accept_evaluation(evals[order[0]])

        while True:
            if max_iter is not None and trace.iterations >= max_iter:
                return ctx.finish(TerminalStatus.CONVERGED)
            if np.max(np.abs(vertices[1:] - vertices[0])) < MIN_DIAMETER:
                return ctx.finish(TerminalStatus.CONVERGED)
            trace.iterations += 1
            best_value = values[0]

            c = vertices[:-1].mean(axis=0)
            xr = c + ALPHA * (c - vertices[-1])
            er = ctx.evaluate(xr)
            new, shrink = None, False
            if er.value < values[0]:
                xe = c + GAMMA * (xr - c)
                ee = ctx.evaluate(xe)
                if ee.value < er.value:
                    new = ee
                    trace.counters["expand"] += 1
                else:
                    new = er
                    trace.counters["reflect"] += 1
            elif er.value < values[-2]:
                new = er
                trace.counters["reflect"] += 1
            elif er.value < values[-1]:
                ec = ctx.evaluate(c + RHO * (xr - c))
                if ec.value <= er.value:
                    new = ec
                    trace.counters["contract_outside"] += 1
                else:
                    shrink = True
            else:
                ec = ctx.evaluate(c + RHO * (vertices[-1] - c))
                if ec.value < values[-1]:
                    new = ec
                    trace.counters["contract_inside"] += 1
                else:
                    shrink = True

            if shrink:
                trace.counters["shrink"] += 1
                vertices = vertices[0] + SIGMA * (vertices - vertices[0])
                shrunk = [None]
                for i in range(1, m + 1):
                    shrunk.append(ctx.evaluate(vertices[i]))
                    values[i] = shrunk[i].value
                order = np.argsort(values, kind="stable")
                vertices, values = vertices[order], values[order]
                if values[0] < best_value:
                    ctx.accept_evaluation(shrunk[order[0]])
            else:
                # insert the new vertex in sorted position, dropping the worst
                pos = int(np.searchsorted(values[:-1], new.value, side="right"))
                vertices = np.insert(vertices[:-1], pos, new.params, axis=0)
                values = np.insert(values[:-1], pos, new.value)
                if pos == 0:
                    ctx.accept_evaluation(new)
    except _Stop as stop:
        return ctx.finish(stop.status)
