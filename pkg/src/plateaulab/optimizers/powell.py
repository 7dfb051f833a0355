"""Powell's conjugate-direction method with bounded Brent line searches."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional

import numpy as np

from .base import NumericFailure, OptimizerTrace, RunContext, TerminalStatus, _Stop

log = logging.getLogger(__name__)

GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
SQRT_EPS = math.sqrt(np.finfo(float).eps)
MAX_LINE_EVALS = 100
LINE_BRACKET = (-math.pi, math.pi)
MIN_DISPLACEMENT = 1e-8


def parabolic_step(x1: float, f1: float, x2: float, f2: float, x3: float, f3: float) -> float:
    """Abscissa of the vertex of the parabola through three points."""
    num = (x2 - x1) ** 2 * (f2 - f3) - (x2 - x3) ** 2 * (f2 - f1)
    den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1)
    if den == 0.0:
        raise ZeroDivisionError("points are collinear")
    return x2 - 0.5 * num / den


def brent_line_minimize(f: Callable[[float], float], bracket: tuple[float, float] = LINE_BRACKET,
                        tol: float = 1e-3, max_evals: int = MAX_LINE_EVALS) -> tuple[float, float]:
    """Minimize ``f`` on the closed interval ``bracket``.

    Brent's method: parabolic interpolation through the three best points,
    falling back to golden-section steps whenever the parabola is untrustworthy.
    Never evaluates outside the bracket; returns ``(argmin, min)`` over the
    points actually evaluated.
    """
    a, b = map(float, bracket)
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise ValueError(f"invalid bracket {bracket!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    def call(u):
        fu = float(f(u))
        if not math.isfinite(fu):
            raise NumericFailure(f"line function returned {fu!r} at {u!r}")
        return fu

    x = w = v = a + GOLDEN * (b - a)
    fx = fw = fv = call(x)
    nfev = 1
    d = e = 0.0
    while nfev < max_evals:
        mid = 0.5 * (a + b)
        tol1 = SQRT_EPS * abs(x) + tol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - mid) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev, e = e, d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < mid else -tol1
                use_golden = False
        if use_golden:
            e = (b - x) if x < mid else (a - x)
            d = GOLDEN * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = call(u)
        nfev += 1
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def powell(oracle, initial, N: Optional[int] = None, threshold: Optional[float] = None,
           budget: Optional[int] = None, *, xtol: float = 1e-3, ftol: Optional[float] = None,
           max_sweeps: Optional[int] = None, max_evals: Optional[int] = None,
           bracket: tuple[float, float] = LINE_BRACKET) -> OptimizerTrace:
    """Sequential line searches along a direction set that is updated after every sweep.

    After a sweep with displacements ``a``, the direction with the largest
    ``|a_j|`` (lowest index on ties) is replaced by ``normalize(sum_i a_i v_i)``.
    Every line search moves the point to the best abscissa it evaluated.
    Besides threshold and budget, the run ends only when every displacement of
    a sweep is below 1e-8; pass ``ftol`` to also stop once a sweep's relative
    decrease falls under it.
    """
    if N is not None and N != oracle.shots:
        raise ValueError(f"oracle draws {oracle.shots} shots per call, not {N}")
    ctx = RunContext(oracle, threshold, budget, max_evals)
    trace = ctx.trace
    x = np.array(initial, dtype=float)
    m = x.shape[0]
    directions = np.eye(m)
    trace.state["directions"] = directions

    if not ctx.can_afford(1):
        return ctx.finish(TerminalStatus.BUDGET)
    try:
        ev = ctx.evaluate(x)
        fx = ev.value
        ctx.accept_evaluation(ev)
        while True:
            if max_sweeps is not None and trace.iterations >= max_sweeps:
                return ctx.finish(TerminalStatus.CONVERGED)
            trace.iterations += 1
            f_start = fx
            disp = np.zeros(m)
            for i in range(m):
                v_i = directions[i]
                seen = {}

                def line(t, x=x, v_i=v_i, seen=seen):
                    e = ctx.evaluate(x + t * v_i)
                    seen[t] = e
                    return e.value

                # move to the line minimum even if its noisy value is above fx, so one
                # lucky low estimate cannot freeze the search
                t, ft = brent_line_minimize(line, bracket, xtol)
                x = x + t * v_i
                fx = ft
                disp[i] = t
                ctx.accept_evaluation(seen[t])

            j = int(np.argmax(np.abs(disp)))
            new_dir = disp @ directions
            norm = np.linalg.norm(new_dir)
            if norm >= 1e-10:
                directions[j] = new_dir / norm
                trace.counters["replacements"] += 1
            if np.linalg.matrix_rank(directions, tol=1e-10) < m:
                log.info("powell: direction set lost rank, resetting to coordinate axes")
                trace.counters["resets"] += 1
                directions = np.eye(m)
            trace.state["directions"] = directions

            if np.max(np.abs(disp)) < MIN_DISPLACEMENT:
                return ctx.finish(TerminalStatus.CONVERGED)
            if ftol is not None and 2.0 * (f_start - fx) <= ftol * (abs(f_start) + abs(fx)) + 1e-20:
                return ctx.finish(TerminalStatus.CONVERGED)
    except _Stop as stop:
        return ctx.finish(stop.status)
