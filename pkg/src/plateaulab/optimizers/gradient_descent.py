"""Fixed-step gradient descent on shot-noisy parameter-shift gradients."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .base import OptimizerTrace, RunContext, TerminalStatus, _Stop

LEARNING_RATE = 0.1
MIN_GRADIENT = 1e-12


def gradient_descent(oracle, initial, N_per_term: Optional[int] = None, learning_rate: float = LEARNING_RATE,
                     threshold: Optional[float] = None, budget: Optional[int] = None, *,
                     max_steps: Optional[int] = None, max_evals: Optional[int] = None) -> OptimizerTrace:
    """Iterate ``theta <- theta - learning_rate * g``.

    Each gradient costs ``2 m N_per_term`` shots.  Every new iterate is
    checked against ``threshold`` (so a run that crosses on its first step has
    spent exactly one gradient).  A gradient with norm below 1e-12 ends the run.
    """
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    if N_per_term is not None and N_per_term != oracle.shots:
        raise ValueError(f"oracle draws {oracle.shots} shots per call, not {N_per_term}")
    ctx = RunContext(oracle, threshold, budget, max_evals)
    trace = ctx.trace
    x = np.array(initial, dtype=float)
    try:
        while True:
            if max_steps is not None and trace.iterations >= max_steps:
                return ctx.finish(TerminalStatus.CONVERGED)
            g = ctx.gradient(x)
            trace.iterations += 1
            if np.linalg.norm(g) < MIN_GRADIENT:
                ctx.accept(x, None)
                return ctx.finish(TerminalStatus.CONVERGED)
            x = x - learning_rate * g
            ctx.accept(x, None)
    except _Stop as stop:
        return ctx.finish(stop.status)
