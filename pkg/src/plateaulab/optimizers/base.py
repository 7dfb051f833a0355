"""Shared plumbing for the optimizers: oracle protocol, run bookkeeping, traces."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Protocol

import numpy as np

from ..oracle import CostEvaluation, ShotLedger

log = logging.getLogger(__name__)


class ZerothOrderOracle(Protocol):
    """What an optimizer may touch: noisy values in, shots charged to ``ledger``."""

    shots: int
    ledger: ShotLedger

    @property
    def dimension(self) -> int: ...

    def evaluate(self, params) -> CostEvaluation: ...


class FunctionOracle:
    """Wrap a classical test function as an oracle (each call charged ``shots``)."""

    def __init__(self, func: Callable[[np.ndarray], float], dimension: int, shots: int = 1,
                 grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 ledger: Optional[ShotLedger] = None):
        self.func = func
        self.grad = grad
        self._dimension = dimension
        self.shots = shots
        self.ledger = ledger if ledger is not None else ShotLedger()

    @property
    def dimension(self) -> int:
        return self._dimension

    def exact(self, params) -> float:
        return float(self.func(np.asarray(params, dtype=float)))

    def evaluate(self, params) -> CostEvaluation:
        x = np.array(params, dtype=float)
        value = float(self.func(x))
        self.ledger.record(self.shots)
        return CostEvaluation(value, self.shots, x, value)

    def gradient(self, params) -> np.ndarray:
        if self.grad is None:
            raise TypeError("this oracle has no gradient")
        self.ledger.record_many(2 * self._dimension, self.shots)
        return np.asarray(self.grad(np.asarray(params, dtype=float)), dtype=float)


class TerminalStatus(str, Enum):
    THRESHOLD = "threshold_reached"
    BUDGET = "budget_exhausted"
    CONVERGED = "internal_convergence"


class DegenerateSimplexError(np.linalg.LinAlgError):
    pass


class NumericFailure(ArithmeticError):
    pass


@dataclass
class TraceStep:
    params: np.ndarray
    estimate: Optional[float]
    exact: Optional[float]
    shots: int


@dataclass
class OptimizerTrace:
    """Every new optimizer-best point, in order, with the shots spent so far."""

    steps: list[TraceStep] = field(default_factory=list)
    status: Optional[TerminalStatus] = None
    iterations: int = 0
    evaluations: int = 0
    counters: Counter = field(default_factory=Counter)
    radii: list[float] = field(default_factory=list)
    state: dict = field(default_factory=dict)

    @property
    def best(self) -> Optional[TraceStep]:
        return self.steps[-1] if self.steps else None

    @property
    def threshold_shots(self) -> Optional[int]:
        """Ledger total at the first threshold crossing, if there was one."""
        if self.status is TerminalStatus.THRESHOLD:
            return self.steps[-1].shots
        return None


class _Stop(Exception):
    def __init__(self, status: TerminalStatus):
        super().__init__(status.value)
        self.status = status


class RunContext:
    """Mediates every oracle call of a single optimizer run.

    Stops the run (by raising ``_Stop``) when the next evaluation would push
    the ledger past ``budget`` or exceed ``max_evals``, or when a newly
    accepted best point has exact cost at or below ``threshold``.  The exact
    cost is simulator bookkeeping and never reaches the optimizer.
    """

    def __init__(self, oracle, threshold: Optional[float] = None,
                 budget: Optional[int] = None, max_evals: Optional[int] = None):
        self.oracle = oracle
        self.threshold = threshold
        self.budget = budget
        self.max_evals = max_evals
        self.trace = OptimizerTrace()

    @property
    def ledger(self) -> ShotLedger:
        return self.oracle.ledger

    def _charge(self, evaluations: int, per_eval: int) -> None:
        if self.budget is not None and self.ledger.total + evaluations * per_eval > self.budget:
            raise _Stop(TerminalStatus.BUDGET)
        if self.max_evals is not None and self.trace.evaluations + evaluations > self.max_evals:
            raise _Stop(TerminalStatus.BUDGET)

    def can_afford(self, evaluations: int) -> bool:
        try:
            self._charge(evaluations, self.oracle.shots)
        except _Stop:
            return False
        return True

    def evaluate(self, x: np.ndarray) -> CostEvaluation:
        self._charge(1, self.oracle.shots)
        ev = self.oracle.evaluate(x)
        self.trace.evaluations += 1
        if not np.isfinite(ev.value):
            raise NumericFailure(f"oracle returned {ev.value!r}")
        return ev

    def gradient(self, x: np.ndarray) -> np.ndarray:
        m = self.oracle.dimension
        self._charge(2 * m, self.oracle.shots)
        g = self.oracle.gradient(x)
        self.trace.evaluations += 2 * m
        return g

    def accept(self, x: np.ndarray, estimate: Optional[float], exact: Optional[float] = None) -> None:
        """Record a new best point and test it against the threshold."""
        if exact is None and hasattr(self.oracle, "exact"):
            exact = self.oracle.exact(x)
        self.trace.steps.append(TraceStep(np.array(x, dtype=float), estimate, exact, self.ledger.total))
        if self.threshold is not None and exact is not None and exact <= self.threshold:
            raise _Stop(TerminalStatus.THRESHOLD)

    def accept_evaluation(self, ev: CostEvaluation) -> None:
        self.accept(ev.params, ev.value, ev.exact)

    def finish(self, status: TerminalStatus) -> OptimizerTrace:
        self.trace.status = status
        return self.trace
