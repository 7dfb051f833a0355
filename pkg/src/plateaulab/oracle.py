"""Exact and finite-shot evaluation of the local compilation cost.

The cost of a state is ``1 - (1/n) * sum_i P(qubit i reads 0)``; it is 0 exactly
when ``V(theta)|0> = |0>`` up to a global phase.  A finite-shot estimate draws
``N`` full bitstrings from the Born distribution and scores every qubit of every
shot, so a single ``N``-shot batch estimates all marginals jointly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .quantum import AnsatzSpec, Statevector, batch_probabilities

SHIFT = math.pi / 2


@dataclass
class CostEvaluation:
    """One oracle call.

    ``shots == 0`` marks an exact evaluation.  ``exact`` carries the noiseless
    cost when the simulator knows it; optimizers must only look at ``value``.
    """

    value: float
    shots: int
    params: np.ndarray
    exact: Optional[float] = None


@dataclass
class ShotLedger:
    """Cumulative shot accounting for a single optimization run."""

    total: int = 0
    keep_log: bool = False
    log: list = field(default_factory=list)
    evaluations: int = 0

    def record(self, shots: int) -> int:
        if shots < 0:
            raise ValueError("shot counts are non-negative")
        index = self.evaluations
        self.evaluations += 1
        self.total += int(shots)
        if self.keep_log:
            self.log.append((index, int(shots)))
        return index

    def record_many(self, count: int, shots: int) -> None:
        for _ in range(count):
            self.record(shots)


@lru_cache(maxsize=None)
def _zero_counts(n: int) -> np.ndarray:
    """Number of qubits reading 0 in each basis state."""
    idx = np.arange(1 << n)
    ones = np.zeros(1 << n, dtype=np.int64)
    for q in range(n):
        ones += (idx >> q) & 1
    out = (n - ones).astype(float)
    out.setflags(write=False)
    return out


def marginal_zero_probabilities(state: Statevector) -> np.ndarray:
    """Probability that each qubit measures 0, indexed by qubit."""
    probs = state.probabilities().reshape((2,) * state.n)
    out = np.empty(state.n)
    for q in range(state.n):
        axes = tuple(a for a in range(state.n) if a != q)
        out[q] = probs.sum(axis=axes)[0] if axes else probs[0]
    return out


def state_cost(state: Statevector) -> float:
    """Local cost of an arbitrary state."""
    return float(1.0 - np.mean(marginal_zero_probabilities(state)))


def _cost_from_probabilities(probs: np.ndarray, n: int) -> np.ndarray:
    return 1.0 - probs @ _zero_counts(n) / n


def exact_cost(spec: AnsatzSpec, params) -> float:
    probs = batch_probabilities(spec, params)
    return float(_cost_from_probabilities(probs, spec.n)[0])


def _check_shots(N: int) -> int:
    if int(N) != N or N < 1:
        raise ValueError(f"shot count must be a positive integer, got {N!r}")
    return int(N)


def _normalized(probs: np.ndarray) -> np.ndarray:
    return probs / probs.sum(axis=-1, keepdims=True)


def sample_bitstrings(state: Statevector, N: int, rng: np.random.Generator) -> dict[str, int]:
    """Draw ``N`` shots; returns counts keyed by bitstring (qubit 0 first)."""
    N = _check_shots(N)
    counts = rng.multinomial(N, _normalized(state.probabilities()))
    return {format(int(b), f"0{state.n}b"): int(c) for b, c in zip(np.flatnonzero(counts), counts[counts > 0])}


def estimate_from_counts(counts, n: int) -> float:
    """Shot-averaged local cost from a histogram over basis indices or a bitstring map."""
    if isinstance(counts, dict):
        shots = sum(counts.values())
        zeros = sum(c * bits.count("0") for bits, c in counts.items())
        return 1.0 - zeros / (n * shots)
    counts = np.asarray(counts)
    return float(1.0 - counts @ _zero_counts(n) / (n * counts.sum()))


def _sampled_costs(probs: np.ndarray, n: int, N: int, rng: np.random.Generator) -> np.ndarray:
    counts = rng.multinomial(N, _normalized(probs))
    return 1.0 - counts @ _zero_counts(n) / (n * N)


def sampled_cost(spec: AnsatzSpec, params, N: int, rng: np.random.Generator,
                 ledger: Optional[ShotLedger] = None) -> CostEvaluation:
    N = _check_shots(N)
    values = np.array(params, dtype=float)
    probs = batch_probabilities(spec, values)
    exact = float(_cost_from_probabilities(probs, spec.n)[0])
    value = float(_sampled_costs(probs[0], spec.n, N, rng))
    if ledger is not None:
        ledger.record(N)
    return CostEvaluation(value, N, values, exact)


def _shifted(params: np.ndarray) -> np.ndarray:
    m = params.shape[0]
    shifts = np.concatenate([np.eye(m), -np.eye(m)]) * SHIFT
    return params[None, :] + shifts


def exact_gradient(spec: AnsatzSpec, params) -> np.ndarray:
    """Parameter-shift gradient: (C(theta + pi/2 e_mu) - C(theta - pi/2 e_mu)) / 2."""
    values = np.asarray(params, dtype=float)
    costs = _cost_from_probabilities(batch_probabilities(spec, _shifted(values)), spec.n)
    return 0.5 * (costs[:spec.m] - costs[spec.m:])


def sampled_gradient(spec: AnsatzSpec, params, N_per_term: int, rng: np.random.Generator,
                     ledger: Optional[ShotLedger] = None) -> np.ndarray:
    """Parameter-shift gradient with each of the ``2m`` shifted costs estimated from ``N_per_term`` shots."""
    N = _check_shots(N_per_term)
    values = np.asarray(params, dtype=float)
    probs = batch_probabilities(spec, _shifted(values))
    costs = _sampled_costs(probs, spec.n, N, rng)
    if ledger is not None:
        ledger.record_many(2 * spec.m, N)
    return 0.5 * (costs[:spec.m] - costs[spec.m:])


class CompilationOracle:
    """Zeroth-order oracle for the compilation cost with a fixed per-call shot budget.

    ``shots=0`` gives the noiseless oracle (exact cost, nothing charged to the
    ledger).  The sampling stream is owned by the oracle, so a run is
    reproducible from ``seed`` alone.
    """

    def __init__(self, spec: AnsatzSpec, shots: int = 0, seed=None,
                 ledger: Optional[ShotLedger] = None):
        if shots < 0:
            raise ValueError("shots must be >= 0")
        self.spec = spec
        self.shots = int(shots)
        self.rng = np.random.default_rng(seed)
        self.ledger = ledger if ledger is not None else ShotLedger()

    @property
    def dimension(self) -> int:
        return self.spec.m

    def exact(self, params) -> float:
        return exact_cost(self.spec, params)

    def evaluate(self, params) -> CostEvaluation:
        values = np.array(params, dtype=float)
        probs = batch_probabilities(self.spec, values)
        exact = float(_cost_from_probabilities(probs, self.spec.n)[0])
        if self.shots == 0:
            value = exact
        else:
            value = float(_sampled_costs(probs[0], self.spec.n, self.shots, self.rng))
        self.ledger.record(self.shots)
        return CostEvaluation(value, self.shots, values, exact)

    def gradient(self, params) -> np.ndarray:
        """Parameter-shift gradient; charges ``2 m shots`` to the ledger."""
        if self.shots == 0:
            self.ledger.record_many(2 * self.spec.m, 0)
            return exact_gradient(self.spec, params)
        return sampled_gradient(self.spec, params, self.shots, self.rng, self.ledger)
