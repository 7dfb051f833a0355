"""The (n, optimizer, shots-per-evaluation) sweep: runs, cells, optimal N, scaling fits."""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..optimizers import OPTIMIZERS, cobyla, gradient_descent, nelder_mead, powell
from ..oracle import CompilationOracle, exact_cost
from ..quantum import TWO_PI, AnsatzSpec
from ..stats import ExponentialFit, fit_exponential
from .config import SweepConfig

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
QUALIFYING_FRACTION = 0.5


def derive_seed(global_seed: int, n: int, optimizer: str, N: int, run: int) -> int:
    """64-bit seed from blake2b of ``"global_seed|n|optimizer|N|run"``."""
    key = f"{global_seed}|{n}|{optimizer}|{N}|{run}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


@dataclass
class RunRecord:
    n: int
    p: int
    optimizer: str
    N: int
    run: int
    seed: int
    reached: bool
    N_total: Optional[int]
    final_cost: float
    evals: int


def _dispatch(optimizer: str, oracle, x0, N, threshold, budget, options):
    if optimizer == "nelder_mead":
        return nelder_mead(oracle, x0, N, threshold, budget, **options)
    if optimizer == "powell":
        return powell(oracle, x0, N, threshold, budget, **options)
    if optimizer == "cobyla":
        return cobyla(oracle, x0, N, threshold, budget, **options)
    if optimizer == "gradient_descent":
        return gradient_descent(oracle, x0, N, threshold=threshold, budget=budget, **options)
    raise ValueError(f"unknown optimizer {optimizer!r}")


def run_single(optimizer: str, spec: AnsatzSpec, N: int, seed: int, threshold: float, budget: int,
               run: int = 0, options: Optional[dict] = None) -> RunRecord:
    """One optimization from a uniform random start derived from ``seed``.

    The start point and the shot-sampling stream come from independent
    children of ``SeedSequence(seed)``.  For gradient descent ``N`` is the
    shot count per shifted cost term.
    """
    init_ss, oracle_ss = np.random.SeedSequence(seed).spawn(2)
    x0 = np.random.default_rng(init_ss).uniform(0.0, TWO_PI, spec.m)
    oracle = CompilationOracle(spec, N, seed=oracle_ss)
    trace = _dispatch(optimizer, oracle, x0, N, threshold, budget, options or {})
    best = trace.best
    final = best.exact if best is not None else exact_cost(spec, x0)
    return RunRecord(spec.n, spec.p, optimizer, N, run, int(seed), trace.threshold_shots is not None,
                     trace.threshold_shots, float(final), trace.evaluations)


def lower_median(values) -> Optional[int]:
    """Order statistic ``sorted(values)[(k - 1) // 2]``; ``None`` when empty."""
    vals = sorted(values)
    return vals[(len(vals) - 1) // 2] if vals else None


@dataclass
class CellSummary:
    n: int
    optimizer: str
    N: int
    records: list = field(default_factory=list)

    @property
    def successes(self) -> list:
        return [r.N_total for r in self.records if r.reached]

    @property
    def success_fraction(self) -> float:
        return len(self.successes) / len(self.records) if self.records else 0.0

    @property
    def median(self) -> Optional[int]:
        return lower_median(self.successes)


@dataclass
class OptimalN:
    N: Optional[int]
    median: Optional[int]
    diagnostic: str = ""

    def __iter__(self):
        return iter((self.N, self.median))


def _run_task(task):
    optimizer, n, p, N, run, seed, threshold, budget, options = task
    spec = AnsatzSpec(n, p)
    try:
        return run_single(optimizer, spec, N, seed, threshold, budget, run, options)
    except (ArithmeticError, np.linalg.LinAlgError):
        # recorded as an unsuccessful run so the rest of the sweep completes
        log.exception("%s n=%d N=%d run=%d failed", optimizer, n, N, run)
        init_ss, _ = np.random.SeedSequence(seed).spawn(2)
        x0 = np.random.default_rng(init_ss).uniform(0.0, TWO_PI, spec.m)
        return RunRecord(n, p, optimizer, N, run, int(seed), False, None, exact_cost(spec, x0), 0)


def _cell_tasks(optimizer: str, n: int, N: int, config: SweepConfig) -> list:
    p = config.depth(n)
    opts = config.optimizer_options.get(optimizer, {})
    return [(optimizer, n, p, N, run, derive_seed(config.global_seed, n, optimizer, N, run),
             config.cost_threshold, config.budget, opts) for run in range(config.runs_per_cell)]


def run_cell(optimizer: str, n: int, N: int, config: SweepConfig) -> CellSummary:
    return CellSummary(n, optimizer, N, [_run_task(t) for t in _cell_tasks(optimizer, n, N, config)])


def select_optimal_N(cells: list) -> OptimalN:
    """Shot count with the smallest median among cells where at least half the runs succeed."""
    if not cells:
        raise ValueError("need at least one cell")
    qualifying = [c for c in cells if c.success_fraction >= QUALIFYING_FRACTION and c.median is not None]
    if not qualifying:
        best = max(cells, key=lambda c: c.success_fraction)
        return OptimalN(None, None, f"no N reached the threshold in >= {QUALIFYING_FRACTION:.0%} of runs "
                                    f"(best: N={best.N} at {best.success_fraction:.0%})")
    best = min(qualifying, key=lambda c: (c.median, c.N))
    return OptimalN(best.N, best.median)


@dataclass
class SweepResult:
    config: SweepConfig
    cells: list = field(default_factory=list)
    optimal: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)

    def cell(self, optimizer: str, n: int, N: int) -> CellSummary:
        for c in self.cells:
            if (c.optimizer, c.n, c.N) == (optimizer, n, N):
                return c
        raise KeyError((optimizer, n, N))

    def records(self) -> list:
        return [r for c in self.cells for r in c.records]

    def scaling(self, optimizer: str) -> list:
        """``(n, median N_total at N*)`` for every n where N* exists."""
        return [(n, sel.median) for (opt, n), sel in sorted(self.optimal.items(), key=_opt_key)
                if opt == optimizer and sel.N is not None]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "cells": [{"n": c.n, "optimizer": c.optimizer, "N": c.N,
                       "success_fraction": c.success_fraction, "median_N_total": c.median,
                       "records": [asdict(r) for r in c.records]} for c in self.cells],
            "optimal": [{"optimizer": opt, "n": n, "N_star": sel.N, "median_N_total": sel.median,
                         "diagnostic": sel.diagnostic}
                        for (opt, n), sel in sorted(self.optimal.items(), key=_opt_key)],
            "fits": {opt: (fit.to_dict() if fit is not None else None) for opt, fit in sorted(self.fits.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepResult":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}")
        config = SweepConfig.from_dict(data["config"])
        cells = [CellSummary(c["n"], c["optimizer"], c["N"], [RunRecord(**r) for r in c["records"]])
                 for c in data["cells"]]
        optimal = {(o["optimizer"], o["n"]): OptimalN(o["N_star"], o["median_N_total"], o["diagnostic"])
                   for o in data["optimal"]}
        fits = {opt: (ExponentialFit(f["log_slope"], f["intercept"], f["r_squared"]) if f else None)
                for opt, f in data["fits"].items()}
        return cls(config, cells, optimal, fits)


def _opt_key(item):
    (opt, n), _ = item
    return (OPTIMIZERS.index(opt) if opt in OPTIMIZERS else len(OPTIMIZERS), opt, n)


def _cell_key(cell: CellSummary):
    return (OPTIMIZERS.index(cell.optimizer), cell.n, cell.N)


def summarize(config: SweepConfig, records: list) -> SweepResult:
    """Group run records into cells, pick N* per (optimizer, n) and fit the scaling."""
    cells: dict = {}
    for r in records:
        cells.setdefault((r.optimizer, r.n, r.N), CellSummary(r.n, r.optimizer, r.N)).records.append(r)
    ordered = sorted(cells.values(), key=_cell_key)
    for c in ordered:
        c.records.sort(key=lambda r: r.run)

    result = SweepResult(config, ordered)
    for opt in config.optimizers:
        for n in config.n_list:
            group = [c for c in ordered if c.optimizer == opt and c.n == n]
            if group:
                sel = select_optimal_N(group)
                if sel.N is None:
                    log.warning("%s, n=%d: %s", opt, n, sel.diagnostic)
                result.optimal[(opt, n)] = sel
        points = result.scaling(opt)
        if len(points) >= 3:
            xs, ys = zip(*points)
            result.fits[opt] = fit_exponential(xs, ys)
        else:
            result.fits[opt] = None
    return result


def full_sweep(config: SweepConfig, jobs: int = 1, out_dir=None) -> SweepResult:
    """Execute every (optimizer, n, N, run) of ``config``; output does not depend on ``jobs``."""
    if not config.optimizers:
        log.warning("sweep has no optimizers; nothing to run")
    tasks = [t for opt in config.optimizers for n in config.n_list for N in config.shot_grid
             for t in _cell_tasks(opt, n, N, config)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        records = [_run_task(t) for t in tasks]
    result = summarize(config, records)
    if out_dir is not None:
        from .output import emit_outputs
        emit_outputs(result, out_dir)
    return result
