"""Monte Carlo checks of barren-plateau gradient and cost-difference suppression.

All expectations are over the uniform measure on ``[0, 2pi)^m``.  Every
estimator takes an explicit seed and is a deterministic function of it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .oracle import exact_cost, exact_gradient
from .quantum import TWO_PI, AnsatzSpec, batch_costs, torus_displacement

MIN_GRADIENT_SAMPLES = 30
MAX_F_COMPONENTS = 12


@dataclass
class MomentEstimate:
    mean: float
    variance: float
    stderr_mean: float
    stderr_variance: float
    samples: int

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def relative_stderr_variance(self) -> float:
        return self.stderr_variance / self.variance if self.variance > 0 else 0.0


def moments(values, bootstrap: int = 0, seed=None) -> MomentEstimate:
    """Sample mean and unbiased variance with their standard errors.

    The variance stderr uses the asymptotic fourth-moment formula
    ``Var(s^2) ~ (mu4 - (k-3)/(k-1) s^4) / k``; pass ``bootstrap=B`` to use
    ``B`` bootstrap resamples instead (useful for small samples).
    """
    x = np.asarray(values, dtype=float)
    k = x.shape[0]
    if k < 2:
        raise ValueError("need at least two samples")
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    if bootstrap:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, k, size=(bootstrap, k))
        se_var = float(np.std(np.var(x[idx], axis=1, ddof=1), ddof=1))
    else:
        mu4 = float(np.mean((x - mean) ** 4))
        se_var = math.sqrt(max(mu4 - (k - 3) / (k - 1) * var * var, 0.0) / k)
    return MomentEstimate(mean, var, math.sqrt(var / k), se_var, k)


def _uniform_params(rng: np.random.Generator, samples: int, m: int) -> np.ndarray:
    return rng.uniform(0.0, TWO_PI, size=(samples, m))


def gradient_component_samples(spec: AnsatzSpec, component: int, samples: int, seed) -> np.ndarray:
    """Exact parameter-shift derivatives along ``component`` at uniform random points."""
    if not 0 <= component < spec.m:
        raise ValueError(f"component {component} out of range for m={spec.m}")
    rng = np.random.default_rng(seed)
    theta = _uniform_params(rng, samples, spec.m)
    plus, minus = theta.copy(), theta.copy()
    plus[:, component] += math.pi / 2
    minus[:, component] -= math.pi / 2
    return 0.5 * (batch_costs(spec, plus) - batch_costs(spec, minus))


def estimate_gradient_variance(spec: AnsatzSpec, component: int, samples: int, seed,
                               bootstrap: int = 0) -> MomentEstimate:
    if samples < MIN_GRADIENT_SAMPLES:
        raise ValueError(f"need at least {MIN_GRADIENT_SAMPLES} samples, got {samples}")
    return moments(gradient_component_samples(spec, component, samples, seed), bootstrap, seed)


def relative_component(spec: AnsatzSpec, fraction: float = 0.0) -> int:
    """Parameter index at a fixed relative position of the parameter vector."""
    return min(int(fraction * spec.m), spec.m - 1)


@dataclass
class MaxVarianceEstimate:
    """Largest sampled component variance, standing in for the plateau bound F(n)."""

    value: float
    stderr: float
    component: int
    components: list[int]
    variances: list[float]


def estimate_max_gradient_variance(spec: AnsatzSpec, samples: int, seed,
                                   max_components: int = MAX_F_COMPONENTS) -> MaxVarianceEstimate:
    """Max of the component variances over a random subset of ``max_components`` indices."""
    ss = np.random.SeedSequence(seed)
    pick_seed, *sample_seeds = ss.spawn(1 + spec.m)
    if spec.m <= max_components:
        comps = list(range(spec.m))
    else:
        comps = sorted(np.random.default_rng(pick_seed).choice(spec.m, max_components, replace=False).tolist())
    ests = [estimate_gradient_variance(spec, c, samples, sample_seeds[c]) for c in comps]
    best = int(np.argmax([e.variance for e in ests]))
    return MaxVarianceEstimate(ests[best].variance, ests[best].stderr_variance, comps[best],
                               comps, [e.variance for e in ests])


@dataclass
class DeltaCConfig:
    mode: str = "translated"
    L: float = 1.0
    direction: object = "random"
    samples: int = 1000
    seed: int = 0
    gradient_samples: int = 500

    def __post_init__(self):
        if self.mode not in ("translated", "independent"):
            raise ValueError(f"mode must be 'translated' or 'independent', got {self.mode!r}")
        if self.samples < 2:
            raise ValueError("need at least two samples")


@dataclass
class TailCheck:
    c: float
    frequency: float
    bound: float
    stderr: float

    @property
    def ok(self) -> bool:
        return self.frequency <= self.bound + 4.0 * self.stderr


@dataclass
class BoundReport:
    """Empirical ``Var[dC]`` against ``m^2 L^2 F``, with ``L`` the shift or the mean distance."""

    mode: str
    m: int
    distance: float
    f_hat: float
    f_hat_stderr: float
    f_component: int
    g_bound: float
    variance: float
    relative_stderr: float
    tails: list[TailCheck] = field(default_factory=list)
    deltas: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def slack_limit(self) -> float:
        return self.g_bound * (1.0 + 5.0 * self.relative_stderr)

    @property
    def within_bound(self) -> bool:
        return self.variance <= self.slack_limit


def chebyshev_bound(variance: float, c: float) -> float:
    """``min(1, variance / c^2)``: bound on P(|X - E X| >= c)."""
    if c <= 0:
        raise ValueError("c must be positive")
    if variance < 0:
        raise ValueError("variance must be non-negative")
    return min(1.0, variance / (c * c))


def tail_check(values, c: float, variance: Optional[float] = None) -> TailCheck:
    """Empirical P(|X - mean| >= c) next to its Chebyshev bound and binomial stderr."""
    x = np.asarray(values, dtype=float)
    var = float(np.var(x, ddof=1)) if variance is None else variance
    freq = float(np.mean(np.abs(x - x.mean()) >= c))
    bound = chebyshev_bound(var, c)
    # binomial stderr at the bound is the conservative choice when freq is 0
    p = max(freq, min(bound, 1.0))
    return TailCheck(c, freq, bound, math.sqrt(p * (1.0 - p) / x.shape[0]))


def g_bound(m: float, L: float, F: float) -> float:
    """``m^2 L^2 F``."""
    if m < 0 or L < 0 or F < 0:
        raise ValueError("inputs must be non-negative")
    return m * m * L * L * F


def torus_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(np.mod(b - a, TWO_PI))
    d = np.minimum(d, TWO_PI - d)
    return np.sqrt(np.sum(d * d, axis=-1))


def mean_torus_distance(m: int, samples: int, seed) -> float:
    """Monte Carlo mean geodesic distance between independent uniform points on the m-torus."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    a = _uniform_params(rng, samples, m)
    b = _uniform_params(rng, samples, m)
    return float(np.mean(torus_distances(a, b)))


def random_direction(m: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(m)
    return v / np.linalg.norm(v)


def delta_c_samples(spec: AnsatzSpec, config: DeltaCConfig) -> tuple[np.ndarray, float]:
    """Cost differences ``C(B) - C(A)`` and the distance used for the bound.

    In translated mode ``B = A + L * direction`` and the distance is ``L``; in
    independent mode ``A`` and ``B`` are both uniform and the distance is the
    empirical mean torus distance between them.
    """
    m = spec.m
    rng = np.random.default_rng(config.seed)
    theta_a = _uniform_params(rng, config.samples, m)
    if config.mode == "translated":
        if config.L < 0 or config.L > math.sqrt(m) * math.pi:
            raise ValueError(f"L must lie in [0, sqrt(m) pi] = [0, {math.sqrt(m) * math.pi:.4g}]")
        if isinstance(config.direction, str):
            if config.direction != "random":
                raise ValueError(f"unknown direction {config.direction!r}")
            direction = random_direction(m, rng)
        else:
            direction = np.asarray(config.direction, dtype=float)
            if direction.shape != (m,) or abs(np.linalg.norm(direction) - 1.0) > 1e-12:
                raise ValueError("direction must be a unit vector of length m")
        if config.L == 0:
            return np.zeros(config.samples), 0.0
        theta_b = np.mod(theta_a + config.L * direction, TWO_PI)
        distance = float(config.L)
    else:
        theta_b = _uniform_params(rng, config.samples, m)
        distance = float(np.mean(torus_distances(theta_a, theta_b)))
    deltas = batch_costs(spec, theta_b) - batch_costs(spec, theta_a)
    return deltas, distance


def estimate_delta_c(spec: AnsatzSpec, config: DeltaCConfig,
                     f_hat: Optional[MaxVarianceEstimate] = None,
                     tail_sigmas: Sequence[float] = (2.0, 3.0)) -> tuple[MomentEstimate, BoundReport]:
    """Moments of the cost difference and the comparison against ``m^2 L^2 F_hat``.

    ``f_hat`` can be supplied to reuse one gradient-variance estimate across
    several configurations; otherwise it is sampled with ``config.gradient_samples``.
    """
    deltas, distance = delta_c_samples(spec, config)
    est = moments(deltas)
    if f_hat is None:
        f_hat = estimate_max_gradient_variance(spec, config.gradient_samples, config.seed + 1)
    rel_f = f_hat.stderr / f_hat.value if f_hat.value > 0 else 0.0
    rel = math.hypot(est.relative_stderr_variance, rel_f)
    tails = [tail_check(deltas, s * est.std, est.variance) for s in tail_sigmas] if est.variance > 0 else []
    report = BoundReport(config.mode, spec.m, distance, f_hat.value, f_hat.stderr, f_hat.component,
                         g_bound(spec.m, distance, f_hat.value), est.variance, rel, tails, deltas)
    return est, report


def line_integral_check(spec: AnsatzSpec, theta_a, theta_b, K: int) -> float:
    """``|dC - integral of grad C . dtheta|`` along the shortest torus segment from A to B.

    The integral uses composite Simpson quadrature on ``K`` equally spaced
    points with exact parameter-shift gradients.
    """
    if K < 2:
        raise ValueError("need at least two quadrature points")
    a = np.asarray(theta_a, dtype=float)
    disp = torus_displacement(a, np.asarray(theta_b, dtype=float))
    delta = exact_cost(spec, a + disp) - exact_cost(spec, a)
    if not np.any(disp):
        return abs(delta)
    ts = np.linspace(0.0, 1.0, K)
    integrand = np.array([exact_gradient(spec, a + t * disp) @ disp for t in ts])
    return abs(delta - float(simpson(integrand, x=ts)))


@dataclass
class ExponentialFit:
    log_slope: float
    intercept: float
    r_squared: float

    @property
    def fitted_base(self) -> float:
        """Per-qubit decay base ``b`` with ``y ~ b^-n``."""
        return math.exp(-self.log_slope)

    @property
    def growth_factor(self) -> float:
        return math.exp(self.log_slope)

    def predict(self, x) -> np.ndarray:
        return np.exp(self.intercept + self.log_slope * np.asarray(x, dtype=float))

    def to_dict(self) -> dict:
        return {**asdict(self), "fitted_base": self.fitted_base, "growth_factor": self.growth_factor}


def fit_exponential(x, y) -> ExponentialFit:
    """Least squares line through ``(x, ln y)``."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("x and y must be 1-d and the same length")
    if xs.shape[0] < 3:
        raise ValueError("need at least three points")
    if np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise ValueError("y must be positive and finite")
    ly = np.log(ys)
    slope, intercept = np.polyfit(xs, ly, 1)
    resid = ly - (intercept + slope * xs)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, 1.0 - ss_res / ss_tot)
    if abs(slope) < 1e-15:
        slope = 0.0
    return ExponentialFit(float(slope), float(intercept), float(min(r2, 1.0)))


def variance_record(spec: AnsatzSpec, label, est: MomentEstimate, seed, **bounds) -> dict:
    """Flat record for CSV/JSON emission."""
    rec = {"n": spec.n, "p": spec.p, "m": spec.m, "target": label, "mean": est.mean,
           "variance": est.variance, "stderr_mean": est.stderr_mean,
           "stderr_variance": est.stderr_variance, "samples": est.samples, "seed": seed}
    rec.update(bounds)
    return rec
