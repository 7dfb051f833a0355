import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plateaulab.oracle import state_cost
from plateaulab.quantum import RX, AnsatzSpec, apply_gate, zero_state
from plateaulab.stats import (
    DeltaCConfig,
    chebyshev_bound,
    delta_c_samples,
    estimate_delta_c,
    estimate_gradient_variance,
    estimate_max_gradient_variance,
    fit_exponential,
    g_bound,
    line_integral_check,
    mean_torus_distance,
    moments,
    relative_component,
    tail_check,
)


class TestMoments:
    def test_known_values(self):
        est = moments([1.0, 2.0, 3.0, 4.0])
        assert est.mean == 2.5
        assert est.variance == pytest.approx(5 / 3)
        assert est.stderr_mean == pytest.approx(math.sqrt(5 / 12))

    def test_variance_stderr_gaussian(self, rng):
        x = rng.standard_normal(20000)
        est = moments(x)
        # for a normal sample Var(s^2) ~ 2 sigma^4 / k
        assert est.stderr_variance == pytest.approx(math.sqrt(2 / 20000), rel=0.05)

    def test_bootstrap_agrees(self, rng):
        x = rng.standard_normal(2000)
        a, b = moments(x), moments(x, bootstrap=400, seed=1)
        assert b.stderr_variance == pytest.approx(a.stderr_variance, rel=0.25)

    def test_too_few(self):
        with pytest.raises(ValueError):
            moments([1.0])

    def test_one_qubit_closed_form(self):
        # C(theta) = (1 - cos theta)/2 for RX(theta)|0>, so dC = sin(theta)/2 has variance 1/8
        thetas = np.random.default_rng(0).uniform(0, 2 * math.pi, 10 ** 5)

        def cost(t):
            return state_cost(apply_gate(zero_state(1), RX(0, t)))

        assert cost(1.1) == pytest.approx((1 - math.cos(1.1)) / 2, abs=1e-12)
        grads = np.array([0.5 * (cost(t + math.pi / 2) - cost(t - math.pi / 2)) for t in thetas])
        np.testing.assert_allclose(grads, np.sin(thetas) / 2, atol=1e-12)
        assert round(moments(grads).variance, 3) == 0.125


class TestGradientVariance:
    def test_mean_zero(self):
        spec = AnsatzSpec(4, 4)
        for mu in (0, 17, 40):
            est = estimate_gradient_variance(spec, mu, 500, seed=mu)
            assert abs(est.mean) <= 4 * est.stderr_mean

    def test_decreases_with_n(self):
        e4 = estimate_gradient_variance(AnsatzSpec(4, 4), 0, 800, seed=1)
        e6 = estimate_gradient_variance(AnsatzSpec(6, 6), 0, 800, seed=2)
        assert e4.variance - e6.variance >= 4 * math.hypot(e4.stderr_variance, e6.stderr_variance)

    def test_min_samples(self):
        with pytest.raises(ValueError):
            estimate_gradient_variance(AnsatzSpec(2, 1), 0, 29, seed=0)

    def test_component_range(self):
        with pytest.raises(ValueError):
            estimate_gradient_variance(AnsatzSpec(2, 1), 6, 100, seed=0)

    def test_deterministic(self):
        spec = AnsatzSpec(3, 3)
        assert estimate_gradient_variance(spec, 5, 100, 9) == estimate_gradient_variance(spec, 5, 100, 9)

    def test_relative_component(self):
        assert relative_component(AnsatzSpec(4, 4), 0.5) == 24
        assert relative_component(AnsatzSpec(4, 4), 1.0) == 47

    def test_max_variance_subset(self):
        f = estimate_max_gradient_variance(AnsatzSpec(3, 3), 100, seed=0, max_components=5)
        assert len(f.components) == 5 and f.value == max(f.variances)
        small = estimate_max_gradient_variance(AnsatzSpec(2, 1), 100, seed=0)
        assert small.components == list(range(6))


class TestBounds:
    def test_chebyshev_examples(self):
        assert chebyshev_bound(0.01, 0.1) == pytest.approx(1.0)
        assert chebyshev_bound(0.01, 1.0) == pytest.approx(0.01)

    def test_chebyshev_bad_c(self):
        with pytest.raises(ValueError):
            chebyshev_bound(0.1, 0.0)

    def test_g_bound_examples(self):
        assert g_bound(2, 1, 0.25) == 1.0
        assert g_bound(7, 0, 3.0) == 0.0
        m = 48
        assert g_bound(m, math.pi * math.sqrt(m), 1e-4) == pytest.approx(109.1, abs=0.05)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), sig=st.sampled_from([1.5, 2.0, 3.0]))
    def test_tail_check_on_gaussian(self, seed, sig):
        x = np.random.default_rng(seed).standard_normal(1000)
        assert tail_check(x, sig * x.std(ddof=1)).ok


class TestTorus:
    def test_circle_mean(self):
        assert mean_torus_distance(1, 10 ** 5, 0) == pytest.approx(math.pi / 2, rel=0.02)

    def test_upper_bound(self):
        for m in (1, 4, 12):
            assert mean_torus_distance(m, 1000, m) <= math.sqrt(m) * math.pi
        assert math.sqrt(4) * math.pi == pytest.approx(2 * math.pi)

    def test_min_samples(self):
        with pytest.raises(ValueError):
            mean_torus_distance(2, 99, 0)


class TestDeltaC:
    def test_zero_length(self):
        deltas, d = delta_c_samples(AnsatzSpec(2, 2), DeltaCConfig("translated", 0.0, samples=50))
        assert d == 0 and not np.any(deltas)

    def test_L_too_large(self):
        spec = AnsatzSpec(2, 1)
        with pytest.raises(ValueError):
            delta_c_samples(spec, DeltaCConfig("translated", math.sqrt(spec.m) * math.pi + 1e-6, samples=10))

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            delta_c_samples(AnsatzSpec(2, 1), DeltaCConfig("translated", 0.5, direction=np.ones(6), samples=10))

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            DeltaCConfig("sideways")

    def test_translated_mean_zero_and_bound(self):
        spec = AnsatzSpec(4, 4)
        est, rep = estimate_delta_c(spec, DeltaCConfig("translated", 1.0, samples=1000, seed=3,
                                                       gradient_samples=200))
        assert abs(est.mean) <= 4 * est.stderr_mean
        assert rep.within_bound
        assert all(t.ok for t in rep.tails)

    def test_fixed_direction(self):
        spec = AnsatzSpec(2, 1)
        e = np.zeros(spec.m)
        e[0] = 1.0
        deltas, d = delta_c_samples(spec, DeltaCConfig("translated", 0.3, direction=e, samples=20))
        assert d == 0.3 and deltas.shape == (20,)

    def test_independent_records_distance(self):
        spec = AnsatzSpec(2, 2)
        est, rep = estimate_delta_c(spec, DeltaCConfig("independent", samples=500, seed=1, gradient_samples=100))
        assert 0 < rep.distance <= math.sqrt(spec.m) * math.pi
        assert rep.g_bound == pytest.approx(spec.m ** 2 * rep.distance ** 2 * rep.f_hat)

    def test_deterministic(self):
        spec = AnsatzSpec(3, 2)
        cfg = DeltaCConfig("translated", 0.5, samples=100, seed=4)
        np.testing.assert_array_equal(delta_c_samples(spec, cfg)[0], delta_c_samples(spec, cfg)[0])


class TestLineIntegral:
    def test_same_point(self, rng):
        spec = AnsatzSpec(3, 2)
        a = rng.uniform(0, 2 * math.pi, spec.m)
        assert line_integral_check(spec, a, a, 33) == 0.0

    def test_refinement(self, rng):
        spec = AnsatzSpec(3, 2)
        for _ in range(5):
            a, b = rng.uniform(0, 2 * math.pi, (2, spec.m))
            assert line_integral_check(spec, a, b, 257) <= line_integral_check(spec, a, b, 33)

    def test_bad_K(self):
        with pytest.raises(ValueError):
            line_integral_check(AnsatzSpec(2, 1), np.zeros(6), np.ones(6), 1)


class TestFit:
    def test_exact_exponential(self):
        x = np.arange(4, 9)
        fit = fit_exponential(x, 2.0 ** -x)
        assert fit.log_slope == pytest.approx(-math.log(2))
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.fitted_base == pytest.approx(2.0)

    def test_constant(self):
        fit = fit_exponential([1, 2, 3], [5.0, 5.0, 5.0])
        assert fit.log_slope == 0.0 and fit.growth_factor == 1.0

    def test_noisy_exponential(self, rng):
        x = np.arange(4, 9)
        for _ in range(20):
            y = 2.0 ** -x * (1 + rng.uniform(-0.05, 0.05, x.shape))
            fit = fit_exponential(x, y)
            assert 1.8 <= fit.fitted_base <= 2.2 and fit.r_squared >= 0.95

    @pytest.mark.parametrize("y", [[1.0, 0.0, 2.0], [1.0, -1.0, 2.0]])
    def test_non_positive(self, y):
        with pytest.raises(ValueError):
            fit_exponential([1, 2, 3], y)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_exponential([1, 2], [1.0, 2.0])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(1e-6, 1e6), min_size=3, max_size=8))
    def test_r_squared_in_unit_interval(self, ys):
        fit = fit_exponential(np.arange(len(ys)), ys)
        assert 0.0 <= fit.r_squared <= 1.0
