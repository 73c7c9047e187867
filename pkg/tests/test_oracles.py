"""Closed-form references; golden constants from scripts/derive_golden.py."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from frmc.errors import ValidationError
from frmc.estimator import EstimatorConfig, constant_one
from frmc.kernels import GAUSSIAN, truncated
from frmc.oracles import (
    OUParams,
    bridge_mean_square_truth,
    brute_force_double_sum,
    ou_numerator_mean,
    ou_numerator_variance,
    transition_density,
)
from frmc.paths import ForwardBatch, ReverseBatch
from frmc.grids import make_grid

# frozen by scripts/derive_golden.py
OU_MEAN_EPS0 = 0.6067379988373829
OU_MEAN_EPS01 = 0.6041729354093784
OU_VAR_GOLDEN = 0.00018085644633970163
BM_DENSITY_0 = 0.3989422804014327


class TestBridgeTruth:
    def test_reference_values(self):
        assert bridge_mean_square_truth(10) == pytest.approx(11.0 / 54.0, rel=1e-15)
        assert bridge_mean_square_truth(2) == 0.5

    def test_limit_and_monotonicity(self):
        assert bridge_mean_square_truth(10**6) - 1.0 / 6.0 < 1e-5
        vals = [bridge_mean_square_truth(l) for l in range(2, 60)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValidationError):
            bridge_mean_square_truth(1)


def params(eps, n=1000, x0=0.0, y=0.0):
    return OUParams(rate=1.0, x0=x0, y=y, horizon=1.0, t_star=0.5,
                    bandwidth=eps, n_traj=n)


class TestOUClosedForms:
    def test_mean_at_zero_bandwidth(self):
        assert ou_numerator_mean(params(0.0)) == pytest.approx(OU_MEAN_EPS0, rel=1e-12)

    def test_mean_at_reference_bandwidth(self):
        assert ou_numerator_mean(params(0.1)) == pytest.approx(OU_MEAN_EPS01, rel=1e-12)

    def test_zero_bandwidth_reduces_to_transition_density(self):
        for x0, y in ((0.0, 0.0), (1.0, 0.3), (-0.5, 1.2)):
            lhs = ou_numerator_mean(params(0.0, x0=x0, y=y))
            rhs = transition_density("ou", 0.0, x0, 1.0, y, rate=1.0)
            assert lhs == rhs

    def test_centered_endpoint_maximizes_exponential(self):
        # y = exp(-rate T) x zeroes the gap so only the prefactor remains
        p = params(0.2, x0=2.0, y=2.0 * math.exp(-1.0))
        var = 0.04 * math.exp(-1.0) + p.sigma2(1.0)
        assert ou_numerator_mean(p) == pytest.approx(1.0 / math.sqrt(2 * math.pi * var), rel=1e-12)

    def test_variance_golden_constant(self):
        assert ou_numerator_variance(params(0.1)) == pytest.approx(OU_VAR_GOLDEN, rel=1e-12)

    def test_variance_gap_independent_of_matching_endpoints(self):
        # exponential factors are all 1 when y = exp(-rate T) x
        centered = ou_numerator_variance(params(0.1, x0=3.0, y=3.0 * math.exp(-1.0)))
        assert centered == pytest.approx(OU_VAR_GOLDEN, rel=1e-12)

    def test_variance_nonnegative_over_sweep(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            t_star = rng.uniform(0.05, 1.0)
            p = OUParams(
                rate=rng.uniform(1e-3, 3.0),
                x0=rng.normal(),
                y=rng.normal(),
                horizon=rng.uniform(t_star + 0.05, 2.0),
                t_star=t_star,
                bandwidth=rng.uniform(1e-3, 1.0),
                n_traj=int(rng.integers(2, 10_000)),
            )
            assert ou_numerator_variance(p) >= 0.0

    def test_validation(self):
        with pytest.raises(ValidationError):
            OUParams(rate=0.0, x0=0.0, y=0.0, horizon=1.0, t_star=0.5, bandwidth=0.1)
        with pytest.raises(ValidationError):
            OUParams(rate=1.0, x0=0.0, y=0.0, horizon=1.0, t_star=1.5, bandwidth=0.1)
        with pytest.raises(ValidationError):
            ou_numerator_variance(params(0.1, n=1))


class TestTransitionDensity:
    def test_bm_reference(self):
        assert transition_density("bm", 0.0, 0.0, 1.0, 0.0) == pytest.approx(
            BM_DENSITY_0, rel=1e-12
        )

    def test_ou_mode_at_decayed_mean(self):
        x = 1.7
        mode = math.exp(-1.0) * x
        at_mode = transition_density("ou", 0.0, x, 1.0, mode)
        for dy in (-0.3, -0.05, 0.05, 0.3):
            assert transition_density("ou", 0.0, x, 1.0, mode + dy) < at_mode

    def test_integrates_to_one(self):
        val, _ = quad(lambda y: transition_density("ou", 0.0, 0.7, 1.0, y), -12, 12)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_time_order_validation(self):
        with pytest.raises(ValidationError):
            transition_density("bm", 1.0, 0.0, 0.5, 0.0)
        with pytest.raises(ValidationError):
            transition_density("gbm", 0.0, 0.0, 1.0, 0.0)


class TestBruteForce:
    def test_single_pair_ratio_is_functional_value(self):
        grid = make_grid([0.0, 0.5], [0.5, 1.0])
        fwd = ForwardBatch(grid=grid, states=np.full((1, 1, 1), 0.7), x0=np.zeros(1), seed=0)
        rev = ReverseBatch(
            grid=grid,
            states=np.full((1, 1, 1), 0.7),
            log_weight=np.zeros(1),
            starts=np.zeros((1, 1)),
            start_density=None,
            seed=0,
        )
        cfg = EstimatorConfig(bandwidth=0.5, kernel=truncated(GAUSSIAN, 1, 1e-3))
        from frmc.estimator import PathFunctional

        g = PathFunctional(fn=lambda s: 3.25, vectorized=False)
        res = brute_force_double_sum(fwd, rev, g, cfg)
        assert res.ratio == pytest.approx(3.25, rel=1e-14)
        assert res.pairs == 1

    def test_constant_functional_unity(self):
        rng = np.random.default_rng(1)
        grid = make_grid([0.0, 0.5], [0.5, 1.0])
        fwd = ForwardBatch(grid=grid, states=rng.normal(size=(40, 1, 2)), x0=np.zeros(2), seed=0)
        rev = ReverseBatch(
            grid=grid, states=rng.normal(size=(40, 1, 2)), log_weight=np.zeros(40),
            starts=np.zeros((40, 2)), start_density=None, seed=0,
        )
        cfg = EstimatorConfig(bandwidth=0.8, kernel=truncated(GAUSSIAN, 2, 1e-3))
        assert brute_force_double_sum(fwd, rev, constant_one(), cfg).ratio == 1.0

    def test_pair_budget_guard(self):
        rng = np.random.default_rng(2)
        grid = make_grid([0.0, 0.5], [0.5, 1.0])
        fwd = ForwardBatch(grid=grid, states=rng.normal(size=(1001, 1, 1)), x0=np.zeros(1), seed=0)
        rev = ReverseBatch(
            grid=grid, states=rng.normal(size=(1001, 1, 1)), log_weight=np.zeros(1001),
            starts=np.zeros((1001, 1)), start_density=None, seed=0,
        )
        cfg = EstimatorConfig(bandwidth=0.5, kernel=truncated(GAUSSIAN, 1, 1e-3))
        with pytest.raises(ValidationError):
            brute_force_double_sum(fwd, rev, constant_one(), cfg)
