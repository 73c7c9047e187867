"""Kernel families, truncation, and bandwidth schedules."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import chi2

from frmc.errors import ValidationError
from frmc.kernels import (
    EPANECHNIKOV,
    GAUSSIAN,
    KernelSpec,
    bandwidth,
    kernel_value,
    register_family,
    truncated,
    truncation_radius,
)

# exact radius for the Gaussian threshold 1e-3 in d=2 (derive_golden.py)
GAUSS_R_D2 = 3.1842984196123303


class TestKernelValues:
    def test_gaussian_origin_d2(self):
        k = KernelSpec(GAUSSIAN, 2, np.inf)
        assert kernel_value(k, [0.0, 0.0]) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)

    def test_truncated_gaussian_zero_outside(self):
        k = truncated(GAUSSIAN, 2, 1e-3)
        assert kernel_value(k, [k.radius + 0.01, 0.0]) == 0.0
        assert kernel_value(k, [k.radius - 0.01, 0.0]) > 0.0

    def test_epanechnikov_support_and_peak(self):
        k = KernelSpec(EPANECHNIKOV, 2, math.sqrt(2.0))
        assert kernel_value(k, [0.0, 0.0]) == pytest.approx(0.75**2)
        assert kernel_value(k, [1.01, 0.0]) == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        for family in (GAUSSIAN, EPANECHNIKOV):
            k = truncated(family, 3, 1e-3) if family == GAUSSIAN else KernelSpec(family, 3, math.sqrt(3))
            u = rng.normal(size=(200, 3))
            assert np.array_equal(kernel_value(k, u), kernel_value(k, -u))

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            kernel_value(KernelSpec(GAUSSIAN, 2, np.inf), [1.0, 2.0, 3.0])

    def test_integrates_to_one(self):
        # 1-d by adaptive quadrature, both families
        k1 = KernelSpec(GAUSSIAN, 1, np.inf)
        val, _ = quad(lambda x: float(kernel_value(k1, [x])), -10, 10)
        assert val == pytest.approx(1.0, abs=1e-3)
        e1 = KernelSpec(EPANECHNIKOV, 1, 1.0)
        val, _ = quad(lambda x: float(kernel_value(e1, [x])), -1.5, 1.5)
        assert val == pytest.approx(1.0, abs=1e-3)
        # 2-d truncated Gaussian on a tensor grid
        k2 = truncated(GAUSSIAN, 2, 1e-3)
        xs = np.linspace(-5, 5, 601)
        grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
        vals = kernel_value(k2, grid)
        step = xs[1] - xs[0]
        assert vals.sum() * step * step == pytest.approx(1.0, abs=1e-2)

    def test_first_moment_zero(self):
        k = KernelSpec(EPANECHNIKOV, 1, 1.0)
        val, _ = quad(lambda x: x * float(kernel_value(k, [x])), -1.5, 1.5)
        assert abs(val) < 1e-12


class TestTruncationRadius:
    def test_gaussian_reference_radius(self):
        r = truncation_radius(GAUSSIAN, 2, 1e-3)
        assert r == pytest.approx(GAUSS_R_D2, rel=1e-12)
        k = KernelSpec(GAUSSIAN, 2, np.inf)
        assert kernel_value(k, [r, 0.0]) == pytest.approx(1e-3, rel=1e-10)

    def test_epanechnikov_radius_is_support_edge(self):
        for eta in (1e-6, 1e-3, 0.1):
            assert truncation_radius(EPANECHNIKOV, 4, eta) == 2.0

    def test_radius_shrinks_to_zero_at_peak(self):
        peak = 1.0 / (2.0 * math.pi)
        assert truncation_radius(GAUSSIAN, 2, peak * (1 - 1e-9)) < 1e-3

    def test_threshold_validation(self):
        with pytest.raises(ValidationError):
            truncation_radius(GAUSSIAN, 2, 1.0)
        with pytest.raises(ValidationError):
            truncation_radius(GAUSSIAN, 2, 0.0)

    def test_mass_deficit_bounds(self):
        # outside-ball Gaussian mass is a chi-square tail; it stays below
        # eta * vol(ball) for d <= 4 and below 10 eta in low dimension
        eta = 1e-3
        for d in (1, 2, 3, 4):
            r = truncation_radius(GAUSSIAN, d, eta)
            deficit = chi2.sf(r * r, d)
            ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * r**d
            assert deficit < eta * ball
            if d <= 2:
                assert deficit < 10.0 * eta


class TestBandwidth:
    def test_reference_values(self):
        assert bandwidth(10_000, 2, 1.0, 0.4) == pytest.approx(0.025118864315095794, rel=1e-12)
        assert bandwidth(1, 2, 1.0, 0.4) == 1.0
        assert bandwidth(10_000, 6, 1.0, "auto") == pytest.approx(0.15848931924611134, rel=1e-12)

    def test_auto_low_dimension_uses_04(self):
        assert bandwidth(256, 2) == pytest.approx(256.0**-0.4, rel=1e-14)

    def test_monotone_decreasing_in_n(self):
        for rule in ("auto", 0.3):
            eps = [bandwidth(n, 2, 1.0, rule) for n in (10, 100, 1000, 10_000)]
            assert all(a > b for a, b in zip(eps, eps[1:]))

    def test_alpha_range_validation(self):
        with pytest.raises(ValidationError):
            bandwidth(100, 2, 1.0, 0.2)  # below 1/4
        with pytest.raises(ValidationError):
            bandwidth(100, 2, 1.0, 0.6)  # above 1/d
        with pytest.raises(ValidationError):
            bandwidth(100, 6, 1.0, 0.25)  # explicit alpha needs d <= 4
        with pytest.raises(ValidationError):
            bandwidth(0, 2)
        with pytest.raises(ValidationError):
            bandwidth(100, 2, -1.0)


class TestRegistry:
    def test_register_hook(self):
        register_family("boxcar", lambda u, d: (np.abs(u) <= 0.5).all(axis=-1) * 1.0,
                        lambda d: 1.0, lambda d, eta: 0.5 * math.sqrt(d))
        k = KernelSpec("boxcar", 2, truncation_radius("boxcar", 2, 0.5))
        assert kernel_value(k, [0.0, 0.0]) == 1.0
