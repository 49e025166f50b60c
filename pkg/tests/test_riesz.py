import math

import numpy as np
import pytest

from dirlab.errors import ConfigurationError, DegenerateDataError, DomainError
from dirlab.riesz import (
    g_growth_exponent,
    kernel_samples,
    mellin_pair_gap,
    riesz_kernel,
    riesz_sum,
)
from dirlab.series import custom_series, eta_series, polynomial_series

from oracles import weighted_riesz_sum


class TestKernel:
    def test_unit_weights_noninteger_cutoff(self):
        # alpha = 1/2 makes every weight 1; x = 3.5 keeps all three whole
        s = riesz_kernel(eta_series(), 0.5, 3.5)
        assert s.value == pytest.approx(1.0, abs=1e-14)

    def test_half_weight_at_integer(self):
        s = riesz_kernel(eta_series(), 0.5, 2.0)
        assert s.value == pytest.approx(0.5, abs=1e-14)

    def test_single_log_term(self):
        s = riesz_kernel(polynomial_series([1.0]), 1.5, math.e)
        assert s.value == pytest.approx(1.0, abs=1e-12)

    def test_empty_below_one(self):
        assert riesz_kernel(eta_series(), 0.5, 0.25).value == 0.0

    def test_half_weight_is_mean_of_limits(self):
        eps = 1e-9
        left = riesz_kernel(eta_series(), 0.5, 5.0 - eps).value
        right = riesz_kernel(eta_series(), 0.5, 5.0 + eps).value
        middle = riesz_kernel(eta_series(), 0.5, 5.0).value
        assert middle == pytest.approx((left + right) / 2.0, abs=1e-12)

    def test_continuity_above_half(self):
        # jump across the integer shrinks like eps^(alpha-1/2)
        jumps = []
        for eps in (1e-6, 1e-9):
            a = riesz_kernel(eta_series(), 1.2, 4.0 - eps).value
            b = riesz_kernel(eta_series(), 1.2, 4.0 + eps).value
            jumps.append(abs(a - b))
        assert jumps[1] < jumps[0] < 1e-3
        assert jumps[1] < 1e-5
        # and plain smoothness away from integers
        a = riesz_kernel(eta_series(), 1.2, 4.7 - 1e-9).value
        b = riesz_kernel(eta_series(), 1.2, 4.7 + 1e-9).value
        assert abs(a - b) < 1e-8

    def test_small_alpha_stays_finite(self):
        v = riesz_kernel(eta_series(), 0.25, 6.0).value
        assert np.isfinite(v.real) and np.isfinite(v.imag)

    def test_alpha_validation(self):
        with pytest.raises(DomainError):
            riesz_kernel(eta_series(), 0.0, 2.0)

    def test_grid_matches_single_points(self):
        xs = [1.5, 2.0, 7.25, 30.0]
        grid = kernel_samples(eta_series(), 0.8, xs)
        for sample, x in zip(grid, xs):
            assert sample.value == pytest.approx(
                riesz_kernel(eta_series(), 0.8, x).value, abs=1e-13)

    def test_power_coefficients_used(self):
        # k=2 on eta starts 1, -2, 2: unit-weight sums walk 1, -1, 1
        grid = kernel_samples(eta_series(), 0.5, [1.5, 2.5, 3.5], k=2)
        assert [pytest.approx(s.value.real, abs=1e-13) for s in grid] == [1, -1, 1]


class TestRieszSum:
    def test_smoothed_eta_at_one(self):
        # frozen from the direct mpmath weighted sum (tests/oracles.py):
        # log 2 plus the 1/log x correction, NOT bare log 2
        got = riesz_sum(eta_series(), 1.5, 1.0, 10 ** 4)
        assert got.real == pytest.approx(0.7105047265121943, abs=1e-9)
        assert abs(got.imag) < 1e-12

    def test_unit_weight_eta_at_two(self):
        got = riesz_sum(eta_series(), 0.5, 2.0, 10 ** 3)
        assert got.real == pytest.approx(0.8224665339241127, abs=1e-12)
        assert got.real == pytest.approx(math.pi ** 2 / 12, abs=1e-3)

    def test_finite_cancellation(self):
        got = riesz_sum(polynomial_series([1.0, -1.0]), 0.5, 0.0, 10.0)
        assert got == pytest.approx(0.0, abs=1e-14)

    def test_matches_oracle_weights(self):
        coeff = [(-1) ** (n - 1) for n in range(1, 201)]
        want = weighted_riesz_sum(coeff, 0.9, 1.2 + 0.7j, 200.0)
        got = riesz_sum(eta_series(), 0.9, 1.2 + 0.7j, 200.0)
        assert got == pytest.approx(want, abs=1e-12)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            riesz_sum(eta_series(), 0.4, 1.0, 100.0)
        with pytest.raises(DomainError):
            riesz_sum(eta_series(), 0.5, 1.0, 1.0)


class TestMellinPair:
    def test_unit_polynomial_staircase(self):
        gap = mellin_pair_gap(polynomial_series([1.0]), 0.5, 1.0, 10 ** 3)
        # G == 1 beyond x=1, integral = 1 - 1/xmax against target 1
        assert gap == pytest.approx(1e-3, rel=1e-9)

    def test_eta_staircase(self):
        gap = mellin_pair_gap(eta_series(), 0.5, 1.5, 10 ** 4)
        assert gap <= 1e-2

    def test_two_term_closed_form(self):
        gap = mellin_pair_gap(polynomial_series([1.0, -1.0]), 0.5, 2.0, 10 ** 2)
        assert gap <= 1e-2

    def test_gap_shrinks_with_cutoff(self):
        small = mellin_pair_gap(eta_series(), 0.5, 1.5, 10 ** 4)
        big = mellin_pair_gap(eta_series(), 0.5, 1.5, 10 ** 2)
        assert small < big

    def test_simpson_route_two_term(self):
        # independent closed form: integral 0.18736137056388802, target 0.1875
        gap = mellin_pair_gap(polynomial_series([1.0, -1.0]), 1.5, 2.0, 50.0)
        assert gap == pytest.approx(0.00013862943611198905, abs=1e-7)

    def test_simpson_route_matches_staircase_value(self):
        # alpha slightly off 1/2 must land near the staircase result
        g_half = mellin_pair_gap(eta_series(), 0.5, 2.0, 200.0)
        g_near = mellin_pair_gap(eta_series(), 0.501, 2.0, 200.0)
        assert abs(g_half - g_near) < 5e-3

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            mellin_pair_gap(eta_series(), 0.5, -0.5, 100.0)
        with pytest.raises(DomainError):
            mellin_pair_gap(eta_series(), 0.5, 1.0, 1.0)


class TestGrowthExponent:
    def test_synthetic_power_law(self):
        xs = np.geomspace(10.0, 10 ** 4, 40)
        est = g_growth_exponent(None, 1, 0.5, xs, g_values=xs ** 0.7)
        assert est.sigma_alpha == pytest.approx(0.7, abs=1e-6)
        assert est.residual < 1e-9
        assert est.x_range == (pytest.approx(10.0), pytest.approx(10 ** 4))

    def test_unit_stream_grows_linearly(self):
        ser = custom_series(lambda n: 1.0, sigma_c=1.0, sigma_a=1.0)
        xs = np.geomspace(10.0, 10 ** 4, 60)
        est = g_growth_exponent(ser, 1, 0.5, xs)
        assert est.sigma_alpha == pytest.approx(1.0, abs=0.05)

    def test_eta_bounded(self):
        xs = np.geomspace(3.1, 10 ** 4, 60)
        est = g_growth_exponent(eta_series(), 1, 0.5, xs)
        assert est.sigma_alpha <= 0.05

    def test_degenerate_all_zero(self):
        xs = np.linspace(10, 100, 12)
        with pytest.raises(DegenerateDataError):
            g_growth_exponent(None, 1, 0.5, xs, g_values=np.zeros(12))

    def test_grid_validation(self):
        with pytest.raises(ConfigurationError):
            g_growth_exponent(eta_series(), 1, 0.5, [1, 2, 3])
        with pytest.raises(ConfigurationError):
            g_growth_exponent(eta_series(), 1, 0.5, [1, 2, 3, 3, 4, 5, 6, 7])
