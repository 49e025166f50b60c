import math

import numpy as np
import pytest

from dirlab.errors import (
    AccuracyError,
    ConfigurationError,
    DataError,
    DomainError,
)
from dirlab.moments import (
    LargeValueMeasure,
    MomentSample,
    MomentScan,
    large_value_measure,
    mean_square_moment,
    mean_value_target,
    parseval_gap,
    tail_extrapolate,
    weight_integral,
    weighted_moment,
)
from dirlab.series import (
    character_series,
    custom_series,
    eta_series,
    evaluate_batch,
    polynomial_series,
    power_coefficients,
)

from oracles import naive_power_coefficients, zeta_value


class TestMeanSquare:
    def test_constant_modulus(self):
        s = mean_square_moment(polynomial_series([1.0]), 1, 1.0, 50.0)
        assert s.value == pytest.approx(100.0, rel=1e-12)
        assert s.quad_error < 1e-9

    def test_two_term_mean_value(self):
        s = mean_square_moment(polynomial_series([1.0, -1.0]), 1, 1.0, 5000.0)
        assert s.value == pytest.approx(2 * 5000.0 * 1.25, rel=0.02)

    def test_eta_mean_value(self):
        s = mean_square_moment(eta_series(), 1, 0.75, 5000.0)
        assert s.value / (2 * 5000.0) == pytest.approx(zeta_value(1.5), rel=0.05)

    def test_monotone_in_T(self):
        a = mean_square_moment(eta_series(), 1, 0.6, 20.0, grid_step=0.05)
        b = mean_square_moment(eta_series(), 1, 0.6, 40.0, grid_step=0.05)
        assert b.value >= a.value

    def test_grid_halving_inside_reported_error(self):
        coarse = mean_square_moment(eta_series(), 1, 0.6, 40.0, grid_step=0.05)
        fine = mean_square_moment(eta_series(), 1, 0.6, 40.0, grid_step=0.025)
        assert abs(fine.value - coarse.value) < 4.0 * coarse.quad_error + 1e-12

    def test_zero_T(self):
        s = mean_square_moment(eta_series(), 1, 1.0, 0.0)
        assert s.value == 0.0 and s.quad_error == 0.0

    def test_preconditions(self):
        with pytest.raises(DomainError):
            mean_square_moment(eta_series(), 1, 0.0, 10.0)
        with pytest.raises(ConfigurationError):
            mean_square_moment(eta_series(), 0, 1.0, 10.0)
        with pytest.raises(DomainError):
            mean_square_moment(eta_series(), 1, 1.0, 10.0, grid_step=-0.1)


class TestWeighted:
    def test_arctan_limit(self):
        s = weighted_moment(polynomial_series([1.0]), 1, 1.0, 0.5, 10 ** 4)
        assert s.value == pytest.approx(math.pi, abs=1e-3)

    def test_arctan_limit_sigma_two(self):
        s = weighted_moment(polynomial_series([1.0]), 1, 2.0, 0.5, 10 ** 4)
        # closed form: 2 arctan(T/2) / 2 -> pi/2
        assert s.value == pytest.approx(math.pi / 2.0, abs=1e-3)

    def test_zero_T(self):
        s = weighted_moment(eta_series(), 2, 0.8, 1.0, 0.0)
        assert s.value == 0.0

    def test_holder_inequality_literal(self):
        step = 0.01
        W = weight_integral(0.8, 0.4, 50.0, grid_step=step)
        M1 = weighted_moment(eta_series(), 1, 0.8, 0.4, 50.0, grid_step=step).value
        M2 = weighted_moment(eta_series(), 2, 0.8, 0.4, 50.0, grid_step=step).value
        assert M1 ** 2 <= M2 * W * (1.0 + 1e-12)

    def test_weight_integral_closed_form(self):
        got = weight_integral(1.0, 0.5, 2000.0, grid_step=0.02)
        assert got == pytest.approx(2.0 * math.atan(2000.0), abs=1e-4)


class TestScan:
    def test_matches_one_shot(self):
        scan = MomentScan(eta_series(), 0.6, 100.0, step=0.05, k_values=(1, 2))
        one = mean_square_moment(eta_series(), 1, 0.6, 50.0, grid_step=0.05)
        got = scan.moment(1, 50.0)
        assert got.value == pytest.approx(one.value, rel=1e-12)
        w_one = weighted_moment(eta_series(), 2, 0.6, 0.7, 100.0, grid_step=0.05)
        w_got = scan.moment(2, 100.0, alpha=0.7)
        assert w_got.value == pytest.approx(w_one.value, rel=1e-12)

    def test_complex_profile_integrates_both_sides(self):
        ser = character_series(5, 1)
        scan = MomentScan(ser, 0.8, 5.0, step=0.01)
        t = np.arange(-500, 501) * 0.01
        vals, _ = evaluate_batch(ser, 0.8, t, tol=1e-8)
        w = np.abs(vals) ** 2
        want = 0.01 * (np.sum(w) - 0.5 * (w[0] + w[-1]))
        assert scan.moment(1, 5.0).value == pytest.approx(want, rel=1e-10)

    def test_accuracy_error_carries_context(self):
        ser = custom_series(lambda n: (-1) ** (n - 1), sigma_c=0.0, sigma_a=1.0)
        with pytest.raises(AccuracyError) as exc:
            MomentScan(ser, 0.3, 2.0, step=0.5, tol=1e-9)
        assert "profile evaluation" in str(exc.value)

    def test_beyond_range_rejected(self):
        scan = MomentScan(eta_series(), 0.6, 10.0, step=0.1)
        with pytest.raises(DomainError):
            scan.moment(1, 11.0)


class TestParseval:
    def test_unit_polynomial(self):
        for sigma in (1.0, 0.75):
            gap = parseval_gap(polynomial_series([1.0]), 0.5, sigma, 10 ** 4, 10 ** 3)
            assert gap <= 1e-3

    def test_two_term_half(self):
        gap = parseval_gap(polynomial_series([1.0, -1.0]), 0.5, 0.5, 10 ** 4, 10.0)
        assert gap <= 0.01 * 0.5

    def test_eta(self):
        from dirlab.moments import _kernel_square_integral
        right = _kernel_square_integral(eta_series(), 0.5, 0.75, 10 ** 4)
        gap = parseval_gap(eta_series(), 0.5, 0.75, 10 ** 4, 10 ** 4)
        assert gap <= 0.05 * right

    def test_gap_shrinks_jointly_for_polynomial(self):
        big = parseval_gap(polynomial_series([1.0]), 0.5, 1.0, 10 ** 3, 10 ** 2)
        small = parseval_gap(polynomial_series([1.0]), 0.5, 1.0, 10 ** 4, 10 ** 3)
        assert small < big

    def test_general_alpha_square_route(self):
        # alpha=3/2 two-term series: G = log x - log(x/2) = log 2 beyond x=2
        from dirlab.moments import _kernel_square_integral
        got = _kernel_square_integral(polynomial_series([1.0, -1.0]), 1.5, 1.0, 100.0)
        with_log = lambda x: math.log(x) ** 2
        import mpmath
        want = float(
            mpmath.quad(lambda x: with_log(x) * x ** -3, [1, 2])
            + math.log(2.0) ** 2 * (2.0 ** -2 - 100.0 ** -2) / 2.0)
        assert got == pytest.approx(want, abs=1e-6)

    def test_precondition_for_nonpolynomial(self):
        with pytest.raises(DomainError):
            parseval_gap(custom_series(lambda n: 1.0, 1.0, 1.0), 0.5, 0.4, 100.0, 100.0)


class TestTailExtrapolate:
    @staticmethod
    def synth(values, Ts):
        return [MomentSample(k=1, sigma=1.0, alpha=None, T=float(T),
                             value=float(v), quad_error=0.0)
                for T, v in zip(Ts, values)]

    def test_linear_growth_closed_form(self):
        Ts = np.geomspace(10.0, 10 ** 4, 12)
        out = tail_extrapolate(self.synth(3.0 * Ts, Ts), 0.5, 1.0)
        assert not out.diverged
        assert out.rho == pytest.approx(1.0, abs=1e-9)
        assert out.value == pytest.approx(1.5 * math.pi, rel=1e-6)
        # direct weighted quadrature of the same integrand, one-sided
        direct = weighted_moment(polynomial_series([math.sqrt(3.0)]), 1, 1.0,
                                 0.5, 10 ** 4).value / 2.0
        assert out.value == pytest.approx(direct, rel=0.01)

    def test_fast_growth_diverges(self):
        Ts = np.geomspace(10.0, 10 ** 3, 10)
        out = tail_extrapolate(self.synth(Ts ** 2.5, Ts), 0.5, 1.0)
        assert out.diverged
        assert out.rho == pytest.approx(2.5, abs=1e-6)
        assert out.value is None

    def test_edge_exponent_converges(self):
        Ts = np.geomspace(10.0, 10 ** 3, 10)
        out = tail_extrapolate(self.synth(Ts ** 1.999, Ts), 0.5, 1.0)
        assert not out.diverged
        assert out.value is not None and out.value > 0.0

    def test_rejects_bad_samples(self):
        Ts = np.geomspace(10.0, 100.0, 10)
        with pytest.raises(ConfigurationError):
            tail_extrapolate(self.synth(Ts, Ts)[:5], 0.5, 1.0)
        decreasing = self.synth([5, 4, 3, 2, 1, 1, 1, 1, 1, 1], Ts)
        with pytest.raises(DataError):
            tail_extrapolate(decreasing, 0.5, 1.0)
        weighted = [MomentSample(1, 1.0, 0.5, float(T), float(T), 0.0) for T in Ts]
        with pytest.raises(DataError):
            tail_extrapolate(weighted, 0.5, 1.0)


class TestMeanValueTarget:
    def test_eta_zeta_three_halves(self):
        value = mean_value_target(eta_series(), 1, 0.75)
        assert value == pytest.approx(zeta_value(1.5), rel=0.01)
        assert value < zeta_value(1.5)

    def test_two_term_exact(self):
        assert mean_value_target(polynomial_series([1.0, -1.0]), 1, 1.0) \
            == pytest.approx(1.25, abs=1e-15)

    def test_square_coefficients_match_convolution_oracle(self):
        n = 2000
        want_coeff = naive_power_coefficients([(-1) ** (m - 1) for m in range(1, n + 1)], 2)
        got_coeff = power_coefficients(eta_series(), 2, n).values
        assert list(got_coeff) == want_coeff
        want = sum(c * c / float(m) ** 2 for m, c in enumerate(want_coeff, start=1))
        got, bound = mean_value_target(eta_series(), 2, 1.0, n_max=100000,
                                       return_bound=True)
        full = mean_value_target(eta_series(), 2, 1.0)
        assert abs(got - want) <= bound + 0.01 * want
        assert got == full

    def test_tail_failure_raises(self):
        with pytest.raises(AccuracyError):
            mean_value_target(eta_series(), 1, 0.51, n_max=1000, rel_tol=1e-4)

    def test_sigma_validation(self):
        with pytest.raises(DomainError):
            mean_value_target(eta_series(), 1, 0.5)


class TestLargeValues:
    def test_constant_above(self):
        m = large_value_measure(polynomial_series([1.0]), 1.0, 0.5, 30.0)
        assert m.fraction == 1.0

    def test_constant_below(self):
        m = large_value_measure(polynomial_series([1.0]), 1.0, 2.0, 30.0)
        assert m.fraction == 0.0

    def test_eta_mostly_large(self):
        m = large_value_measure(eta_series(), 0.75, 0.1, 1000.0)
        assert m.fraction >= 0.5

    def test_non_increasing_in_delta(self):
        scan = MomentScan(eta_series(), 0.75, 200.0, step=0.05)
        fracs = [scan.large_values(d, 200.0).fraction for d in (0.05, 0.2, 0.8, 1.5)]
        assert all(a >= b for a, b in zip(fracs, fracs[1:]))

    def test_delta_validation(self):
        with pytest.raises(DomainError):
            large_value_measure(eta_series(), 0.75, 0.0, 10.0)
