import math

import numpy as np
import pytest

from dirlab.abscissa import (
    ProfileCache,
    convexity_bound,
    estimate_mu,
    estimate_sigma_k,
    estimate_sigma_k_alpha,
    order_function_profile,
)
from dirlab.errors import (
    BracketNotFoundError,
    ConfigurationError,
    DegenerateDataError,
    DomainError,
)
from dirlab.series import eta_series, polynomial_series

# shared weighted-scan geometry: T window [1000, 4000] with profiles to 4000
# and the k=2-safe grid step; brackets below are frozen against this setup
WEIGHTED_SIGMAS = (0.02, 0.06, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40,
                   0.45, 0.50, 0.55, 0.60, 0.70, 0.80, 0.90, 0.95)
WEIGHTED_TGRID = tuple(np.geomspace(1000.0, 4000.0, 10))
WEIGHTED_STEP = 0.05 / 3


@pytest.fixture(scope="module")
def eta():
    return eta_series()


@pytest.fixture(scope="module")
def weighted_cache():
    return ProfileCache()


def weighted_estimate(eta, cache, k, alpha):
    return estimate_sigma_k_alpha(eta, k, alpha, WEIGHTED_SIGMAS,
                                  WEIGHTED_TGRID, cache=cache,
                                  grid_step=WEIGHTED_STEP)


class TestValidation:
    def test_sigma_grid_not_increasing(self, eta):
        with pytest.raises(ConfigurationError):
            estimate_sigma_k(eta, 1, [0.5, 0.4], [10.0, 20.0, 40.0])

    def test_sigma_grid_outside_strip(self, eta):
        with pytest.raises(ConfigurationError):
            estimate_sigma_k(eta, 1, [0.5, 1.0], [10.0, 20.0, 40.0])

    def test_t_grid_too_short(self, eta):
        with pytest.raises(ConfigurationError):
            estimate_sigma_k(eta, 1, [0.4, 0.6], [10.0, 20.0])

    def test_bad_alpha(self, eta):
        with pytest.raises(DomainError):
            estimate_sigma_k_alpha(eta, 1, 0.0, [0.4, 0.6],
                                   [10.0, 20.0, 40.0])

    def test_alpha_beyond_k_mu0_hint(self):
        hinted = eta_series(mu0_hint=0.5)
        with pytest.raises(DomainError):
            estimate_sigma_k_alpha(hinted, 1, 0.6, [0.4, 0.6],
                                   [10.0, 20.0, 40.0])

    def test_bad_k(self, eta):
        with pytest.raises(ConfigurationError):
            estimate_sigma_k(eta, 0, [0.4, 0.6], [10.0, 20.0, 40.0])


class TestPolynomialShortCircuit:
    def test_unweighted(self):
        poly = polynomial_series([1.0, -1.0])
        est = estimate_sigma_k(poly, 1, [0.2, 0.4],
                               np.geomspace(100.0, 1000.0, 5))
        assert est.value == 0.0
        assert est.bracket == (0.0, 0.2)
        assert len(est.diagnostics) == 1
        assert est.diagnostics[0][0] == 0.2

    def test_weighted(self):
        poly = polynomial_series([1.0, -1.0])
        est = estimate_sigma_k_alpha(poly, 1, 0.3, [0.2, 0.4],
                                     np.geomspace(100.0, 1000.0, 5))
        assert est.value == 0.0
        assert est.value <= 0.2


class TestUnweightedEta:
    def test_bracket_and_value(self, eta):
        est = estimate_sigma_k(eta, 1,
                               sigma_grid=[0.40, 0.45, 0.50, 0.55, 0.60],
                               T_grid=np.geomspace(1000.0, 20000.0, 10),
                               grid_step=0.1)
        assert est.bracket == (0.50, 0.55)
        assert abs(est.value - 0.525) < 1e-12
        assert 0.45 <= est.value <= 0.55
        (lo_s, lo_fit), (hi_s, hi_fit) = est.diagnostics
        assert lo_fit.exponent > 1.1 >= hi_fit.exponent
        assert est.alpha == 0.0

    def test_all_convergent_side(self, eta):
        with pytest.raises(BracketNotFoundError) as exc:
            estimate_sigma_k(eta, 1, [0.90, 0.95],
                             np.geomspace(500.0, 2000.0, 6), grid_step=0.1)
        assert exc.value.side == "all_convergent"

    def test_all_divergent_side(self, eta):
        with pytest.raises(BracketNotFoundError) as exc:
            estimate_sigma_k(eta, 1, [0.05, 0.10],
                             np.geomspace(500.0, 2000.0, 6), grid_step=0.1)
        assert exc.value.side == "all_divergent"


class TestWeightedEta:
    def test_k1_brackets(self, eta, weighted_cache):
        frozen = {0.05: (0.80, 0.90), 0.1: (0.55, 0.60), 0.2: (0.35, 0.40),
                  0.3: (0.25, 0.30), 0.4: (0.10, 0.15)}
        for alpha, bracket in frozen.items():
            est = weighted_estimate(eta, weighted_cache, 1, alpha)
            assert est.bracket == pytest.approx(bracket), alpha
            assert est.value == pytest.approx(sum(bracket) / 2)

    def test_alpha_monotonicity(self, eta, weighted_cache):
        alphas = [0.05, 0.1, 0.2, 0.3, 0.4]
        ests = [weighted_estimate(eta, weighted_cache, 1, a) for a in alphas]
        for prev, nxt in zip(ests, ests[1:]):
            widths = (prev.bracket[1] - prev.bracket[0]
                      + nxt.bracket[1] - nxt.bracket[0])
            assert nxt.value <= prev.value + widths

    def test_k_monotonicity(self, eta, weighted_cache):
        e1 = weighted_estimate(eta, weighted_cache, 1, 0.1)
        e2 = weighted_estimate(eta, weighted_cache, 2, 0.1)
        widths = (e1.bracket[1] - e1.bracket[0]
                  + e2.bracket[1] - e2.bracket[0])
        assert e1.value <= e2.value + widths
        assert e2.bracket == pytest.approx((0.80, 0.90))

    def test_alpha_near_k_mu0_sits_low(self, eta, weighted_cache):
        # the estimate must collapse toward 0 as alpha approaches k*mu(0)
        near = weighted_estimate(eta, weighted_cache, 1, 0.4)
        far = weighted_estimate(eta, weighted_cache, 1, 0.05)
        assert near.value < far.value

    def test_alpha_limit_approaches_unweighted(self, eta, weighted_cache):
        # small-alpha weighted estimates drift toward the unweighted value;
        # alpha=0.05 is excluded: its finite-T bracket overshoots at this
        # desk scale (see notes)
        unweighted = 0.525
        gaps = []
        for alpha in (0.4, 0.2, 0.1):
            est = weighted_estimate(eta, weighted_cache, 1, alpha)
            gaps.append(abs(est.value - unweighted))
        assert gaps[0] > gaps[1] > gaps[2]
        final = weighted_estimate(eta, weighted_cache, 1, 0.1)
        assert abs(final.value - unweighted) <= 0.10

    def test_mu_at_estimated_abscissa_lower_bound(self, eta, weighted_cache):
        t_grid = np.geomspace(50.0, 3000.0, 100)
        for alpha in (0.1, 0.2):
            est = weighted_estimate(eta, weighted_cache, 1, alpha)
            mu_hat, _ = estimate_mu(eta, est.value, t_grid)
            assert mu_hat >= alpha / 1 - 0.05


class TestEstimateMu:
    def test_exact_power_law_via_seam(self, eta):
        fn = lambda sigma, t: 4.0 * t ** 0.3
        mu_hat, fit = estimate_mu(eta, 0.5, np.geomspace(10.0, 2000.0, 60),
                                  magnitude_fn=fn)
        assert abs(mu_hat - 0.3) < 1e-6
        assert fit.residual < 1e-9

    def test_constant_polynomial(self):
        poly = polynomial_series([1.0])
        mu_hat, _ = estimate_mu(poly, 1.0, np.geomspace(10.0, 2000.0, 50))
        assert mu_hat == 0.0

    def test_eta_absolutely_convergent_regime(self, eta):
        mu_hat, _ = estimate_mu(eta, 2.0, np.geomspace(10.0, 5000.0, 160))
        assert mu_hat <= 0.02

    def test_eta_deep_strip(self, eta):
        mu_hat, _ = estimate_mu(eta, 0.1, np.geomspace(50.0, 5000.0, 120))
        assert 0.25 <= mu_hat <= 0.55

    def test_negative_slope_clamps_to_zero(self, eta):
        fn = lambda sigma, t: 3.0 * t ** -0.4
        mu_hat, fit = estimate_mu(eta, 0.5, np.geomspace(10.0, 2000.0, 40),
                                  magnitude_fn=fn)
        assert mu_hat == 0.0
        # staircase of a decreasing profile is flat at its first value
        assert abs(fit.exponent) < 1e-9

    def test_grid_validation(self, eta):
        with pytest.raises(ConfigurationError):
            estimate_mu(eta, 0.5, np.geomspace(10.0, 500.0, 40))
        with pytest.raises(ConfigurationError):
            estimate_mu(eta, 0.5, [10.0, 20.0, 2000.0])
        with pytest.raises(ConfigurationError):
            estimate_mu(eta, 0.5, np.geomspace(0.5, 2000.0, 40))
        with pytest.raises(DomainError):
            estimate_mu(eta, 0.0, np.geomspace(10.0, 2000.0, 40))

    def test_all_zero_magnitudes(self, eta):
        with pytest.raises(DegenerateDataError):
            estimate_mu(eta, 0.5, np.geomspace(10.0, 2000.0, 40),
                        magnitude_fn=lambda s, t: np.zeros_like(t))


class TestOrderFunctionProfile:
    def test_synthetic_stream_matches_formula(self, eta):
        fn = lambda sigma, t: t ** (0.3 * (1.0 - sigma / 0.6))
        grid = [round(0.1 * i, 1) for i in range(1, 10)]
        prof = order_function_profile(eta, grid, np.geomspace(10.0, 2000.0, 60),
                                      magnitude_fn=fn)
        for p in prof.grid:
            want = max(0.0, 0.3 * (1.0 - p.sigma / 0.6))
            assert abs(p.mu_hat - want) < 0.02
        assert abs(prof.sigma_L_hat - 0.6) < 0.05
        assert abs(prof.mu0_hat - 0.3) < 1e-9

    def test_polynomial_all_zero(self):
        poly = polynomial_series([1.0])
        prof = order_function_profile(poly, [0.2, 0.5, 0.8],
                                      np.geomspace(10.0, 2000.0, 50))
        assert all(p.mu_hat == 0.0 for p in prof.grid)
        assert prof.sigma_L_hat == 0.2
        assert prof.mu0_hat == 0.0

    def test_eta_profile_desk_scale(self, eta):
        grid = [round(0.1 * i, 1) for i in range(1, 10)]
        prof = order_function_profile(eta, grid, np.geomspace(50.0, 3000.0, 100),
                                      zero_threshold=0.15)
        mus = [p.mu_hat for p in prof.grid]
        for a, b in zip(mus, mus[1:]):
            assert b <= a + 0.05
        assert 0.5 <= prof.sigma_L_hat <= 0.8
        assert prof.mu0_hat >= max(mus)
        assert 0.3 <= prof.mu0_hat <= 0.7

    def test_sigma_L_inf_when_never_small(self, eta):
        fn = lambda sigma, t: t ** 0.4
        prof = order_function_profile(eta, [0.2, 0.5],
                                      np.geomspace(10.0, 2000.0, 40),
                                      magnitude_fn=fn)
        assert prof.sigma_L_hat == math.inf


class TestConvexityBound:
    def test_endpoints_and_midpoint(self):
        assert convexity_bound(0.5, 0.5, 0.0) == 0.5
        assert convexity_bound(0.5, 0.5, 0.5) == 0.0
        assert convexity_bound(0.5, 0.5, 0.25) == pytest.approx(0.25)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            convexity_bound(0.5, 0.5, 0.75)
        with pytest.raises(DomainError):
            convexity_bound(0.0, 0.5, 0.1)
        with pytest.raises(DomainError):
            convexity_bound(0.5, 0.0, 0.0)
