"""Moment-based abscissa estimates and the order-function profile."""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BracketNotFoundError,
    ConfigurationError,
    DataError,
    DegenerateDataError,
    DomainError,
)
from .fits import GrowthFit, growth_exponent
from .moments import MomentScan, default_grid_step
from .series import SeriesSpec, evaluate_batch

__all__ = [
    "WEIGHTED_DIVERGENCE_THRESHOLD",
    "UNWEIGHTED_DIVERGENCE_THRESHOLD",
    "GrowthFit",
    "growth_exponent",
    "AbscissaEstimate",
    "OrderFunctionPoint",
    "OrderFunctionEstimate",
    "ProfileCache",
    "estimate_sigma_k_alpha",
    "estimate_sigma_k",
    "estimate_mu",
    "order_function_profile",
    "convexity_bound",
]

# a truly divergent weighted integral shows an exponent bounded away from
# zero; 0.1 absorbs finite-T drift of convergent cells.  The unweighted
# criterion compares against linear growth in T.
WEIGHTED_DIVERGENCE_THRESHOLD = 0.1
UNWEIGHTED_DIVERGENCE_THRESHOLD = 1.1


@dataclass(frozen=True)
class AbscissaEstimate:
    k: int
    alpha: float  # 0 encodes the unweighted estimate
    value: float
    bracket: Tuple[float, float]
    diagnostics: Tuple[Tuple[float, GrowthFit], ...]


@dataclass(frozen=True)
class OrderFunctionPoint:
    sigma: float
    mu_hat: float
    fit: GrowthFit


@dataclass(frozen=True)
class OrderFunctionEstimate:
    grid: Tuple[OrderFunctionPoint, ...]
    mu0_hat: float
    sigma_L_hat: float


class ProfileCache:
    """Reuses MomentScan profiles across abscissa queries.

    Scans are keyed by (series identity, sigma, step); a request with larger
    t_max than the stored scan rebuilds it once at the larger range.
    """

    def __init__(self):
        self._scans = {}

    def scan(self, series: SeriesSpec, sigma: float, t_max: float,
             step: float, tol: float = 1e-7) -> MomentScan:
        key = (id(series), round(float(sigma), 12), round(float(step), 12))
        hit = self._scans.get(key)
        if hit is None or hit.t_max < t_max * (1.0 - 1e-12):
            hit = MomentScan(series, sigma, t_max, step=step, tol=tol)
            self._scans[key] = hit
        return hit


def _validate_sigma_grid(sigma_grid) -> list:
    grid = [float(s) for s in sigma_grid]
    if len(grid) < 2:
        raise ConfigurationError("sigma_grid needs at least 2 points")
    if any(not (0.0 < s < 1.0) for s in grid):
        raise ConfigurationError(f"sigma_grid must lie in (0, 1): {grid}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigurationError("sigma_grid must be strictly increasing")
    return grid


def _validate_t_grid(T_grid) -> list:
    Ts = [float(T) for T in T_grid]
    if len(Ts) < 3:
        raise ConfigurationError("T_grid needs at least 3 points")
    if Ts[0] <= 0.0 or any(b <= a for a, b in zip(Ts, Ts[1:])):
        raise ConfigurationError("T_grid must be positive and increasing")
    return Ts


def _bracket_scan(series, k, alpha, sigma_grid, T_grid, threshold,
                  cache, grid_step):
    grid = _validate_sigma_grid(sigma_grid)
    Ts = _validate_t_grid(T_grid)
    step = grid_step if grid_step is not None else default_grid_step(k)
    cache = cache if cache is not None else ProfileCache()
    report_alpha = alpha if alpha is not None else 0.0

    if series.kind == "polynomial":
        # bounded modulus: every sigma converges, the bracket collapses at
        # grid resolution with the fit at the first point as evidence
        scan = cache.scan(series, grid[0], Ts[-1], step)
        fit = growth_exponent([(T, scan.moment(k, T, alpha=alpha).value)
                               for T in Ts])
        return AbscissaEstimate(k=k, alpha=report_alpha, value=0.0,
                                bracket=(0.0, grid[0]),
                                diagnostics=((grid[0], fit),))

    fits = []
    flags = []
    for sigma in grid:
        scan = cache.scan(series, sigma, Ts[-1], step)
        fit = growth_exponent([(T, scan.moment(k, T, alpha=alpha).value)
                               for T in Ts])
        fits.append(fit)
        flags.append(fit.exponent > threshold)
    if not any(flags):
        raise BracketNotFoundError(
            f"every sigma in {grid} looks convergent (exponents all <= "
            f"{threshold}); extend the grid downward", side="all_convergent")
    last_div = max(i for i, d in enumerate(flags) if d)
    if last_div == len(grid) - 1:
        raise BracketNotFoundError(
            f"every sigma up to {grid[-1]} looks divergent; extend the grid "
            f"upward", side="all_divergent")
    lo, hi = grid[last_div], grid[last_div + 1]
    fit_lo, fit_hi = fits[last_div], fits[last_div + 1]
    if not (fit_lo.exponent > threshold >= fit_hi.exponent):
        raise DataError("bracket construction lost its defining property")
    value = 0.5 * (lo + hi)
    if not (lo <= value <= hi and 0.0 <= value <= series.sigma_a):
        raise DataError(
            f"estimate {value} escapes [0, sigma_a={series.sigma_a}]")
    return AbscissaEstimate(k=k, alpha=report_alpha, value=value,
                            bracket=(lo, hi),
                            diagnostics=((lo, fit_lo), (hi, fit_hi)))


def estimate_sigma_k_alpha(series: SeriesSpec, k: int, alpha: float,
                           sigma_grid: Sequence[float],
                           T_grid: Sequence[float],
                           cache: Optional[ProfileCache] = None,
                           grid_step: Optional[float] = None
                           ) -> AbscissaEstimate:
    """Bracket the weighted-moment convergence abscissa on the sigma grid."""
    if k < 1:
        raise ConfigurationError(f"k must be a positive integer, got {k}")
    if alpha is None or alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if series.mu0_hint is not None and alpha > k * series.mu0_hint + 1e-12:
        raise DomainError(
            f"alpha={alpha} beyond k*mu0={k * series.mu0_hint} for this series")
    return _bracket_scan(series, k, alpha, sigma_grid, T_grid,
                         WEIGHTED_DIVERGENCE_THRESHOLD, cache, grid_step)


def estimate_sigma_k(series: SeriesSpec, k: int,
                     sigma_grid: Sequence[float], T_grid: Sequence[float],
                     cache: Optional[ProfileCache] = None,
                     grid_step: Optional[float] = None) -> AbscissaEstimate:
    """Bracket the unweighted abscissa against the linear-in-T criterion."""
    if k < 1:
        raise ConfigurationError(f"k must be a positive integer, got {k}")
    return _bracket_scan(series, k, None, sigma_grid, T_grid,
                         UNWEIGHTED_DIVERGENCE_THRESHOLD, cache, grid_step)


def estimate_mu(series: SeriesSpec, sigma: float, t_grid: Sequence[float],
                magnitude_fn: Optional[Callable] = None,
                tol: float = 1e-6) -> Tuple[float, GrowthFit]:
    """Upper-envelope growth exponent of |f(sigma+it)|, clamped at 0.

    magnitude_fn(sigma, t_array) -> array substitutes the evaluation when
    given (synthetic profiles in tests and calibration runs).
    """
    if sigma <= 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    t = np.asarray([float(x) for x in t_grid], dtype=float)
    if len(t) < 8:
        raise ConfigurationError(f"t_grid needs >= 8 points, got {len(t)}")
    if t[0] < 1.0 or np.any(np.diff(t) <= 0.0):
        raise ConfigurationError("t_grid must be increasing with t >= 1")
    if t[-1] < 1e3:
        raise ConfigurationError(
            f"t_grid must reach 1e3 for a stable envelope, got {t[-1]}")
    if magnitude_fn is not None:
        mags = np.asarray(magnitude_fn(sigma, t), dtype=float)
    else:
        values, _ = evaluate_batch(series, sigma, t, tol=tol)
        mags = np.abs(values)
    # running-maximum staircase at every grid point: flat stretches between
    # records pull bounded series toward slope 0, growing ones keep theirs
    stair = np.maximum.accumulate(mags)
    keep = stair > 0.0
    if int(keep.sum()) < 3:
        raise DegenerateDataError("magnitudes are zero on almost all of t_grid")
    fit = growth_exponent(list(zip(t[keep], stair[keep])))
    return max(0.0, float(fit.exponent)), fit


def order_function_profile(series: SeriesSpec, sigma_grid: Sequence[float],
                           t_grid: Sequence[float],
                           magnitude_fn: Optional[Callable] = None,
                           zero_threshold: float = 0.02
                           ) -> OrderFunctionEstimate:
    """estimate_mu across a sigma grid, with mu(0) extrapolation and sigma_L."""
    grid = _validate_sigma_grid(sigma_grid)
    points = []
    for sigma in grid:
        mu_hat, fit = estimate_mu(series, sigma, t_grid,
                                  magnitude_fn=magnitude_fn)
        points.append(OrderFunctionPoint(sigma=sigma, mu_hat=mu_hat, fit=fit))
    s1, s2 = grid[0], grid[1]
    m1, m2 = points[0].mu_hat, points[1].mu_hat
    extrapolated = m1 + s1 * (m1 - m2) / (s2 - s1)
    mu0_hat = max([extrapolated] + [p.mu_hat for p in points])
    sigma_L_hat = math.inf
    for p in points:
        if p.mu_hat <= zero_threshold:
            sigma_L_hat = p.sigma
            break
    return OrderFunctionEstimate(grid=tuple(points), mu0_hat=mu0_hat,
                                 sigma_L_hat=sigma_L_hat)


def convexity_bound(mu0: float, sigma_L: float, sigma: float) -> float:
    """The straight line mu0 (1 - sigma/sigma_L) on [0, sigma_L]."""
    if mu0 <= 0.0:
        raise DomainError(f"mu0 must be > 0, got {mu0}")
    if sigma_L <= 0.0:
        raise DomainError(f"sigma_L must be > 0, got {sigma_L}")
    if not (0.0 <= sigma <= sigma_L):
        raise DomainError(f"sigma={sigma} outside [0, {sigma_L}]")
    return mu0 * (1.0 - sigma / sigma_L)
