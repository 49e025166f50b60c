"""Finite-T moment integrals, the Parseval check, and tail extrapolation."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AccuracyError,
    ConfigurationError,
    DataError,
    DomainError,
    QuadratureError,
)
from .fits import growth_exponent
from .riesz import g_growth_exponent
from .series import (
    SeriesSpec,
    coefficients,
    evaluate_batch,
    has_real_coefficients,
    power_coefficients,
)

__all__ = [
    "MomentSample",
    "LargeValueMeasure",
    "TailExtrapolation",
    "MomentScan",
    "default_grid_step",
    "mean_square_moment",
    "weighted_moment",
    "weight_integral",
    "parseval_gap",
    "tail_extrapolate",
    "mean_value_target",
    "large_value_measure",
]

STEP_BASE = 0.05


@dataclass(frozen=True)
class MomentSample:
    k: int
    sigma: float
    alpha: Optional[float]
    T: float
    value: float
    quad_error: float


@dataclass(frozen=True)
class LargeValueMeasure:
    sigma: float
    delta: float
    T: float
    fraction: float


@dataclass(frozen=True)
class TailExtrapolation:
    diverged: bool
    rho: float
    coeff: float
    value: Optional[float]


def default_grid_step(k: int) -> float:
    # under the derivative bound the integrand oscillates on a unit scale;
    # the power 2k sharpens peaks by roughly a factor k
    return STEP_BASE / (1.0 + k)


def _damping(sigma: float, t: np.ndarray, alpha: float) -> np.ndarray:
    return (sigma * sigma + t * t) ** (-(alpha + 0.5))


class MomentScan:
    """|f(sigma+it)|^(2k) profiles on one uniform grid, queried repeatedly.

    Powers share the same evaluation of f; each query integrates a prefix of
    the grid by trapezoid (numpy pairwise reduction keeps the summation order
    fixed), with the every-other-point subgrid providing the halving error.
    Queried T values snap to the nearest grid point.
    """

    def __init__(self, series: SeriesSpec, sigma: float, t_max: float,
                 step: Optional[float] = None, tol: float = 1e-7,
                 k_values: Sequence[int] = (1,)):
        if sigma <= 0.0:
            raise DomainError(f"moment scans need sigma > 0, got {sigma}")
        if t_max < 0.0:
            raise DomainError(f"t_max must be >= 0, got {t_max}")
        if step is not None and step <= 0.0:
            raise DomainError(f"grid_step must be > 0, got {step}")
        self.series = series
        self.sigma = float(sigma)
        self.k_values = tuple(sorted(set(int(k) for k in k_values)))
        if any(k < 1 for k in self.k_values):
            raise ConfigurationError(f"moment powers must be >= 1: {self.k_values}")
        if step is None:
            step = default_grid_step(max(self.k_values))
        n = max(2, 2 * int(math.ceil(t_max / (2.0 * step)))) if t_max > 0 else 2
        self.h = t_max / n if t_max > 0 else step
        self.t = np.linspace(0.0, t_max, n + 1) if t_max > 0 else np.zeros(1)
        self.t_max = float(t_max)
        self.symmetric = has_real_coefficients(series)
        self._mags = {}
        grid = self.t if self.symmetric else np.concatenate([-self.t[::-1], self.t[1:]])
        try:
            values, bound = evaluate_batch(series, sigma, grid, tol=tol)
        except AccuracyError as exc:
            raise AccuracyError(
                f"profile evaluation failed on |t| <= {t_max:g} at "
                f"sigma={sigma:g}: {exc}",
                estimate=exc.estimate, bound=exc.bound) from None
        self.eval_bound = float(bound)
        mag = np.abs(values)
        if self.symmetric:
            self._mag_pos, self._mag_neg = mag, mag
        else:
            self._mag_pos = mag[len(self.t) - 1:]
            self._mag_neg = mag[:len(self.t)][::-1]  # index i holds |f(sigma-i*h*1j)|

    def _index_for(self, T: float) -> int:
        if T < 0.0:
            raise DomainError(f"T must be >= 0, got {T}")
        if T > self.t_max * (1.0 + 1e-12) + 1e-12:
            raise DomainError(f"T={T} beyond scanned range {self.t_max}")
        return min(len(self.t) - 1, int(round(T / self.h))) if self.t_max > 0 else 0

    def _integrand(self, k: int, alpha: Optional[float]):
        for side in ("pos", "neg"):
            key = (side, k)
            if key not in self._mags:
                arr = self._mag_pos if side == "pos" else self._mag_neg
                self._mags[key] = arr ** (2 * k)
            if self.symmetric:
                break
        pos = self._mags[("pos", k)]
        neg = pos if self.symmetric else self._mags[("neg", k)]
        if alpha is None:
            return pos, neg
        damp = _damping(self.sigma, self.t, alpha)
        return pos * damp, neg * damp

    @staticmethod
    def _trapezoid(w: np.ndarray, h: float) -> float:
        if len(w) < 2:
            return 0.0
        return float(h * (np.sum(w) - 0.5 * (w[0] + w[-1])))

    def moment(self, k: int, T: float, alpha: Optional[float] = None) -> MomentSample:
        if k not in self.k_values:
            self.k_values = tuple(sorted(set(self.k_values) | {int(k)}))
        if alpha is not None and alpha <= 0.0:
            raise DomainError(f"alpha must be > 0, got {alpha}")
        idx = self._index_for(T)
        if idx == 0:
            return MomentSample(k=k, sigma=self.sigma, alpha=alpha, T=0.0,
                                value=0.0, quad_error=0.0)
        pos, neg = self._integrand(k, alpha)
        fine = (self._trapezoid(pos[:idx + 1], self.h)
                + self._trapezoid(neg[:idx + 1], self.h))
        coarse_idx = idx if idx % 2 == 0 else idx - 1
        coarse = (self._trapezoid(pos[:coarse_idx + 1:2], 2.0 * self.h)
                  + self._trapezoid(neg[:coarse_idx + 1:2], 2.0 * self.h))
        fine_at_coarse = (self._trapezoid(pos[:coarse_idx + 1], self.h)
                          + self._trapezoid(neg[:coarse_idx + 1], self.h))
        quad_error = abs(fine_at_coarse - coarse)
        return MomentSample(k=k, sigma=self.sigma, alpha=alpha,
                            T=float(self.t[idx]), value=fine,
                            quad_error=quad_error)

    def large_values(self, delta: float, T: float) -> LargeValueMeasure:
        if delta <= 0.0:
            raise DomainError(f"delta must be > 0, got {delta}")
        idx = self._index_for(T)
        pos = self._mag_pos[:idx + 1]
        neg = self._mag_neg[:idx + 1]
        hits = int(np.sum(pos > delta)) + int(np.sum(neg[1:] > delta))
        total = 2 * idx + 1
        return LargeValueMeasure(sigma=self.sigma, delta=delta,
                                 T=float(self.t[idx]) if idx else 0.0,
                                 fraction=hits / total)


def _one_shot_scan(series, k, sigma, T, grid_step) -> MomentScan:
    step = grid_step if grid_step is not None else default_grid_step(k)
    return MomentScan(series, sigma, T, step=step, k_values=(max(1, k),))


def mean_square_moment(series: SeriesSpec, k: int, sigma: float, T: float,
                       grid_step: Optional[float] = None) -> MomentSample:
    """Trapezoidal integral of |f|^(2k) over [-T, T]."""
    if k < 1:
        raise ConfigurationError(f"k must be a positive integer, got {k}")
    if T == 0.0:
        return MomentSample(k=k, sigma=sigma, alpha=None, T=0.0,
                            value=0.0, quad_error=0.0)
    return _one_shot_scan(series, k, sigma, T, grid_step).moment(k, T)


def weighted_moment(series: SeriesSpec, k: int, sigma: float, alpha: float,
                    T: float, grid_step: Optional[float] = None) -> MomentSample:
    """Bare integral of |f|^(2k) |sigma+it|^(-2 alpha-1) over [-T, T]."""
    if k < 1:
        raise ConfigurationError(f"k must be a positive integer, got {k}")
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if T == 0.0:
        return MomentSample(k=k, sigma=sigma, alpha=alpha, T=0.0,
                            value=0.0, quad_error=0.0)
    return _one_shot_scan(series, k, sigma, T, grid_step).moment(k, T, alpha=alpha)


def weight_integral(sigma: float, alpha: float, T: float,
                    grid_step: Optional[float] = None) -> float:
    """Integral of the bare damping weight over [-T, T] (the k = 0 moment)."""
    if sigma <= 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if T == 0.0:
        return 0.0
    step = grid_step if grid_step is not None else STEP_BASE
    n = max(2, 2 * int(math.ceil(T / (2.0 * step))))
    t = np.linspace(0.0, T, n + 1)
    w = _damping(sigma, t, alpha)
    return 2.0 * MomentScan._trapezoid(w, T / n)


# ----------------------------------------------------------------------------
# Parseval two-route check


def _staircase_square_integral(prefix_abs2: np.ndarray, two_sigma: float,
                               x_max: float) -> float:
    m_last = len(prefix_abs2)
    m = np.arange(1, m_last + 1, dtype=float)
    lo = m ** (-two_sigma)
    hi = np.empty_like(lo)
    hi[:-1] = lo[1:]
    hi[-1] = x_max ** (-two_sigma) if x_max > m_last else lo[-1]
    if x_max <= m_last:
        return float(np.dot(prefix_abs2[:-1], (lo[:-1] - lo[1:]) / two_sigma))
    return float(np.dot(prefix_abs2, (lo - hi) / two_sigma))


def _kernel_square_integral(series: SeriesSpec, alpha: float, sigma: float,
                            x_max: float, k: int = 1,
                            quad_tol: float = 1e-7) -> float:
    """int_1^xmax |G_alpha(x)|^2 x^(-2 sigma - 1) dx."""
    m_last = int(math.floor(x_max + 1e-12))
    if k == 1:
        coeff = np.asarray(coefficients(series, m_last), dtype=complex)
    else:
        coeff = np.asarray(power_coefficients(series, k, m_last).values,
                           dtype=complex)
    p = alpha - 0.5
    if p == 0.0:
        prefix = np.cumsum(coeff)
        return _staircase_square_integral(np.abs(prefix) ** 2, 2.0 * sigma, x_max)

    gamma_norm = math.gamma(alpha + 0.5)
    log_n = np.log(np.arange(1, m_last + 1, dtype=float))

    def sq_of_u(u, count):
        d = u - log_n[:count]
        if p > 0.0:
            w = np.clip(d, 0.0, None) ** p
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.where(d > 0.0, d, np.inf) ** p
            w[~np.isfinite(w)] = 0.0
        g = complex(np.dot(w, coeff[:count])) / gamma_norm
        return abs(g) ** 2 * math.exp(-2.0 * sigma * u)

    from .riesz import _adaptive_simpson, _SimpsonDepth

    breaks = [0.0] + [math.log(m) for m in range(2, m_last + 1)]
    if math.log(x_max) > breaks[-1] + 1e-12:
        breaks.append(math.log(x_max))
    panel_tol = quad_tol / max(1, len(breaks) - 1)
    total = 0.0
    a = 0.0
    try:
        for a, b in zip(breaks[:-1], breaks[1:]):
            count = min(m_last, int(math.floor(math.exp(a) + 0.5)))
            delta = 0.5 * (b - a)
            # u = a + delta v^6 flattens the edge power so Simpson converges
            total += _adaptive_simpson(
                lambda v: sq_of_u(a + delta * v ** 6, count) * 6.0 * delta * v ** 5,
                0.0, 1.0, panel_tol / 2.0, max_depth=24)
            total += _adaptive_simpson(
                lambda u: sq_of_u(u, count), a + delta, b,
                panel_tol / 2.0, max_depth=24)
    except _SimpsonDepth as exc:
        raise QuadratureError(
            f"kernel-square quadrature stalled near x={math.exp(a):.6g}",
            partial=total + exc.partial) from None
    return total


def parseval_gap(series: SeriesSpec, alpha: float, sigma: float, T: float,
                 x_max: float, grid_step: Optional[float] = None) -> float:
    """|(1/2 pi) weighted moment - kernel-square integral up to x_max|."""
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if series.kind == "polynomial":
        if sigma <= 0.0:
            raise DomainError(f"polynomial parseval check needs sigma > 0, got {sigma}")
    else:
        probe = np.geomspace(3.1, min(3000.0, max(64.0, x_max)), 40)
        est = g_growth_exponent(series, 1, alpha, probe).sigma_alpha
        if sigma <= max(0.0, est):
            raise DomainError(
                f"sigma={sigma} not above the estimated summability abscissa "
                f"{max(0.0, est):.3f} for alpha={alpha}")
    left = weighted_moment(series, 1, sigma, alpha, T, grid_step).value / (2.0 * math.pi)
    right = _kernel_square_integral(series, alpha, sigma, x_max)
    return abs(left - right)


# ----------------------------------------------------------------------------
# Tail extrapolation and limit targets


def tail_extrapolate(samples: Sequence[MomentSample], alpha: float,
                     sigma: float) -> TailExtrapolation:
    """Power-law fit of A(T) with the boundary-term decomposition.

    A(T) = C T^rho over the sample range; for rho < 1 + 2 alpha the infinite
    one-sided weighted integral has the closed form
    (2 alpha + 1) C sigma^(rho - 2 alpha - 1) B((rho+2)/2, alpha+(1-rho)/2) / 2,
    the boundary terms vanishing at both ends.
    """
    if len(samples) < 8:
        raise ConfigurationError(f"need >= 8 samples, got {len(samples)}")
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if sigma <= 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    Ts = [s.T for s in samples]
    vals = [s.value for s in samples]
    if any(b <= a for a, b in zip(Ts, Ts[1:])):
        raise DataError("samples must have strictly increasing T")
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise DataError("moment values must be nondecreasing in T")
    if any(s.alpha is not None for s in samples):
        raise DataError("tail extrapolation expects unweighted samples")
    fit = growth_exponent(list(zip(Ts, vals)))
    rho = float(fit.exponent)
    coeff = math.exp(fit.log_coeff)
    if rho >= 1.0 + 2.0 * alpha:
        return TailExtrapolation(diverged=True, rho=rho, coeff=coeff, value=None)
    b1 = 0.5 * (rho + 2.0)
    b2 = alpha + 0.5 * (1.0 - rho)
    log_beta = (math.lgamma(b1) + math.lgamma(b2) - math.lgamma(b1 + b2))
    value = ((2.0 * alpha + 1.0) * coeff * 0.5
             * sigma ** (rho - 2.0 * alpha - 1.0) * math.exp(log_beta))
    return TailExtrapolation(diverged=False, rho=rho, coeff=coeff, value=value)


def mean_value_target(series: SeriesSpec, k: int, sigma: float,
                      n_max: int = 100000, rel_tol: float = 0.01,
                      return_bound: bool = False):
    """Truncated sum of |c_(n,k)|^2 n^(-2 sigma) with a dyadic tail estimate."""
    if sigma <= 0.5:
        raise DomainError(f"mean-value limit needs sigma > 1/2, got {sigma}")
    if k < 1:
        raise ConfigurationError(f"k must be a positive integer, got {k}")
    coeff = power_coefficients(series, k, n_max).values
    n = np.arange(1, n_max + 1, dtype=float)
    terms = np.abs(np.asarray(coeff, dtype=complex)) ** 2 * n ** (-2.0 * sigma)
    value = float(np.sum(terms))
    q = n_max // 4
    b1 = float(np.sum(terms[q:2 * q]))
    b2 = float(np.sum(terms[2 * q:]))
    floor = 1e-15 * (value + 1.0)
    if b2 <= floor:
        bound = floor
    elif b1 <= b2:
        bound = math.inf
    else:
        r = b2 / b1
        bound = b2 * r / (1.0 - r) + floor
    if not bound <= rel_tol * max(value, 1e-300):
        raise AccuracyError(
            f"tail bound {bound:g} above {rel_tol:g} of the partial sum "
            f"{value:g}; raise n_max", estimate=value, bound=bound)
    if return_bound:
        return value, bound
    return value


def large_value_measure(series: SeriesSpec, sigma: float, delta: float,
                        T: float, grid_step: Optional[float] = None
                        ) -> LargeValueMeasure:
    """Fraction of grid points in [-T, T] where |f| exceeds delta."""
    scan = _one_shot_scan(series, 1, sigma, T, grid_step)
    return scan.large_values(delta, T)
