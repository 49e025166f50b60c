"""Logarithmic Riesz kernels, weighted summation, and the Mellin-pair check."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DomainError, QuadratureError
from .fits import envelope_growth_fit
from .series import (
    SeriesSpec,
    coefficients,
    evaluate,
    power_coefficients,
)

__all__ = [
    "RieszMeanSample",
    "SummabilityAbscissaEstimate",
    "riesz_kernel",
    "kernel_samples",
    "riesz_sum",
    "mellin_pair_gap",
    "g_growth_exponent",
]


@dataclass(frozen=True)
class RieszMeanSample:
    alpha: float
    x: float
    value: complex


@dataclass(frozen=True)
class SummabilityAbscissaEstimate:
    alpha: float
    sigma_alpha: float
    x_range: Tuple[float, float]
    residual: float


def _as_complex(s) -> complex:
    if hasattr(s, "as_complex"):
        return s.as_complex()
    return complex(s)


def _kernel_value(coeff: np.ndarray, alpha: float, x: float) -> complex:
    """sum'_{n<=x} log^(alpha-1/2)(x/n) c_n / Gamma(alpha+1/2).

    The primed sum halves the n = x term at integer x.  For alpha < 1/2 that
    term is singular, so it is dropped instead (left limit); the value stays
    finite for every x.
    """
    if x < 1.0:
        return 0.0 + 0.0j
    m = int(math.floor(x + 1e-12))
    m = min(m, len(coeff))
    logs = math.log(x) - np.log(np.arange(1, m + 1, dtype=float))
    c = np.array(coeff[:m], dtype=complex)
    at_integer = abs(x - round(x)) <= 1e-12 * max(1.0, abs(x))
    p = alpha - 0.5
    if p == 0.0:
        w = np.ones(m)
        if at_integer:
            w[m - 1] = 0.5
    elif p > 0.0:
        w = logs ** p
        if at_integer:
            w[m - 1] = 0.0  # log(x/x)^p with p>0; halving is a no-op
    else:
        w = np.empty(m)
        pos = logs > 0.0
        w[pos] = logs[pos] ** p
        w[~pos] = 0.0  # singular closing term dropped: left limit
    total = complex(np.dot(w, c))
    return total / math.gamma(alpha + 0.5)


def riesz_kernel(series: SeriesSpec, alpha: float, x: float) -> RieszMeanSample:
    """Weighted partial-sum kernel value at a single cutoff x."""
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    coeff = coefficients(series, max(1, int(math.floor(x + 1e-12)))) if x >= 1.0 \
        else np.zeros(0, dtype=complex)
    return RieszMeanSample(alpha=alpha, x=float(x),
                           value=_kernel_value(coeff, alpha, x))


def kernel_samples(series: SeriesSpec, alpha: float, x_grid: Sequence[float],
                   k: int = 1) -> list:
    """Kernel values along a cutoff grid, using the k-th power coefficients."""
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    xs = [float(x) for x in x_grid]
    n_need = max(1, int(math.floor(max(xs) + 1e-12))) if xs else 1
    if k == 1:
        coeff = coefficients(series, n_need)
    else:
        coeff = power_coefficients(series, k, n_need).values
    return [RieszMeanSample(alpha=alpha, x=x, value=_kernel_value(coeff, alpha, x))
            for x in xs]


def riesz_sum(series: SeriesSpec, alpha: float, s, x: float) -> complex:
    """sum_{n<=x} (1 - log n/log x)^(alpha-1/2) c_n n^(-s)."""
    if alpha < 0.5:
        raise DomainError(f"riesz_sum needs alpha >= 1/2, got {alpha}")
    if x <= 1.0:
        raise DomainError(f"riesz_sum needs x > 1, got {x}")
    z = _as_complex(s)
    m = int(math.floor(x + 1e-12))
    coeff = coefficients(series, m)
    n = np.arange(1, m + 1, dtype=float)
    rel = 1.0 - np.log(n) / math.log(x)
    p = alpha - 0.5
    w = np.ones(m) if p == 0.0 else np.clip(rel, 0.0, None) ** p
    return complex(np.dot(w * np.exp(-z * np.log(n)), coeff))


# ----------------------------------------------------------------------------
# Mellin-pair consistency


def _adaptive_simpson(f, a, b, tol, max_depth):
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        mid = 0.5 * (a + b)
        lm, rm = 0.5 * (a + mid), 0.5 * (mid + b)
        flm, frm = f(lm), f(rm)
        left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
        err = abs(left + right - whole)
        if err <= 15.0 * tol or depth <= 0:
            if depth <= 0 and err > 15.0 * tol:
                raise _SimpsonDepth(left + right + (left + right - whole) / 15.0)
            return left + right + (left + right - whole) / 15.0
        return (rec(a, mid, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(mid, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    return rec(a, b, fa, fm, fb, whole, tol, max_depth)


class _SimpsonDepth(Exception):
    def __init__(self, partial):
        self.partial = partial


def _mellin_integral_halfweight(coeff: np.ndarray, z: complex, x_max: float) -> complex:
    """Closed-form integral for alpha = 1/2: G is the prefix-sum staircase."""
    m_last = int(math.floor(x_max + 1e-12))
    prefix = np.cumsum(np.array(coeff[:m_last], dtype=complex))
    m = np.arange(1, m_last + 1, dtype=float)
    lo = np.exp(-z * np.log(m))
    hi = np.empty_like(lo)
    hi[:-1] = lo[1:]
    hi[-1] = np.exp(-z * math.log(x_max)) if x_max > m_last else lo[-1]
    if x_max <= m_last:  # integer cutoff: last panel is empty
        return complex(np.dot(prefix[:-1], (lo[:-1] - lo[1:]) / z))
    return complex(np.dot(prefix, (lo - hi) / z))


def mellin_pair_gap(series: SeriesSpec, alpha: float, s, x_max: float,
                    quad_tol: float = 1e-8) -> float:
    """|g(s)/s^(alpha+1/2) - int_1^xmax G_alpha(x) x^(-s-1) dx|.

    Principal branch for the s power.  The integral uses the exact staircase
    form at alpha = 1/2 and per-panel adaptive Simpson in log x otherwise,
    splitting at the integer kink points.
    """
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    z = _as_complex(s)
    if z.real <= series.sigma_c:
        raise DomainError(
            f"mellin check needs sigma > sigma_c={series.sigma_c}, got {z.real}")
    if x_max <= 1.0:
        raise DomainError(f"x_max must be > 1, got {x_max}")
    target = evaluate(series, z, tol=1e-10) / z ** (alpha + 0.5)
    m_last = int(math.floor(x_max + 1e-12))
    coeff = coefficients(series, m_last)
    if alpha == 0.5:
        integral = _mellin_integral_halfweight(coeff, z, x_max)
        return abs(target - integral)

    # general alpha: integrate G(e^u) e^(-z u) du panel by panel; on each
    # panel the term entering at the left edge carries a d^p cusp (p
    # noninteger) that Simpson cannot chase, so its integral is peeled off
    # through the entire-series form of int_0^delta w^p e^(-z w) dw
    breaks = [0.0] + [math.log(m) for m in range(2, m_last + 1)]
    if math.log(x_max) > breaks[-1] + 1e-12:
        breaks.append(math.log(x_max))
    panel_tol = quad_tol / max(1, len(breaks) - 1)
    total = 0.0 + 0.0j
    gamma_norm = math.gamma(alpha + 0.5)
    p = alpha - 0.5
    peel = abs(p - round(p)) > 1e-12
    log_n = np.log(np.arange(1, m_last + 1, dtype=float))
    carr = np.array(coeff, dtype=complex)

    def g_of_u(u, count):
        d = u - log_n[:count]
        if p >= 0.0:
            w = np.clip(d, 0.0, None) ** p
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.where(d > 0.0, d, np.inf) ** p
            w[~np.isfinite(w)] = 0.0
        return complex(np.dot(w, carr[:count])) / gamma_norm

    try:
        for a, b in zip(breaks[:-1], breaks[1:]):
            count = min(m_last, int(math.floor(math.exp(a) + 0.5)))
            if not peel:
                total += _adaptive_simpson(
                    lambda u: g_of_u(u, count) * np.exp(-z * u), a, b,
                    panel_tol, max_depth=24)
                continue
            delta = min(0.5 * (b - a), 2.0 / max(1.0, abs(z)))
            total += (carr[count - 1] / gamma_norm) * np.exp(-z * a) \
                * _cusp_moment(p, z, delta)
            total += _adaptive_simpson(
                lambda u: g_of_u(u, count - 1) * np.exp(-z * u), a, a + delta,
                panel_tol / 2.0, max_depth=24)
            total += _adaptive_simpson(
                lambda u: g_of_u(u, count) * np.exp(-z * u), a + delta, b,
                panel_tol / 2.0, max_depth=24)
    except _SimpsonDepth as exc:
        raise QuadratureError(
            f"panel quadrature stalled near x={math.exp(a):.6g}",
            partial=total + exc.partial) from None
    return abs(target - total)


def _cusp_moment(p: float, z: complex, delta: float) -> complex:
    """int_0^delta w^p e^(-z w) dw for p > -1, |z|*delta kept small by caller."""
    acc = 0.0 + 0.0j
    zfac = 1.0 + 0.0j  # (-z)^j / j!
    dpow = delta ** (p + 1.0)
    for j in range(120):
        term = zfac * dpow / (p + 1.0 + j)
        acc += term
        if abs(term) < 1e-18 * (abs(acc) + 1e-30):
            break
        zfac *= -z / (j + 1.0)
        dpow *= delta
    return acc


def g_growth_exponent(series: Optional[SeriesSpec], k: int, alpha: float,
                      x_grid: Sequence[float],
                      g_values: Optional[Sequence[complex]] = None
                      ) -> SummabilityAbscissaEstimate:
    """Upper-envelope slope of log|G_alpha| against log x over the grid.

    g_values, when given, bypasses the kernel computation (synthetic probes
    and precomputed sweeps); otherwise the k-th power coefficients are used.
    """
    xs = np.asarray([float(x) for x in x_grid], dtype=float)
    if len(xs) < 8:
        raise ConfigurationError(f"x_grid needs >= 8 points, got {len(xs)}")
    if np.any(np.diff(xs) <= 0.0):
        raise ConfigurationError("x_grid must be strictly increasing")
    if g_values is None:
        samples = kernel_samples(series, alpha, xs, k=k)
        mags = np.array([abs(s.value) for s in samples])
    else:
        mags = np.abs(np.asarray(list(g_values), dtype=complex))
        if len(mags) != len(xs):
            raise ConfigurationError("g_values length must match x_grid")
    fit = envelope_growth_fit(xs, mags)
    return SummabilityAbscissaEstimate(
        alpha=alpha, sigma_alpha=float(fit.exponent),
        x_range=(float(xs[0]), float(xs[-1])), residual=float(fit.residual))
