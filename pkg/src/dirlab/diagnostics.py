"""Convexity/concavity verdicts and the linear-order-function pipeline.

Everything here is plain scalar arithmetic: feeding Fraction inputs keeps
the whole computation exact, floats degrade gracefully to ~1e-15.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConfigurationError,
    DataError,
    DomainError,
    InsufficientCoverageError,
    UnsupportedSeriesError,
)
from .series import SeriesSpec, evaluate_batch

__all__ = [
    "SequenceReport",
    "TheoremChain",
    "UpperBoundReport",
    "RatioBracket",
    "TheoremPipelineReport",
    "check_convexity_in_alpha",
    "check_concavity_in_k",
    "predict_linear_mu",
    "lindelof_form",
    "upper_bound_check",
    "theorem_pipeline",
    "functional_equation_gap",
]


@dataclass(frozen=True)
class SequenceReport:
    points: Tuple[Tuple[float, float], ...]
    property: str  # "convex" | "concave"
    holds: bool
    max_violation: float
    worst_index: float
    tolerance: float


@dataclass(frozen=True)
class TheoremChain:
    """One instance of the interpolation identities behind the main bound.

    k must be the (phi, 1-phi) combination of l and m, and gamma the
    (theta, 1-theta) combination of alpha and beta, exactly.
    """

    phi: float
    theta: float
    l: float
    m: float
    k: float
    gamma: float
    alpha: float
    beta: float
    sigma: float

    def __post_init__(self):
        if not (0 <= self.phi <= 1 and 0 <= self.theta <= 1):
            raise DomainError("phi and theta must lie in [0, 1]")
        k_err = abs(self.phi * self.l + (1 - self.phi) * self.m - self.k)
        g_err = abs(self.theta * self.alpha
                    + (1 - self.theta) * self.beta - self.gamma)
        if k_err > 1e-12 or g_err > 1e-12:
            raise DataError(
                f"chain identities broken: k error {k_err}, gamma error {g_err}")


@dataclass(frozen=True)
class UpperBoundReport:
    entries: Tuple[tuple, ...]  # (k, alpha, value, bound, half_width)
    flagged: Tuple[tuple, ...]
    strict: Tuple[tuple, ...]


@dataclass(frozen=True)
class RatioBracket:
    gamma: float
    ms: Tuple[float, ...]
    right_endpoints: Tuple[float, ...]
    left_endpoint: float
    extrapolated_limit: float
    agreement: float
    monotone: bool


@dataclass(frozen=True)
class TheoremPipelineReport:
    holds: bool
    concavity_in_k: Tuple[Tuple[float, SequenceReport], ...]
    convexity_in_alpha: Tuple[Tuple[float, SequenceReport], ...]
    violations: Tuple[tuple, ...]  # (axis, fixed coordinate, worst triple)
    prediction: Optional[Tuple[Tuple[float, float], ...]]
    ratio_brackets: Tuple[RatioBracket, ...]
    chains: Tuple[TheoremChain, ...]
    mu0: float
    sigma_L: float
    tolerance: float


def _second_differences(points):
    """Scaled divided second differences on consecutive triples.

    (x2-x1) = (x3-x2) = 1 reduces to the classical y1 - 2 y2 + y3.
    """
    pts = list(points)
    if len(pts) < 3:
        raise ConfigurationError("need at least 3 points")
    xs = [p[0] for p in pts]
    for a, b in zip(xs, xs[1:]):
        if b == a:
            raise DataError(f"duplicate index {a}")
        if b < a:
            raise ConfigurationError("indices must be strictly increasing")
    out = []
    for (x1, y1), (x2, y2), (x3, y3) in zip(pts, pts[1:], pts[2:]):
        d = ((y3 - y2) / (x3 - x2) - (y2 - y1) / (x2 - x1)) * (x3 - x1) / 2
        out.append(((x1, x2, x3), d))
    return out


def check_convexity_in_alpha(points, tol: float = 1e-12) -> SequenceReport:
    """holds iff every second difference >= -tol."""
    diffs = _second_differences(points)
    worst_triple, worst = min(diffs, key=lambda td: td[1])
    violation = max(0 * worst, -worst)
    return SequenceReport(points=tuple(tuple(p) for p in points),
                          property="convex",
                          holds=bool(violation <= tol),
                          max_violation=violation,
                          worst_index=worst_triple[1],
                          tolerance=tol)


def check_concavity_in_k(points, tol: float = 1e-12) -> SequenceReport:
    """holds iff successive differences are non-increasing within tol."""
    diffs = _second_differences(points)
    worst_triple, worst = max(diffs, key=lambda td: td[1])
    violation = max(0 * worst, worst)
    return SequenceReport(points=tuple(tuple(p) for p in points),
                          property="concave",
                          holds=bool(violation <= tol),
                          max_violation=violation,
                          worst_index=worst_triple[1],
                          tolerance=tol)


def predict_linear_mu(mu0, sigma_L, sigma_grid):
    """The line mu0 (1 - sigma/sigma_L), clamped to 0 past sigma_L."""
    if mu0 <= 0:
        raise DomainError(f"mu0 must be > 0, got {mu0}")
    if not (0 < sigma_L <= 1):
        raise DomainError(f"sigma_L must lie in (0, 1], got {sigma_L}")
    profile = []
    for sigma in sigma_grid:
        if sigma >= sigma_L:
            profile.append((sigma, 0 * mu0))
        else:
            profile.append((sigma, mu0 * (1 - sigma / sigma_L)))
    return tuple(profile)


def lindelof_form(k, alpha, mu0, sigma_L):
    """sigma_L (1 - alpha/(k mu0)) on the admissible wedge."""
    if mu0 <= 0 or sigma_L <= 0 or k <= 0:
        raise DomainError("k, mu0, sigma_L must all be > 0")
    if alpha <= 0 or alpha > k * mu0:
        raise DomainError(
            f"alpha must satisfy 0 < alpha <= k*mu0 = {k * mu0}, got {alpha}")
    return sigma_L * (1 - alpha / (k * mu0))


def upper_bound_check(estimates, mu0, sigma_L, tol: float = 0.0
                      ) -> UpperBoundReport:
    """Compare estimates against the Lindelof-form ceiling.

    Flags values above bound + half bracket width + tol; separately reports
    strict-inequality witnesses sitting below the bound by more than their
    full bracket width.
    """
    entries, flagged, strict = [], [], []
    for est in estimates:
        if est.alpha > 0:
            bound = lindelof_form(est.k, est.alpha, mu0, sigma_L)
        else:
            bound = sigma_L  # alpha -> 0 limit of the form
        lo, hi = est.bracket
        half = (hi - lo) / 2
        entry = (est.k, est.alpha, est.value, bound, half)
        entries.append(entry)
        if est.value > bound + half + tol:
            flagged.append(entry)
        elif bound - est.value > 2 * half:
            strict.append(entry)
    return UpperBoundReport(entries=tuple(entries), flagged=tuple(flagged),
                            strict=tuple(strict))


def _as_index(x):
    # exact midpoints for integer indices, floats otherwise
    if isinstance(x, int):
        return Fraction(x)
    return x


def _vacuous(points, prop, tol):
    pts = tuple(tuple(p) for p in points)
    worst = pts[0][0] if pts else 0.0
    return SequenceReport(points=pts, property=prop, holds=True,
                          max_violation=0.0, worst_index=worst, tolerance=tol)


def theorem_pipeline(abscissa_table, mu0, sigma_L, tol: float = 1e-12,
                     sigma_grid: Optional[Sequence] = None
                     ) -> TheoremPipelineReport:
    """Concavity/convexity gate, linear-mu prediction, and ratio brackets.

    abscissa_table maps (k, alpha) -> sigma value.  The prediction is only
    emitted when every sequence check holds; a failing check names the
    violating triple instead.  Axes with fewer than 3 admissible points
    pass vacuously, but cells missing inside the admissible wedge raise.
    """
    if mu0 <= 0 or sigma_L <= 0:
        raise DomainError("mu0 and sigma_L must be > 0")
    table = dict(abscissa_table)
    if not table:
        raise ConfigurationError("empty abscissa table")
    ks = sorted({k for k, _ in table})
    alphas = sorted({a for _, a in table})

    missing = [(k, a) for k in ks for a in alphas
               if a <= k * mu0 and (k, a) not in table]
    if missing:
        raise InsufficientCoverageError(
            f"admissible cells absent from table: {missing}")

    concavity, convexity, violations = [], [], []
    for a in alphas:
        pts = [(k, table[(k, a)]) for k in ks if a <= k * mu0]
        rep = (check_concavity_in_k(pts, tol) if len(pts) >= 3
               else _vacuous(pts, "concave", tol))
        concavity.append((a, rep))
        if not rep.holds:
            violations.append(("k", a, _worst_triple(pts, rep.worst_index)))
    for k in ks:
        pts = [(a, table[(k, a)]) for a in alphas if a <= k * mu0]
        rep = (check_convexity_in_alpha(pts, tol) if len(pts) >= 3
               else _vacuous(pts, "convex", tol))
        convexity.append((k, rep))
        if not rep.holds:
            violations.append(("alpha", k, _worst_triple(pts, rep.worst_index)))

    holds = not violations
    prediction = None
    if holds:
        if sigma_grid is None:
            sigma_grid = [sigma_L * Fraction(i, 10) for i in range(11)]
        prediction = predict_linear_mu(mu0, sigma_L, sigma_grid)

    left = -mu0 / sigma_L
    brackets, chains = [], []
    for gamma in alphas:
        valid = [(k, table[(k, gamma)]) for k in ks
                 if gamma <= k * mu0 and table[(k, gamma)] > 0]
        if len(valid) < 2:
            continue
        ms = tuple(m for m, _ in valid)
        rights = tuple(-mu0 / v for _, v in valid)
        monotone = all(b >= a for a, b in zip(rights, rights[1:]))
        (m1, v1), (m2, v2) = valid[-2], valid[-1]
        sigma_inf = (m2 * v2 - m1 * v1) / (m2 - m1)
        if sigma_inf > 0:
            limit = -mu0 / sigma_inf
            agreement = abs(limit - left)
        else:
            limit = float("-inf")
            agreement = float("inf")
        brackets.append(RatioBracket(gamma=gamma, ms=ms,
                                     right_endpoints=rights,
                                     left_endpoint=left,
                                     extrapolated_limit=limit,
                                     agreement=agreement, monotone=monotone))
        l, m = _as_index(ms[0]), _as_index(ms[-1])
        if m > l:
            k_mid = (l + m) / 2
            beta = k_mid * mu0
            theta = 1 - gamma / beta
            if 0 <= theta <= 1:
                chains.append(TheoremChain(
                    phi=(m - k_mid) / (m - l), theta=theta, l=l, m=m,
                    k=k_mid, gamma=gamma, alpha=0 * gamma, beta=beta,
                    sigma=theta * sigma_L))

    return TheoremPipelineReport(
        holds=holds, concavity_in_k=tuple(concavity),
        convexity_in_alpha=tuple(convexity), violations=tuple(violations),
        prediction=prediction, ratio_brackets=tuple(brackets),
        chains=tuple(chains), mu0=mu0, sigma_L=sigma_L, tolerance=tol)


def _worst_triple(pts, worst_center):
    xs = [p[0] for p in pts]
    i = xs.index(worst_center)
    return (xs[i - 1], xs[i], xs[i + 1])


def functional_equation_gap(series: SeriesSpec, sigma: float, t_grid,
                            mu0: float, floor: float = 1e-8,
                            return_excluded: bool = False):
    """Spread of |f(s)| / (t^{mu0(1-2 sigma)} |f(1-s)|) over the grid.

    A bounded spread witnesses the reflection-symmetry growth relation.
    Grid points where the reflected modulus is below floor are excluded
    from the spread and counted.
    """
    if series.kind != "eta":
        raise UnsupportedSeriesError(
            f"no reflection partner implemented for kind={series.kind!r}")
    if not (0.0 < sigma <= 0.5):
        raise DomainError(f"sigma must lie in (0, 1/2], got {sigma}")
    t = np.asarray([float(x) for x in t_grid], dtype=float)
    if len(t) == 0 or t[0] <= 0.0 or np.any(np.diff(t) <= 0.0):
        raise ConfigurationError("t_grid must be positive and increasing")
    upper, _ = evaluate_batch(series, sigma, t)
    lower, _ = evaluate_batch(series, 1.0 - sigma, -t)
    den = np.abs(lower)
    keep = den >= floor
    excluded = int((~keep).sum())
    if int(keep.sum()) == 0:
        raise DataError("reflected modulus below floor on the whole grid")
    ratio = np.abs(upper[keep]) / (t[keep] ** (mu0 * (1.0 - 2.0 * sigma))
                                   * den[keep])
    spread = float(ratio.max() / ratio.min())
    if return_excluded:
        return spread, excluded
    return spread
