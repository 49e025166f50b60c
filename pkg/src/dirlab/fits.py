"""Log-log power-law fitting and upper-envelope growth estimation.

Two fitting modes are used across the package:

* plain least squares on (log x, log y), for quantities that are genuinely
  smooth in aggregate (cumulative moments against the cutoff T);
* envelope fitting for limsup-type growth exponents: oscillating data is
  reduced to its running-maximum record points first, so valleys of |f| do
  not drag the fitted slope down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateDataError

__all__ = ["GrowthFit", "growth_exponent", "envelope_growth_fit"]


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares fit value ~ exp(log_coeff) * x^exponent.

    residual is the root-mean-square residual of the log-log fit and n_points
    the number of points actually fitted (always >= 3).
    """

    exponent: float
    log_coeff: float
    residual: float
    n_points: int


def _fit_loglog(log_x: np.ndarray, log_y: np.ndarray) -> GrowthFit:
    if len(log_x) < 3:
        raise DataError(f"growth fit needs >= 3 samples, got {len(log_x)}")
    if len(set(map(float, log_x))) < 2:
        raise DataError("growth fit needs at least two distinct x values")
    slope, intercept = np.polyfit(log_x, log_y, 1)
    resid = log_y - (slope * log_x + intercept)
    rms = float(np.sqrt(np.mean(resid * resid)))
    return GrowthFit(exponent=float(slope), log_coeff=float(intercept),
                     residual=rms, n_points=len(log_x))


def growth_exponent(samples) -> GrowthFit:
    """Fit a power law to (x, value) pairs; values must be strictly positive."""
    pts = [(float(x), float(v)) for x, v in samples]
    if len(pts) < 3:
        raise DataError(f"growth fit needs >= 3 samples, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(xs <= 0.0):
        raise DataError("growth fit needs positive x values")
    if np.any(vs <= 0.0):
        raise DataError("growth fit needs positive sample values")
    return _fit_loglog(np.log(xs), np.log(vs))


def envelope_growth_fit(x, values) -> GrowthFit:
    """Fit the upper envelope of |values| against x on a log-log scale.

    Record points (strict running-maximum increases) carry the limsup
    information; the last grid point is appended at the running-max level so a
    flat envelope still spans the grid.  If fewer than 3 records exist the fit
    falls back to the full running-maximum staircase, which keeps the fit
    defined for bounded data (slope ~ 0) without inventing points.
    """
    x = np.asarray(x, dtype=float)
    v = np.abs(np.asarray(values))
    if len(x) != len(v):
        raise DataError("x and values must have equal length")
    if len(x) < 3:
        raise DataError(f"envelope fit needs >= 3 samples, got {len(x)}")
    if np.any(x <= 0.0):
        raise DataError("envelope fit needs positive x values")
    if np.any(np.diff(x) <= 0.0):
        raise DataError("envelope fit needs strictly increasing x")
    if np.all(v == 0.0):
        raise DegenerateDataError("all sample values are zero; no envelope to fit")

    running = np.maximum.accumulate(v)
    record = v >= running
    record &= v > 0.0
    # strictness: only the first point attaining each maximum counts as a record
    strict = np.zeros(len(v), dtype=bool)
    best = 0.0
    for i, val in enumerate(v):
        if val > best:
            strict[i] = True
            best = val
    idx = np.flatnonzero(strict)
    pts_x = list(x[idx])
    pts_v = list(v[idx])
    if len(idx) == 0 or idx[-1] != len(v) - 1:
        pts_x.append(x[-1])
        pts_v.append(running[-1])
    if len(pts_x) < 3:
        keep = running > 0.0
        pts_x = list(x[keep])
        pts_v = list(running[keep])
    if len(pts_x) < 3:
        raise DegenerateDataError("not enough nonzero envelope points to fit")
    return _fit_loglog(np.log(np.array(pts_x)), np.log(np.array(pts_v)))
