"""Ordinary Dirichlet series: specifications, coefficients, and strip evaluation.

A series is sum_{n>=1} c_n n^{-s}.  Four kinds are supported:

* ``eta``        c_n = (-1)^(n-1), the alternating unit series,
* ``character``  c_n = chi(n) for a Dirichlet character mod q (indexed, see below),
* ``polynomial`` finitely many coefficients, zero beyond the last,
* ``custom``     coefficients from a user callback (memoized, so repeated access
                 is deterministic even for randomized callbacks).

Evaluation strategy per kind:

* polynomial: direct summation (entire function, exact up to rounding).
* eta / character: Euler-Maclaurin on the periodic coefficient blocks.  Writing
  f(s) = sum_a c_a P^{-s} zeta(s, a/P) over residues a = 1..P, each Hurwitz tail
  past N blocks contributes a pole term, a half term, and Bernoulli corrections.
  For zero-mean periods (eta, non-principal characters) the pole terms are
  combined through expm1 so the evaluation stays finite and stable through s = 1;
  the formula analytically continues to any sigma, so points like s = 0 are fine.
  The truncation bound is the standard first-omitted-term bound; the term budget
  (default 10*(|t|+10)) caps the direct block count.
* custom: first-order log-smoothed partial sums at two cutoffs x and x^2 with
  Richardson extrapolation in 1/log x; valid for s.sigma > sigma_c, which is why
  custom specs must declare their abscissae (declared values are trusted, never
  verified numerically).

Uniform t-grids are evaluated with a blocked phase-matrix product (two thin
complex exponential matrices and one GEMM) instead of a full outer product;
this is what makes long moment scans affordable on one core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    AccuracyError,
    CoefficientOverflowError,
    ConfigurationError,
    DomainError,
)

__all__ = [
    "ComplexPoint",
    "SeriesSpec",
    "PowerCoefficients",
    "eta_series",
    "character_series",
    "polynomial_series",
    "custom_series",
    "coefficients",
    "exact_coefficients",
    "power_coefficients",
    "dirichlet_convolve",
    "evaluate",
    "evaluate_batch",
    "evaluate_power",
    "has_real_coefficients",
    "canonical_label",
    "default_term_budget",
]

FLOAT_OVERFLOW_LIMIT = 1e300
POWER_TABLE_CAP = 100_000


@dataclass(frozen=True)
class ComplexPoint:
    """A point sigma + i*t in the complex plane."""

    sigma: float
    t: float

    def as_complex(self) -> complex:
        return complex(self.sigma, self.t)


@dataclass(eq=False)
class SeriesSpec:
    """Declared description of one Dirichlet series.

    sigma_c / sigma_a are the declared convergence and absolute-convergence
    abscissae.  They are taken on trust (used for domain checks and tail
    bounds), never verified numerically.  mu0_hint / sigma_L_hint optionally
    declare the growth exponent at sigma=0 and the abscissa where growth dies;
    estimators use them only for domain preconditions when present.
    """

    kind: str
    sigma_c: float
    sigma_a: float
    mu0_hint: Optional[float] = None
    sigma_L_hint: Optional[float] = None
    modulus: Optional[int] = None
    char_index: Optional[int] = None
    poly_coeffs: Optional[tuple] = None
    coeff_fn: Optional[Callable[[int], complex]] = None
    label: Optional[str] = None
    _memo: dict = field(default_factory=dict, repr=False)


def eta_series(mu0_hint: Optional[float] = None,
               sigma_L_hint: Optional[float] = None) -> SeriesSpec:
    return SeriesSpec(kind="eta", sigma_c=0.0, sigma_a=1.0,
                      mu0_hint=mu0_hint, sigma_L_hint=sigma_L_hint)


def character_series(modulus: int, index: int,
                     mu0_hint: Optional[float] = None,
                     sigma_L_hint: Optional[float] = None) -> SeriesSpec:
    values = character_values(modulus, index)
    principal = all(abs(v - 1.0) < 1e-14 for v in values if v != 0)
    return SeriesSpec(kind="character",
                      sigma_c=1.0 if principal else 0.0,
                      sigma_a=1.0,
                      mu0_hint=mu0_hint, sigma_L_hint=sigma_L_hint,
                      modulus=modulus, char_index=index)


def polynomial_series(coeffs: Sequence[complex]) -> SeriesSpec:
    if len(coeffs) == 0:
        raise ConfigurationError("polynomial series needs at least one coefficient")
    return SeriesSpec(kind="polynomial", sigma_c=0.0, sigma_a=0.0,
                      poly_coeffs=tuple(coeffs))


def custom_series(coeff_fn: Callable[[int], complex],
                  sigma_c: float, sigma_a: float,
                  mu0_hint: Optional[float] = None,
                  sigma_L_hint: Optional[float] = None,
                  label: Optional[str] = None) -> SeriesSpec:
    return SeriesSpec(kind="custom", sigma_c=sigma_c, sigma_a=sigma_a,
                      mu0_hint=mu0_hint, sigma_L_hint=sigma_L_hint,
                      coeff_fn=coeff_fn, label=label)


# ----------------------------------------------------------------------------
# Dirichlet characters mod q.
#
# The unit group (Z/q)^* is decomposed into cyclic components with fixed
# generators: for q divisible by 8 the two-part is <-1> x <5>; for 4 || q it is
# <q-1>; odd prime powers p^e contribute the smallest primitive root of p
# lifted to p^e.  Components are ordered [two-part first, then odd primes
# ascending] and a character index j in [0, phi(q)) is read as little-endian
# mixed-radix digits over the component orders.  Index 0 is always the
# principal character; for prime q the nonprincipal characters follow in
# generator-power order (q=3: index 1 is the quadratic character 1,-1,0,...).
# ----------------------------------------------------------------------------


def _factorize(q: int) -> list:
    out = []
    d = 2
    while d * d <= q:
        if q % d == 0:
            e = 0
            while q % d == 0:
                q //= d
                e += 1
            out.append((d, e))
        d += 1
    if q > 1:
        out.append((q, 1))
    return out


def _primitive_root_mod_p(p: int) -> int:
    if p == 2:
        return 1
    phi = p - 1
    prime_factors = [f for f, _ in _factorize(phi)]
    for g in range(2, p):
        if all(pow(g, phi // f, p) != 1 for f in prime_factors):
            return g
    raise ConfigurationError(f"no primitive root found for prime {p}")


def _primitive_root_mod_pe(p: int, e: int) -> int:
    g = _primitive_root_mod_p(p)
    if e == 1:
        return g
    # g lifts to p^e unless g^(p-1) == 1 mod p^2, in which case g+p does
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _unit_group_components(q: int) -> list:
    """[(generator, order), ...] for (Z/q)^* in the documented fixed order."""
    comps = []
    for p, e in _factorize(q):
        if p == 2:
            if e == 2:
                comps.append((q_part_gen(q, 4, 3), 2))
            elif e >= 3:
                two = 2 ** e
                comps.append((q_part_gen(q, two, two - 1), 2))
                comps.append((q_part_gen(q, two, 5), 2 ** (e - 2)))
        else:
            pe = p ** e
            comps.append((q_part_gen(q, pe, _primitive_root_mod_pe(p, e)),
                          pe - p ** (e - 1)))
    return comps


def q_part_gen(q: int, q_part: int, gen_mod_part: int) -> int:
    """Lift a generator of the q_part component to a residue mod q by CRT."""
    other = q // q_part
    if other == 1:
        return gen_mod_part % q
    # x = gen mod q_part, x = 1 mod other
    inv = pow(other % q_part, -1, q_part) if q_part > 1 else 0
    x = (1 + other * ((gen_mod_part - 1) * inv % q_part)) % q
    return x


@lru_cache(maxsize=256)
def character_values(modulus: int, index: int) -> tuple:
    """chi(1..q) for the index-th character mod q (0 = principal)."""
    if modulus < 1:
        raise ConfigurationError(f"modulus must be >= 1, got {modulus}")
    if modulus == 1:
        if index != 0:
            raise ConfigurationError("modulus 1 has a single character, index 0")
        return (1.0 + 0.0j,)
    comps = _unit_group_components(modulus)
    orders = [d for _, d in comps]
    phi = 1
    for d in orders:
        phi *= d
    if not (0 <= index < phi):
        raise ConfigurationError(
            f"character index {index} out of range for modulus {modulus} "
            f"(valid: 0..{phi - 1})")
    digits = []
    j = index
    for d in orders:
        digits.append(j % d)
        j //= d
    # exponent tuple of every unit, by walking the component generators
    exps = {1: tuple(0 for _ in comps)}
    frontier = [1]
    for ci, (g, d) in enumerate(comps):
        new = {}
        for n, e in exps.items():
            acc = n
            for power in range(1, d):
                acc = (acc * g) % modulus
                ee = list(e)
                ee[ci] = power
                new[acc] = tuple(ee)
        exps.update(new)
    values = []
    for n in range(1, modulus + 1):
        if math.gcd(n, modulus) != 1:
            values.append(0.0 + 0.0j)
            continue
        e = exps[n % modulus]
        angle = 2.0 * math.pi * sum(
            digits[i] * e[i] / orders[i] for i in range(len(comps)))
        v = complex(math.cos(angle), math.sin(angle))
        # snap exact lattice values so real characters are exactly integer
        for target in (1.0, -1.0, 0.0):
            if abs(v.real - target) < 1e-12:
                v = complex(target, v.imag)
            if abs(v.imag - target) < 1e-12:
                v = complex(v.real, target)
        values.append(v)
    return tuple(values)


# ----------------------------------------------------------------------------
# Coefficients and Dirichlet convolution.
# ----------------------------------------------------------------------------


def period_coefficients(series: SeriesSpec) -> Optional[np.ndarray]:
    """One period of coefficients for periodic kinds, else None."""
    if series.kind == "eta":
        return np.array([1.0, -1.0], dtype=complex)
    if series.kind == "character":
        return np.array(character_values(series.modulus, series.char_index),
                        dtype=complex)
    return None


def coefficients(series: SeriesSpec, n_max: int) -> np.ndarray:
    """First n_max coefficients as complex128, index i holding c_{i+1}."""
    if n_max < 0:
        raise ConfigurationError(f"n_max must be >= 0, got {n_max}")
    if series.kind in ("eta", "character"):
        period = period_coefficients(series)
        reps = -(-n_max // len(period))
        return np.tile(period, reps)[:n_max].copy()
    if series.kind == "polynomial":
        out = np.zeros(n_max, dtype=complex)
        upto = min(n_max, len(series.poly_coeffs))
        out[:upto] = series.poly_coeffs[:upto]
        return out
    if series.kind == "custom":
        memo = series._memo.setdefault("coeffs", [])
        while len(memo) < n_max:
            memo.append(complex(series.coeff_fn(len(memo) + 1)))
        return np.array(memo[:n_max], dtype=complex)
    raise ConfigurationError(f"unknown series kind {series.kind!r}")


def exact_coefficients(series: SeriesSpec, n_max: int) -> Optional[list]:
    """First n_max coefficients as Python ints when exactly integral, else None."""
    if series.kind == "eta":
        return [1 if n % 2 == 1 else -1 for n in range(1, n_max + 1)]
    if series.kind == "polynomial":
        if all(isinstance(c, (int, np.integer)) for c in series.poly_coeffs):
            vals = list(series.poly_coeffs) + [0] * n_max
            return [int(v) for v in vals[:n_max]]
        return None
    if series.kind == "character":
        vals = coefficients(series, n_max)
        if np.all(vals.imag == 0.0) and np.all(vals.real == np.round(vals.real)):
            return [int(v) for v in vals.real]
        return None
    return None


@dataclass(frozen=True)
class PowerCoefficients:
    """Coefficient table of the k-th power of a series under Dirichlet convolution."""

    k: int
    n_max: int
    values: np.ndarray
    exact: Optional[tuple] = None


def dirichlet_convolve(a: Sequence, b: Sequence) -> list:
    """Dirichlet convolution of two coefficient lists (index i holds c_{i+1}).

    Works on Python ints (exact) and floats/complex alike; output length is
    min(len(a), len(b)).
    """
    n = min(len(a), len(b))
    out = [0] * n
    for d in range(1, n + 1):
        ad = a[d - 1]
        if ad == 0:
            continue
        for m in range(d, n + 1, d):
            out[m - 1] += ad * b[m // d - 1]
    return out


def power_coefficients(series: SeriesSpec, k: int, n_max: int,
                       cap: int = POWER_TABLE_CAP) -> PowerCoefficients:
    """Coefficients of f^k by iterated exact-or-float Dirichlet convolution."""
    if k < 1:
        raise ConfigurationError(f"power k must be >= 1, got {k}")
    if n_max < 1:
        raise ConfigurationError(f"n_max must be >= 1, got {n_max}")
    if n_max > cap:
        raise ConfigurationError(
            f"n_max={n_max} exceeds the table cap {cap}; pass cap=n_max to override")
    exact = exact_coefficients(series, n_max)
    if exact is not None:
        table = exact
        for _ in range(k - 1):
            table = dirichlet_convolve(table, exact)
        if any(abs(v) > FLOAT_OVERFLOW_LIMIT for v in table):
            raise CoefficientOverflowError(
                f"power-{k} coefficients exceed representable magnitude")
        values = np.array(table, dtype=complex)
        return PowerCoefficients(k=k, n_max=n_max, values=values,
                                 exact=tuple(table))
    base = list(coefficients(series, n_max))
    table = base
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(k - 1):
            table = dirichlet_convolve(table, base)
        arr = np.array(table, dtype=complex)
    if not np.all(np.isfinite(arr)) or np.any(np.abs(arr) > FLOAT_OVERFLOW_LIMIT):
        raise CoefficientOverflowError(
            f"power-{k} coefficients overflow double precision")
    return PowerCoefficients(k=k, n_max=n_max, values=arr, exact=None)


def has_real_coefficients(series: SeriesSpec) -> bool:
    if series.kind == "eta":
        return True
    if series.kind == "character":
        return bool(np.all(period_coefficients(series).imag == 0.0))
    if series.kind == "polynomial":
        return all(complex(c).imag == 0.0 for c in series.poly_coeffs)
    if series.kind == "custom":
        probe = coefficients(series, min(64, max(1, int(series._memo.get("probe", 64)))))
        return bool(np.all(probe.imag == 0.0))
    return False


def canonical_label(series: SeriesSpec) -> Optional[str]:
    """Stable descriptor string used in cache keys; None disables caching."""
    if series.kind == "eta":
        return "eta"
    if series.kind == "character":
        return f"character({series.modulus},{series.char_index})"
    if series.kind == "polynomial":
        parts = []
        for c in series.poly_coeffs:
            z = complex(c)
            parts.append("%.12g" % z.real if z.imag == 0.0
                         else "%.12g%+.12gj" % (z.real, z.imag))
        return "polynomial(" + ",".join(parts) + ")"
    if series.kind == "custom":
        return f"custom({series.label})" if series.label else None
    return None


# ----------------------------------------------------------------------------
# Euler-Maclaurin evaluation of periodic-coefficient series.
# ----------------------------------------------------------------------------

_EM_MAX_PAIRS = 30

def _bernoulli_tables():
    import mpmath
    with mpmath.workdps(40):
        coef = [float(mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k))
                for k in range(1, _EM_MAX_PAIRS + 2)]
        logabs = [float(mpmath.log(abs(mpmath.bernoulli(2 * k))))
                  for k in range(1, _EM_MAX_PAIRS + 2)]
    return coef, logabs

_B2K_OVER_FACT, _LOG_ABS_B2K = _bernoulli_tables()


def default_term_budget(t_max: float) -> int:
    return int(10.0 * (abs(t_max) + 10.0))


def _em_log_error(sigma: float, t_max: float, N: int, x_min: float, M: int) -> float:
    """log of the first-omitted-term truncation bound for M Bernoulli pairs."""
    base = N + x_min
    lg = _LOG_ABS_B2K[M] - math.lgamma(2 * M + 3)
    lg += 0.5 * sum(math.log(max((sigma + j) ** 2 + t_max * t_max, 1e-300))
                    for j in range(0, 2 * M + 1))
    lg += (-sigma - 2 * M - 1) * math.log(base)
    lg += math.log((abs(sigma + 2 * M + 1) + t_max) / abs(sigma + 2 * M + 1))
    return lg


def _em_choose_parameters(sigma, t_max, P, coeff_abs_sum, tol, budget):
    """Pick (N, M, bound) meeting tol within the term budget, or best effort."""
    n_limit = max(8, budget // P)
    N = min(n_limit, max(16, int(0.30 * t_max) + 24))
    prefactor = math.log(max(coeff_abs_sum, 1e-300)) - sigma * math.log(P)
    while True:
        best = None
        for M in range(3, _EM_MAX_PAIRS + 1):
            lg = prefactor + _em_log_error(sigma, t_max, N, 1.0 / P, M)
            if best is None or lg < best[1]:
                best = (M, lg)
            if lg < math.log(max(tol, 1e-300)) - math.log(4.0):
                return N, M, math.exp(lg)
        if N >= n_limit:
            M, lg = best
            return N, M, math.exp(min(lg, 700.0))
        N = min(n_limit, int(N * 1.5) + 1)


def _phase_power_sum_uniform(log_n, weights, t0, h, J):
    """sum_m w_m exp(-i t_j log_n_m) for t_j = t0 + j h, via blocked GEMM."""
    w0 = weights * np.exp(-1j * t0 * log_n)
    Q = max(1, int(math.ceil(math.sqrt(J))))
    nq = (J + Q - 1) // Q
    inner = np.exp(-1j * h * np.outer(np.arange(Q), log_n))
    outer = np.exp(-1j * (h * Q) * np.outer(np.arange(nq), log_n))
    M = (inner * w0) @ outer.T
    return np.ascontiguousarray(M.T).ravel()[:J]


def _phase_power_sum_general(log_n, weights, t):
    out = np.empty(len(t), dtype=complex)
    chunk = max(1, int(4_000_000 // max(1, len(log_n))))
    for i in range(0, len(t), chunk):
        block = np.exp(np.outer(-1j * t[i:i + chunk], log_n))
        out[i:i + chunk] = block @ weights
    return out


def _uniform_step(t: np.ndarray):
    if len(t) < 2:
        return None
    h = (t[-1] - t[0]) / (len(t) - 1)
    if h == 0.0:
        return None
    if np.max(np.abs(np.diff(t) - h)) <= 1e-9 * abs(h):
        return h
    return None


def _power_sum(log_n, weights, t):
    h = _uniform_step(t)
    if h is not None and len(t) >= 192:
        return _phase_power_sum_uniform(log_n, weights, t[0], h, len(t))
    return _phase_power_sum_general(log_n, weights, t)


def _pole_ratio(s: np.ndarray, L: float) -> np.ndarray:
    """expm1((1-s)L)/(s-1), stable through s = 1 (series branch for small args)."""
    w = (1.0 - s) * L
    small = np.abs(w) < 1e-4
    out = np.empty_like(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~small] = np.expm1(w[~small]) / (s[~small] - 1.0)
    ws = w[small]
    out[small] = -L * (1.0 + ws / 2.0 + ws * ws / 6.0 + ws ** 3 / 24.0)
    return out


def _periodic_em_batch(period: np.ndarray, sigma: float, t: np.ndarray,
                       tol: float, budget: Optional[int]):
    """Evaluate a periodic-coefficient series at sigma + i*t (vectorized).

    Returns (values, bound) where bound is a worst-case absolute error bound
    across the batch (truncation plus a rounding floor).
    """
    P = len(period)
    t = np.asarray(t, dtype=float)
    t_max = float(np.max(np.abs(t))) if len(t) else 0.0
    if budget is None:
        budget = default_term_budget(t_max)
    coeff_abs_sum = float(np.sum(np.abs(period)))
    N, M, trunc_bound = _em_choose_parameters(
        sigma, t_max, P, coeff_abs_sum, tol, budget)

    s = sigma + 1j * t
    n_direct = N * P
    n_idx = np.arange(1, n_direct + 1)
    log_n = np.log(n_idx.astype(float))
    c_direct = np.tile(period, N)
    w = c_direct * np.exp(-sigma * log_n)
    values = _power_sum(log_n, w, t)

    mean = np.sum(period)
    zero_mean = abs(mean) <= 1e-14 * max(coeff_abs_sum, 1.0)
    p_pow = np.exp(-s * math.log(P)) if P > 1 else np.ones_like(s)
    R = float(N + 1)

    if zero_mean:
        pole = np.zeros_like(s)
        for a in range(1, P + 1):
            ca = period[a - 1]
            if ca == 0:
                continue
            L = math.log((N + a / P) / R)
            pole += ca * _pole_ratio(s, L)
        values += p_pow * np.exp((1.0 - s) * math.log(R)) * pole
    else:
        acc = np.zeros_like(s)
        for a in range(1, P + 1):
            ca = period[a - 1]
            if ca == 0:
                continue
            acc += ca * np.exp((1.0 - s) * math.log(N + a / P))
        with np.errstate(divide="ignore", invalid="ignore"):
            values += p_pow * acc / (s - 1.0)

    for a in range(1, P + 1):
        ca = period[a - 1]
        if ca == 0:
            continue
        base = N + a / P
        lb = math.log(base)
        base_pow = np.exp(-s * lb)          # base^{-s}
        values += p_pow * ca * 0.5 * base_pow
        u = s / base
        bern = np.zeros_like(s)
        for k in range(1, M + 1):
            bern += _B2K_OVER_FACT[k - 1] * u
            if k < M:
                u = u * ((s + (2 * k - 1)) * (s + 2 * k)) / (base * base)
        values += p_pow * ca * bern * base_pow

    rounding_floor = 4e-16 * (float(np.sum(np.abs(w))) + 1.0)
    return values, max(trunc_bound, rounding_floor)


def _polynomial_batch(series: SeriesSpec, sigma: float, t: np.ndarray):
    coeffs = np.array(series.poly_coeffs, dtype=complex)
    n_idx = np.arange(1, len(coeffs) + 1)
    log_n = np.log(n_idx.astype(float))
    w = coeffs * np.exp(-sigma * log_n)
    vals = _power_sum(log_n, w, np.asarray(t, dtype=float))
    bound = 4e-16 * (float(np.sum(np.abs(w))) + 1.0)
    return vals, bound


def _custom_batch(series: SeriesSpec, sigma: float, t: np.ndarray,
                  tol: float, budget: Optional[int]):
    """Log-smoothed partial sums with Richardson extrapolation in 1/log x.

    A(x) = sum_{n<=x} (1 - log n/log x) c_n n^{-s} has error ~ C/log x for
    sigma > sigma_c; with cutoffs x0, x0^2, x0^4 the two-point extrapolants
    R = 2 A(x^2) - A(x) cancel the leading term, and the spread between the
    coarse and fine extrapolants estimates what remains.
    """
    if sigma <= series.sigma_c:
        raise DomainError(
            f"custom-series evaluation needs sigma > declared sigma_c="
            f"{series.sigma_c}, got sigma={sigma}")
    t = np.asarray(t, dtype=float)
    t_max = float(np.max(np.abs(t))) if len(t) else 0.0
    if budget is None:
        # smoothed cutoffs converge like 1/log x: the default here has to be
        # much deeper than the periodic-series budget to reach useful tol
        budget = max(200_000, default_term_budget(t_max))
    x0 = max(3, math.isqrt(math.isqrt(max(81, budget))))
    x1 = x0 * x0
    x2 = x1 * x1
    c = coefficients(series, x2)
    n_idx = np.arange(1, x2 + 1, dtype=float)
    log_n = np.log(n_idx)
    base_w = c * np.exp(-sigma * log_n)
    floor = 4e-16 * (float(np.sum(np.abs(base_w))) + 1.0)

    if sigma > series.sigma_a:
        # absolutely convergent: plain truncation with dyadic-block ratio
        # extrapolation beats the smoothed route by orders of magnitude
        direct = _direct_tail_batch(log_n, base_w, t, x2, floor)
        if direct is not None:
            values, bound = direct
            if bound <= tol:
                return values, bound

    log_w = base_w * log_n

    def smoothed(x):
        return (_power_sum(log_n[:x], base_w[:x], t)
                - _power_sum(log_n[:x], log_w[:x], t) / math.log(x))

    A0, A1, A2 = smoothed(x0), smoothed(x1), smoothed(x2)
    fine = 2.0 * A2 - A1
    coarse = 2.0 * A1 - A0
    values = fine
    bound = float(np.max(np.abs(fine - coarse))) / 2.0 if len(t) else 0.0
    bound = max(bound, floor)
    return values, bound


def _direct_tail_batch(log_n, base_w, t, n_cut, floor):
    """Partial sums at n_cut/4, n_cut/2, n_cut with measured block decay.

    Tail estimated by geometric extrapolation of the last two dyadic blocks;
    returns None when the decay ratio is too close to 1 to trust.
    """
    q = n_cut // 4
    if q < 8:
        return None
    s1 = _power_sum(log_n[:q], base_w[:q], t)
    s2 = _power_sum(log_n[q:2 * q], base_w[q:2 * q], t) + s1
    s3 = _power_sum(log_n[2 * q:n_cut], base_w[2 * q:n_cut], t) + s2
    b1 = float(np.max(np.abs(s2 - s1))) if len(t) else 0.0
    b2 = float(np.max(np.abs(s3 - s2))) if len(t) else 0.0
    if b2 <= floor:
        return s3, floor
    if b1 <= 0.0:
        return None
    r = b2 / b1
    if r >= 0.8:
        return None
    return s3, b2 * r / (1.0 - r) + floor


def evaluate_batch(series: SeriesSpec, sigma: float, t,
                   tol: float = 1e-8, term_budget: Optional[int] = None):
    """Values of the series at sigma + i*t for a whole array of t.

    Returns (values, bound); bound is one worst-case absolute error bound for
    the batch.  Raises AccuracyError (carrying the best estimate and its bound)
    when tol cannot be met inside the term budget.
    """
    if tol <= 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if series.kind == "polynomial":
        values, bound = _polynomial_batch(series, sigma, t)
    elif series.kind in ("eta", "character"):
        values, bound = _periodic_em_batch(
            period_coefficients(series), sigma, t, tol, term_budget)
    elif series.kind == "custom":
        values, bound = _custom_batch(series, sigma, t, tol, term_budget)
    else:
        raise ConfigurationError(f"unknown series kind {series.kind!r}")
    if bound > tol:
        raise AccuracyError(
            f"requested tol={tol:g} unattainable within term budget "
            f"(achieved bound {bound:g} for {series.kind} at sigma={sigma:g}, "
            f"|t|<={float(np.max(np.abs(t))) if len(t) else 0:g})",
            estimate=values, bound=bound)
    return values, bound


def evaluate(series: SeriesSpec, s, tol: float = 1e-10,
             term_budget: Optional[int] = None) -> complex:
    """Value of the series at a single point s (ComplexPoint or complex)."""
    if isinstance(s, ComplexPoint):
        z = s.as_complex()
    else:
        z = complex(s)
    values, _ = evaluate_batch(series, z.real, np.array([z.imag]),
                               tol=tol, term_budget=term_budget)
    return complex(values[0])


def evaluate_power(series: SeriesSpec, k: int, s, tol: float = 1e-10,
                   term_budget: Optional[int] = None) -> complex:
    """Value of f(s)^k with the inner tolerance tightened so the power meets tol.

    |z^k - (z+e)^k| <= k (|z|+|e|)^(k-1) |e|, so the base evaluation runs at
    tol / (k * max(1,|z|)^(k-1)) after a first pass sizes |z|.
    """
    if k < 1:
        raise ConfigurationError(f"power k must be >= 1, got {k}")
    z0 = evaluate(series, s, tol=max(tol, 1e-8), term_budget=term_budget)
    if k == 1:
        if tol < 1e-8:
            z0 = evaluate(series, s, tol=tol, term_budget=term_budget)
        return z0
    scale = k * max(1.0, abs(z0) + 1.0) ** (k - 1)
    z = evaluate(series, s, tol=tol / scale, term_budget=term_budget)
    return z ** k
