"""Command line front end.

dirlab <subcommand> [--config FILE] [flags]

Subcommands: eval, moments, abscissa, mu, parseval, diagnose, accept.
A JSON config file supplies defaults; explicit flags override it key by
key (flag --sigma-grid reads config key "sigma_grid"). Exit codes:
0 success, 1 validation error, 2 compute error, 3 acceptance failure.
"""

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import abscissa as absc
from . import diagnostics, moments, reporting, series
from .cache import ScanCache, canonical_key
from .errors import (
    BracketNotFoundError,
    ConfigurationError,
    DirlabError,
    DomainError,
    InsufficientCoverageError,
    UnsupportedSeriesError,
)

__all__ = ["main", "build_series", "parse_grid"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_COMPUTE = 2
EXIT_ACCEPTANCE = 3


# ----------------------------------------------------------------------------
# argument plumbing


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through the validation path instead
    def error(self, message):
        raise ConfigurationError(message)


def parse_grid(text) -> list:
    """Comma list of floats, or geom:lo,hi,n / lin:lo,hi,n expanders."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text).strip()
    for prefix, fn in (("geom:", np.geomspace), ("lin:", np.linspace)):
        if text.startswith(prefix):
            parts = text[len(prefix):].split(",")
            if len(parts) != 3:
                raise ConfigurationError(
                    f"{prefix}lo,hi,n takes exactly 3 values, got {text!r}")
            lo, hi, n = float(parts[0]), float(parts[1]), int(float(parts[2]))
            return [float(x) for x in fn(lo, hi, n)]
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError as exc:
        raise ConfigurationError(f"bad numeric list {text!r}: {exc}") from None


def _parse_exact(text):
    """Fraction when written as p/q, float otherwise."""
    s = str(text).strip()
    if "/" in s:
        return Fraction(s)
    return float(s)


def _parse_exact_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [_parse_exact(x) for x in text]
    return [_parse_exact(x) for x in str(text).split(",") if x != ""]


def build_series(descriptor: str, mu0_hint=None, sigma_L_hint=None):
    """eta | character:q,j | poly:c1,c2,... with optional growth hints."""
    if not descriptor:
        raise ConfigurationError("no series given (flag --series or config key)")
    desc = str(descriptor).strip()
    if desc == "eta":
        return series.eta_series(mu0_hint=mu0_hint, sigma_L_hint=sigma_L_hint)
    if desc.startswith("character:"):
        parts = desc[len("character:"):].split(",")
        if len(parts) != 2:
            raise ConfigurationError(
                f"character descriptor needs modulus,index: {desc!r}")
        return series.character_series(int(parts[0]), int(parts[1]),
                                       mu0_hint=mu0_hint,
                                       sigma_L_hint=sigma_L_hint)
    if desc.startswith(("poly:", "polynomial:")):
        body = desc.split(":", 1)[1]
        try:
            coeffs = [complex(x) for x in body.split(",") if x != ""]
        except ValueError as exc:
            raise ConfigurationError(f"bad coefficient in {desc!r}: {exc}") from None
        return series.polynomial_series(coeffs)
    raise ConfigurationError(
        f"unknown series descriptor {desc!r} "
        "(expected eta, character:q,j or poly:c1,c2,...)")


class _Options:
    """Flag-over-config resolution; every lookup records its source key."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = vars(args)
        self.config = config

    def get(self, key: str, default=None, required: bool = False):
        v = self.args.get(key)
        if v is None:
            v = self.config.get(key, default)
        if v is None and required:
            raise ConfigurationError(
                f"missing required option --{key.replace('_', '-')} "
                f"(or config key {key!r})")
        return v


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except ValueError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return cfg


def _series_from(opt: _Options):
    return build_series(opt.get("series", required=True),
                        mu0_hint=opt.get("mu0_hint"),
                        sigma_L_hint=opt.get("sigma_l_hint"))


def _cache_from(opt: _Options) -> ScanCache:
    return ScanCache(opt.get("cache_dir"))


def _emit(path, columns, rows):
    if path:
        reporting.write_csv(path, columns, rows)
    else:
        writerow = lambda vals: print(",".join(str(v) for v in vals))
        writerow(columns)
        for row in rows:
            writerow(reporting._fmt(row.get(c)) for c in columns)


# ----------------------------------------------------------------------------
# subcommands


def _cmd_eval(opt: _Options) -> int:
    spec = _series_from(opt)
    sigma = float(opt.get("sigma", required=True))
    t = float(opt.get("t", 0.0))
    tol = float(opt.get("tol", 1e-10))
    value = series.evaluate(spec, complex(sigma, t), tol=tol)
    if abs(value.imag) < 5e-11:
        print("%.10f" % value.real)
    else:
        print("%.10f%+.10fi" % (value.real, value.imag))
    return EXIT_OK


def _cmd_moments(opt: _Options) -> int:
    spec = _series_from(opt)
    label = series.canonical_label(spec)
    ks = [int(x) for x in parse_grid(opt.get("k", required=True))]
    sigmas = parse_grid(opt.get("sigma", required=True))
    Ts = parse_grid(opt.get("T", required=True))
    alphas = opt.get("alpha")
    alphas = parse_grid(alphas) if alphas is not None else [None]
    step = opt.get("grid_step")
    step = float(step) if step is not None else None
    cache = _cache_from(opt)

    rows = []
    for k in ks:
        for alpha in alphas:
            for sigma in sigmas:
                for T in Ts:
                    params = {"k": k, "sigma": sigma, "T": T,
                              "alpha": alpha, "grid_step": step}
                    key = (canonical_key(label, "moments", params)
                           if label else None)

                    def compute():
                        if alpha is None:
                            s = moments.mean_square_moment(spec, k, sigma, T,
                                                           grid_step=step)
                        else:
                            s = moments.weighted_moment(spec, k, sigma, alpha,
                                                        T, grid_step=step)
                        return {"value": s.value, "quad_error": s.quad_error}

                    got = cache.get_or_compute(key, compute)
                    rows.append({"series": label or "custom", "k": k,
                                 "alpha": alpha, "sigma": sigma, "T": T,
                                 "value": got["value"],
                                 "quad_error": got["quad_error"]})
    _emit(opt.get("output"), reporting.MOMENTS_COLUMNS, rows)
    return EXIT_OK


def _abscissa_row(spec, label, k, alpha, sigma_grid, T_grid, step,
                  cache: ScanCache, profiles: absc.ProfileCache) -> dict:
    params = {"k": k, "alpha": alpha, "sigma_grid": sigma_grid,
              "T_grid": T_grid, "grid_step": step}
    key = canonical_key(label, "abscissa", params) if label else None

    def compute():
        if alpha is None:
            est = absc.estimate_sigma_k(spec, k, sigma_grid, T_grid,
                                        cache=profiles, grid_step=step)
        else:
            est = absc.estimate_sigma_k_alpha(spec, k, alpha, sigma_grid,
                                              T_grid, cache=profiles,
                                              grid_step=step)
        fit_lo = est.diagnostics[0][1]
        fit_hi = est.diagnostics[-1][1]
        return {"series": label or "custom", "k": k, "alpha": est.alpha,
                "sigma_lo": est.bracket[0], "sigma_hi": est.bracket[1],
                "value": est.value,
                "exponent_lo": fit_lo.exponent,
                "exponent_hi": fit_hi.exponent,
                "residual": max(fit_lo.residual, fit_hi.residual)}

    return cache.get_or_compute(key, compute)


def _cmd_abscissa(opt: _Options) -> int:
    spec = _series_from(opt)
    label = series.canonical_label(spec)
    ks = [int(x) for x in parse_grid(opt.get("k", required=True))]
    sigma_grid = parse_grid(opt.get("sigma_grid", required=True))
    T_grid = parse_grid(opt.get("t_grid", required=True))
    alphas = opt.get("alpha")
    # alpha 0 encodes the unweighted estimate, matching the output column
    alphas = ([None if a == 0.0 else a for a in parse_grid(alphas)]
              if alphas is not None else [None])
    step = opt.get("grid_step")
    step = float(step) if step is not None else None
    cache = _cache_from(opt)
    profiles = absc.ProfileCache()

    rows = [_abscissa_row(spec, label, k, alpha, sigma_grid, T_grid, step,
                          cache, profiles)
            for k in ks for alpha in alphas]
    _emit(opt.get("output"), reporting.ABSCISSA_COLUMNS, rows)
    svg = opt.get("svg")
    if svg:
        reporting.render_abscissa_chart(svg, rows)
    return EXIT_OK


def _cmd_mu(opt: _Options) -> int:
    spec = _series_from(opt)
    label = series.canonical_label(spec)
    sigma_grid = parse_grid(opt.get("sigma_grid", required=True))
    t_grid = parse_grid(opt.get("t_grid", required=True))
    zero_threshold = float(opt.get("zero_threshold", 0.02))
    cache = _cache_from(opt)

    params = {"sigma_grid": sigma_grid, "t_grid": t_grid,
              "zero_threshold": zero_threshold}
    key = canonical_key(label, "mu", params) if label else None

    def compute():
        prof = absc.order_function_profile(spec, sigma_grid, t_grid,
                                           zero_threshold=zero_threshold)
        sig_L = prof.sigma_L_hat if math.isfinite(prof.sigma_L_hat) else None
        return [{"series": label or "custom", "sigma": p.sigma,
                 "mu_hat": p.mu_hat, "exponent": p.fit.exponent,
                 "residual": p.fit.residual, "n_points": p.fit.n_points,
                 "mu0_hat": prof.mu0_hat, "sigma_L_hat": sig_L}
                for p in prof.grid]

    rows = cache.get_or_compute(key, compute)
    _emit(opt.get("output"), reporting.MU_COLUMNS, rows)
    svg = opt.get("svg")
    if svg:
        prediction = _prediction_rows_for(rows, opt)
        reporting.render_mu_chart(svg, rows, prediction)
    return EXIT_OK


def _prediction_rows_for(profile_rows, opt: _Options):
    """Straight-line overlay from explicit mu0/sigma-L or the profile's own."""
    mu0 = opt.get("mu0")
    sigma_L = opt.get("sigma_l")
    if mu0 is None or sigma_L is None:
        r0 = profile_rows[0]
        mu0 = r0["mu0_hat"]
        sigma_L = r0["sigma_L_hat"]
    if not sigma_L:
        return None
    mu0, sigma_L = float(mu0), float(sigma_L)
    if mu0 <= 0.0 or sigma_L <= 0.0:
        return None
    pred = diagnostics.predict_linear_mu(
        mu0, sigma_L, [sigma_L * i / 10.0 for i in range(11)])
    return [{"sigma": s, "mu_predicted": m} for s, m in pred]


def _cmd_parseval(opt: _Options) -> int:
    spec = _series_from(opt)
    alpha = float(opt.get("alpha", required=True))
    sigma = float(opt.get("sigma", required=True))
    T = float(opt.get("T", required=True))
    x_max = float(opt.get("x_max", required=True))
    step = opt.get("grid_step")
    step = float(step) if step is not None else None
    gap = moments.parseval_gap(spec, alpha, sigma, T, x_max, grid_step=step)
    print(f"parseval gap sigma={sigma:g} alpha={alpha:g} T={T:g} "
          f"x_max={x_max:g}: {gap:.6e}")
    return EXIT_OK


def _read_table_csv(path) -> dict:
    import csv as _csv

    table = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = _csv.DictReader(fh)
            cols = set(reader.fieldnames or ())
            if not {"k", "alpha", "value"} <= cols:
                raise ConfigurationError(
                    f"table {path} needs columns k,alpha,value, has {sorted(cols)}")
            for row in reader:
                table[(int(row["k"]), _parse_exact(row["alpha"]))] = \
                    _parse_exact(row["value"])
    except FileNotFoundError:
        raise ConfigurationError(f"table file not found: {path}") from None
    if not table:
        raise ConfigurationError(f"table {path} holds no rows")
    return table


def _cmd_diagnose(opt: _Options) -> int:
    mu0 = _parse_exact(opt.get("mu0", "1/2"))
    sigma_L = _parse_exact(opt.get("sigma_l", "1/2"))
    tol = _parse_exact(opt.get("tol", "1e-12"))
    table_path = opt.get("table")
    if table_path:
        table = _read_table_csv(table_path)
    else:
        ks = [int(x) for x in _parse_exact_list(opt.get("k", "1,2,3"))]
        alphas = _parse_exact_list(opt.get("alpha", "1/8,1/4,3/8"))
        table = {(k, a): diagnostics.lindelof_form(k, a, mu0, sigma_L)
                 for k in ks for a in alphas
                 if 0 < a <= k * mu0}
    report = diagnostics.theorem_pipeline(table, mu0, sigma_L, tol=tol)

    rows = []
    for alpha, rep in report.concavity_in_k:
        rows.append({"axis": "k", "fixed": float(alpha),
                     "property": rep.property, "holds": rep.holds,
                     "max_violation": float(rep.max_violation),
                     "worst_index": _maybe_float(rep.worst_index),
                     "tolerance": float(rep.tolerance)})
    for k, rep in report.convexity_in_alpha:
        rows.append({"axis": "alpha", "fixed": float(k),
                     "property": rep.property, "holds": rep.holds,
                     "max_violation": float(rep.max_violation),
                     "worst_index": _maybe_float(rep.worst_index),
                     "tolerance": float(rep.tolerance)})
    out = opt.get("output")
    _emit(out, reporting.DIAGNOSE_COLUMNS, rows)
    if out and report.prediction:
        stem, ext = os.path.splitext(out)
        reporting.write_csv(stem + "_prediction" + (ext or ".csv"),
                            reporting.PREDICTION_COLUMNS,
                            [{"sigma": float(s), "mu_predicted": float(m)}
                             for s, m in report.prediction])

    svg = opt.get("svg")
    if svg:
        chart_rows = [{"k": k, "alpha": float(a), "value": float(v),
                       "sigma_lo": float(v), "sigma_hi": float(v)}
                      for (k, a), v in sorted(table.items())]
        reporting.render_abscissa_chart(svg, chart_rows)
        profile_csv = opt.get("profile_csv")
        if profile_csv:
            profile_rows = _read_profile_csv(profile_csv)
            pred = [{"sigma": float(s), "mu_predicted": float(m)}
                    for s, m in (report.prediction or ())]
            stem, ext = os.path.splitext(svg)
            reporting.render_mu_chart(stem + "_mu" + (ext or ".svg"),
                                      profile_rows, pred or None)

    if report.holds:
        print("all checks hold; predicted μ linear")
    else:
        for axis, fixed, triple in report.violations:
            print(f"violation on the {axis} axis at {fixed}: triple {triple}")
    for rb in report.ratio_brackets:
        print(f"ratio bracket gamma={float(rb.gamma):g}: "
              f"left={float(rb.left_endpoint):.12g} "
              f"limit={float(rb.extrapolated_limit):.12g} "
              f"agreement={float(rb.agreement):.3e} monotone={rb.monotone}")
    return EXIT_OK


def _maybe_float(x):
    try:
        return float(x)
    except (TypeError, ValueError):
        return x


def _read_profile_csv(path):
    import csv as _csv

    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return [{"sigma": float(r["sigma"]), "mu_hat": float(r["mu_hat"])}
                    for r in _csv.DictReader(fh)]
    except FileNotFoundError:
        raise ConfigurationError(f"profile file not found: {path}") from None
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"profile {path} malformed: {exc}") from None


def _cmd_accept(opt: _Options) -> int:
    from . import acceptance

    outdir = opt.get("outdir", "acceptance_out")
    results = acceptance.run_all(outdir=outdir,
                                 cache_dir=opt.get("cache_dir"))
    failed = 0
    for r in results:
        line = f"{'PASS' if r.passed else 'FAIL'} criterion {r.number}: {r.title}"
        if r.detail:
            line += f" ({r.detail})"
        print(line)
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return EXIT_OK if failed == 0 else EXIT_ACCEPTANCE


# ----------------------------------------------------------------------------
# wiring


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file with per-key defaults")
    p.add_argument("--cache-dir", dest="cache_dir",
                   help="cache directory (env DIRLAB_CACHE overrides)")
    p.add_argument("--series", help="eta | character:q,j | poly:c1,c2,...")
    p.add_argument("--mu0-hint", dest="mu0_hint", type=float)
    p.add_argument("--sigma-l-hint", dest="sigma_l_hint", type=float)
    p.add_argument("--output", help="CSV output path (stdout when omitted)")
    p.add_argument("--svg", help="chart output path")
    p.add_argument("--grid-step", dest="grid_step", type=float)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="dirlab", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the series at one point")
    _add_common(p)
    p.add_argument("--sigma", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--tol", type=float)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("moments", help="mean-square and weighted moments")
    _add_common(p)
    p.add_argument("--k")
    p.add_argument("--sigma")
    p.add_argument("--T", dest="T")
    p.add_argument("--alpha")
    p.set_defaults(handler=_cmd_moments)

    p = sub.add_parser("abscissa", help="bracket summability abscissae")
    _add_common(p)
    p.add_argument("--k")
    p.add_argument("--alpha", help="weights; 0 means the unweighted estimate")
    p.add_argument("--sigma-grid", dest="sigma_grid")
    p.add_argument("--t-grid", dest="t_grid",
                   help="T values, e.g. geom:1000,4000,10")
    p.set_defaults(handler=_cmd_abscissa)

    p = sub.add_parser("mu", help="order-function profile across the strip")
    _add_common(p)
    p.add_argument("--sigma-grid", dest="sigma_grid")
    p.add_argument("--t-grid", dest="t_grid")
    p.add_argument("--zero-threshold", dest="zero_threshold", type=float)
    p.add_argument("--mu0")
    p.add_argument("--sigma-l", dest="sigma_l")
    p.set_defaults(handler=_cmd_mu)

    p = sub.add_parser("parseval", help="two-route weighted moment check")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--T", dest="T", type=float)
    p.add_argument("--x-max", dest="x_max", type=float)
    p.set_defaults(handler=_cmd_parseval)

    p = sub.add_parser("diagnose", help="convexity checks and the linear prediction")
    _add_common(p)
    p.add_argument("--table", help="CSV with columns k,alpha,value")
    p.add_argument("--k", help="orders for the built-in exact table")
    p.add_argument("--alpha", help="weights for the built-in exact table")
    p.add_argument("--mu0", help="growth exponent at sigma 0 (float or p/q)")
    p.add_argument("--sigma-l", dest="sigma_l",
                   help="where growth dies (float or p/q)")
    p.add_argument("--tol", help="check tolerance (float or p/q)")
    p.add_argument("--profile-csv", dest="profile_csv",
                   help="mu subcommand output to chart against the prediction")
    p.set_defaults(handler=_cmd_diagnose)

    p = sub.add_parser("accept", help="run the acceptance suite")
    _add_common(p)
    p.add_argument("--outdir", help="directory for suite artifacts")
    p.set_defaults(handler=_cmd_accept)

    return top


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = _load_config(args.config)
        opt = _Options(args, config)
        return args.handler(opt)
    except (ConfigurationError, DomainError, UnsupportedSeriesError,
            InsufficientCoverageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BracketNotFoundError as exc:
        print(f"error: {exc} [side={exc.side}]", file=sys.stderr)
        return EXIT_COMPUTE
    except DirlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
