"""Delimited output and chart rendering.

Every subcommand that writes a table uses a fixed column set, listed here
as module constants. Numbers serialize as shortest round-trip decimals
(repr), so a value that survived a JSON cache round-trip prints the same
bytes as a freshly computed one. Charts render through the Agg backend
with a pinned hashsalt and no Date metadata; reruns produce identical
files.
"""

import csv
from typing import Optional, Sequence

from .errors import ConfigurationError

__all__ = [
    "MOMENTS_COLUMNS",
    "ABSCISSA_COLUMNS",
    "MU_COLUMNS",
    "DIAGNOSE_COLUMNS",
    "PREDICTION_COLUMNS",
    "write_csv",
    "render_abscissa_chart",
    "render_mu_chart",
]

MOMENTS_COLUMNS = ("series", "k", "alpha", "sigma", "T", "value", "quad_error")
ABSCISSA_COLUMNS = (
    "series",
    "k",
    "alpha",
    "sigma_lo",
    "sigma_hi",
    "value",
    "exponent_lo",
    "exponent_hi",
    "residual",
)
MU_COLUMNS = (
    "series",
    "sigma",
    "mu_hat",
    "exponent",
    "residual",
    "n_points",
    "mu0_hat",
    "sigma_L_hat",
)
DIAGNOSE_COLUMNS = (
    "axis",
    "fixed",
    "property",
    "holds",
    "max_violation",
    "worst_index",
    "tolerance",
)
PREDICTION_COLUMNS = ("sigma", "mu_predicted")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: str, columns: Sequence[str], rows) -> None:
    """Write dict rows under a fixed header; extra keys are an error."""
    columns = tuple(columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            unknown = set(row) - set(columns)
            if unknown:
                raise ConfigurationError(
                    f"row has columns outside the schema: {sorted(unknown)}"
                )
            writer.writerow([_fmt(row.get(c)) for c in columns])


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    matplotlib.rcParams["svg.hashsalt"] = "dirlab"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def render_abscissa_chart(path: str, rows) -> None:
    """Estimated abscissa against weight, one curve per moment order.

    Rows follow ABSCISSA_COLUMNS; brackets draw as vertical error bars.
    """
    plt = _pyplot()
    by_k = {}
    for row in rows:
        by_k.setdefault(row["k"], []).append(row)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for k in sorted(by_k):
        pts = sorted(by_k[k], key=lambda r: r["alpha"])
        alphas = [r["alpha"] for r in pts]
        values = [r["value"] for r in pts]
        lo = [r["value"] - r["sigma_lo"] for r in pts]
        hi = [r["sigma_hi"] - r["value"] for r in pts]
        ax.errorbar(alphas, values, yerr=[lo, hi], marker="o", capsize=3,
                    label=f"k={k}")
    ax.set_xlabel("alpha")
    ax.set_ylabel("estimated abscissa")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def render_mu_chart(path: str, profile_rows, prediction_rows=None) -> None:
    """Measured growth exponents across the strip, optional predicted line."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    pts = sorted(profile_rows, key=lambda r: r["sigma"])
    ax.plot([r["sigma"] for r in pts], [r["mu_hat"] for r in pts],
            marker="o", linestyle="-", label="measured")
    if prediction_rows:
        pred = sorted(prediction_rows, key=lambda r: r["sigma"])
        ax.plot([r["sigma"] for r in pred],
                [r["mu_predicted"] for r in pred],
                linestyle="--", label="predicted")
    ax.set_xlabel("sigma")
    ax.set_ylabel("mu")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
