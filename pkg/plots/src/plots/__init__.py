"""Figures from minimax-bench CSV output.

Two file-to-file transformations:

* convergence curves: squared distance to the equilibrium (log scale)
  against gradient computations, one line per trace CSV
  (``iter,grad_calls,dist_sq,lyapunov`` - the lyapunov column is optional);
* scaling plots: iterations-to-eps against the coupling condition number
  on log-log axes (``kappa_xy,iters,converged`` or generic ``kappa,iters``),
  annotated with the median slope of the segments joining adjacent points.

Rerunning on the same inputs produces byte-identical images: figures carry
no timestamps and SVG ids are salted deterministically.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "minimax-bench-plots"

import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "SchemaError",
    "PlotSpec",
    "read_trace",
    "read_scaling",
    "median_segment_slope",
    "plot_convergence",
    "plot_scaling",
]

# savefig keywords that keep the output free of varying metadata
_SAVE_KW = {"metadata": {"Date": None}}


class SchemaError(ValueError):
    """Input CSV does not match the harness schema; names the offending column."""


@dataclass(frozen=True)
class PlotSpec:
    """Inputs and destination of one figure."""

    inputs: tuple[str, ...]
    kind: str  # convergence | scaling
    out: str
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("convergence", "scaling"):
            raise ValueError(f"unknown plot kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("need at least one input CSV")
        if self.labels and len(self.labels) != len(self.inputs):
            raise ValueError("labels must match inputs one to one")

    def label(self, i: int) -> str:
        if self.labels:
            return self.labels[i]
        return Path(self.inputs[i]).stem


def _read_rows(path: str) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, no header row")
        return list(reader.fieldnames), list(reader)


def read_trace(path: str) -> tuple[list[float], list[float]]:
    """(grad_calls, dist_sq) columns of one trace CSV."""
    header, rows = _read_rows(path)
    for col in ("iter", "grad_calls", "dist_sq"):
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")
    calls, dist = [], []
    for row in rows:
        calls.append(float(row["grad_calls"]))
        dist.append(float(row["dist_sq"]))
    return calls, dist


def read_scaling(path: str) -> tuple[list[float], list[float]]:
    """(kappa, iters) pairs of one scaling CSV, rows without iters dropped."""
    header, rows = _read_rows(path)
    if "kappa_xy" in header:
        key = "kappa_xy"
    elif "kappa" in header:
        key = "kappa"
    else:
        raise SchemaError(f"{path}: missing column 'kappa_xy'")
    if "iters" not in header:
        raise SchemaError(f"{path}: missing column 'iters'")
    kappa, iters = [], []
    for row in rows:
        if row["iters"] in ("", None):
            continue
        kappa.append(float(row[key]))
        iters.append(float(row["iters"]))
    return kappa, iters


def _dedupe_by_mean(kappa, iters):
    means: dict[float, list[float]] = {}
    for k, v in zip(kappa, iters):
        means.setdefault(k, []).append(v)
    ks = sorted(means)
    return ks, [statistics.fmean(means[k]) for k in ks]


def median_segment_slope(kappa, iters) -> float:
    """Median slope of log-log segments joining adjacent points."""
    if len(kappa) < 2:
        raise ValueError("need at least two points to fit a slope")
    pts = sorted(zip(kappa, iters))
    slopes = [
        (math.log(y2) - math.log(y1)) / (math.log(x2) - math.log(x1))
        for (x1, y1), (x2, y2) in zip(pts, pts[1:])
    ]
    return statistics.median(slopes)


def plot_convergence(spec: PlotSpec) -> str:
    """Distance-squared curves against gradient computations, log-scale y."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, path in enumerate(spec.inputs):
        calls, dist = read_trace(path)
        # keep the log axis inside float range on divergent traces
        pairs = [(c, d) for c, d in zip(calls, dist) if 0.0 < d < 1e290]
        if not pairs:
            # a run that starts (and stays) at the equilibrium: flat floor line
            pairs = [(c, 1e-300) for c in calls]
        ax.semilogy([p[0] for p in pairs], [p[1] for p in pairs], label=spec.label(i))
    ax.set_xlabel("gradient computations")
    ax.set_ylabel(r"$\Vert z_k - z_\star \Vert^2$")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_KW)
    plt.close(fig)
    return spec.out


def plot_scaling(spec: PlotSpec) -> dict[str, float]:
    """Log-log scatter of iterations against kappa with median-slope annotations.

    Returns {label: slope} and prints one slope line per input.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    slopes: dict[str, float] = {}
    for i, path in enumerate(spec.inputs):
        kappa, iters = read_scaling(path)
        kappa, iters = _dedupe_by_mean(kappa, iters)
        slope = median_segment_slope(kappa, iters)
        label = spec.label(i)
        slopes[label] = slope
        ax.loglog(kappa, iters, "o-", label=f"{label} (slope {slope:.2f})")
        print(f"{label}: median log-log slope {slope:.4f}")
    ax.set_xlabel(r"$\kappa_{xy}$")
    ax.set_ylabel("iterations to reach eps")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_KW)
    plt.close(fig)
    return slopes
