"""Figure builders for the three output families.

* ``fig1``: mean scaled MSE versus the number of adaptive coordinates,
  one line per estimator, optional +-1 sd band.
* ``fig2-coverage``: empirical coverage versus the target level with the
  diagonal reference and +-1 standard-error bands.
* ``fig2-width``: mean CI width versus the target level with +-1 sd bands.
* ``fig3-hist``: histograms of standardized errors with the standard
  normal density overlaid.

Rendering is read-only and deterministic: fixed figure geometry, no
timestamps, statistics taken from the CSVs as-is (only binning and banding
happen here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import (
    REPLICATIONS_REQUIRED,
    SUMMARY_REQUIRED,
    SchemaError,
    load_rows,
    methods_in,
    pivots_by_method,
    series_by_k,
    series_by_nominal,
)

FIGURES = ("fig1", "fig2-coverage", "fig2-width", "fig3-hist")

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.2),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "savefig.dpi": 130,
    }
)


@dataclass
class PlotSpec:
    figure: str
    input: str
    output: str
    band: bool = True
    bins: int = 50
    methods: tuple[str, ...] = ()
    exclude: tuple[str, ...] = ()
    column: str = "mean_scaled_mse"

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise SchemaError(f"unknown figure {self.figure!r}; expected one of {FIGURES}")


def _selected(methods_present: list[str], spec: PlotSpec) -> list[str]:
    methods = list(spec.methods) if spec.methods else methods_present
    methods = [m for m in methods if m not in spec.exclude]
    if not methods:
        raise SchemaError("no methods left to plot after filtering")
    return methods


def _fig1(spec: PlotSpec):
    rows = load_rows(spec.input, SUMMARY_REQUIRED["fig1"])
    # only the per-coordinate metric carries a spread column in the summary
    sd_col = "sd_scaled_mse" if spec.column == "mean_scaled_mse" else None
    fig, ax = plt.subplots()
    for method in _selected(methods_in(rows), spec):
        ks, means, sds = series_by_k(rows, method, spec.column, sd_col)
        ax.plot(ks, means, marker="o", label=method)
        if spec.band and not any(math.isnan(s) for s in sds):
            lo = np.array(means) - np.array(sds)
            hi = np.array(means) + np.array(sds)
            ax.fill_between(ks, lo, hi, alpha=0.2)
    ax.set_xlabel("number of adaptive coordinates k")
    ax.set_ylabel("scaled MSE")
    ax.legend()
    return fig


def _fig2_coverage(spec: PlotSpec):
    rows = load_rows(spec.input, SUMMARY_REQUIRED["fig2-coverage"])
    leveled = [float(x["nominal"]) for x in rows if x["alpha"] != ""]
    if not leveled:
        raise SchemaError(f"{spec.input} has no confidence-level rows to plot")
    fig, ax = plt.subplots()
    grid = np.linspace(0.0, 1.0, 101)
    ax.plot(grid, grid, linestyle="--", color="black", linewidth=1.0, label="nominal")
    for method in _selected(methods_in(rows), spec):
        levels, cov, se = series_by_nominal(rows, method, "coverage", "coverage_se")
        if not levels:
            continue
        ax.plot(levels, cov, marker="o", label=method)
        if spec.band:
            ax.fill_between(
                levels, np.array(cov) - np.array(se), np.array(cov) + np.array(se), alpha=0.2
            )
    ax.set_xlim(min(leveled) - 0.05, 1.0)
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("target coverage probability")
    ax.set_ylabel("empirical coverage")
    ax.legend()
    return fig


def _fig2_width(spec: PlotSpec):
    rows = load_rows(spec.input, SUMMARY_REQUIRED["fig2-width"])
    fig, ax = plt.subplots()
    for method in _selected(methods_in(rows), spec):
        levels, width, sd = series_by_nominal(rows, method, "mean_width", "sd_width")
        if not levels:
            continue
        ax.plot(levels, width, marker="o", label=method)
        if spec.band:
            ax.fill_between(
                levels, np.array(width) - np.array(sd), np.array(width) + np.array(sd), alpha=0.2
            )
    ax.set_xlabel("target coverage probability")
    ax.set_ylabel("confidence-interval width")
    ax.legend()
    return fig


def _fig3_hist(spec: PlotSpec):
    rows = load_rows(spec.input, REPLICATIONS_REQUIRED)
    pivots = pivots_by_method(rows)
    methods = _selected([m for m in pivots], spec)
    fig, axes = plt.subplots(1, len(methods), figsize=(4.8 * len(methods), 4.2), squeeze=False)
    grid = np.linspace(-5.0, 5.0, 401)
    density = np.exp(-grid**2 / 2.0) / math.sqrt(2.0 * math.pi)
    for ax, method in zip(axes[0], methods):
        vals = np.clip(pivots[method], -5.0, 5.0)
        ax.hist(vals, bins=spec.bins, range=(-5.0, 5.0), density=True, alpha=0.6)
        ax.plot(grid, density, color="black", linewidth=1.2, label="standard normal")
        ax.set_title(method)
        ax.set_xlabel("standardized error")
        ax.legend()
    axes[0][0].set_ylabel("density")
    return fig


_BUILDERS = {
    "fig1": _fig1,
    "fig2-coverage": _fig2_coverage,
    "fig2-width": _fig2_width,
    "fig3-hist": _fig3_hist,
}


def build_figure(spec: PlotSpec):
    """Build and return the matplotlib Figure for ``spec`` (no file I/O)."""
    return _BUILDERS[spec.figure](spec)


def render(spec: PlotSpec) -> Path:
    """Render ``spec`` to its output path and return the path."""
    fig = build_figure(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out
