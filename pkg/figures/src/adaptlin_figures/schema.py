"""CSV loading against the harness output schemas.

The plotting layer never recomputes statistics: it reads the aggregate
columns from ``summary.csv`` (and per-replication pivots from
``replications.csv`` for the histograms), binning and banding only.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path


class SchemaError(ValueError):
    """Input CSV is empty or lacks required columns."""


SUMMARY_REQUIRED = {
    "fig1": ("k", "method", "mean_scaled_mse", "sd_scaled_mse"),
    "fig2-coverage": ("method", "alpha", "nominal", "coverage", "coverage_se"),
    "fig2-width": ("method", "alpha", "nominal", "mean_width", "sd_width"),
}
REPLICATIONS_REQUIRED = ("method", "k", "rep", "std_err_pivot")


def _float(value: str) -> float:
    return float(value) if value != "" else math.nan


def load_rows(path, required: tuple[str, ...]) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or ()
        missing = [col for col in required if col not in header]
        if missing:
            raise SchemaError(f"{path} lacks required columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path} has no data rows")
    return rows


def methods_in(rows: list[dict]) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row["method"] not in seen:
            seen.append(row["method"])
    return seen


def series_by_k(rows: list[dict], method: str, column: str, sd_column: str | None):
    """(k, value, sd) triples for one method, ordered by k."""
    pts = [
        (
            int(r["k"]),
            _float(r[column]),
            _float(r[sd_column]) if sd_column and sd_column in r else math.nan,
        )
        for r in rows
        if r["method"] == method
    ]
    # summary repeats per-method scalars once per alpha level; deduplicate
    seen = {}
    for k, v, s in pts:
        seen.setdefault(k, (v, s))
    ks = sorted(seen)
    return ks, [seen[k][0] for k in ks], [seen[k][1] for k in ks]


def series_by_nominal(rows: list[dict], method: str, column: str, sd_column: str):
    """(nominal level, value, sd) triples for one method, ordered by level."""
    pts = []
    for r in rows:
        if r["method"] != method or r["alpha"] == "":
            continue
        pts.append((_float(r["nominal"]), _float(r[column]), _float(r[sd_column])))
    pts.sort()
    return (
        [p[0] for p in pts],
        [p[1] for p in pts],
        [p[2] for p in pts],
    )


def pivots_by_method(rows: list[dict]) -> dict[str, list[float]]:
    """Standardized errors per method, one value per (k, rep)."""
    out: dict[str, list[float]] = {}
    seen: set[tuple] = set()
    for r in rows:
        key = (r["method"], r["k"], r["rep"])
        if key in seen:
            continue
        seen.add(key)
        val = _float(r["std_err_pivot"])
        if not math.isnan(val):
            out.setdefault(r["method"], []).append(val)
    return out
