"""Evaluation metrics: scaled mean squared error, coverage aggregation, and
standardized-error diagnostics against the standard normal."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special, stats

from .model_core import RankDeficient, _qr_full_rank
from .records import ReplicationRecord


class MissingAlpha(KeyError):
    """A replication record lacks a confidence interval at the requested level."""


@dataclass(frozen=True)
class ScaledMseRecord:
    idx_set: tuple[int, ...]
    value: float
    method: str

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("scaled MSE is nonnegative")


@dataclass(frozen=True)
class CoverageSummary:
    alpha: float
    nominal: float
    empirical: float
    empirical_se: float
    mean_width: float
    sd_width: float
    n_reps: int


def scaled_mse(theta_hat_I, theta_star_I, X: np.ndarray, I: Sequence[int]) -> float:
    """Squared error of the sub-vector I weighted by the inverse of the
    corresponding block of the Gram-matrix inverse.

    The weight matrix is evaluated through the projection identity
    X_I' (I_n - P_{X_Ic}) X_I, which avoids inverting the full Gram matrix
    and then re-inverting a block.  For I = all columns it reduces to the
    plain Gram quadratic form.
    """
    X = np.asarray(X, dtype=float)
    I = [int(j) for j in I]
    if len(I) == 0:
        raise ValueError("I must be nonempty")
    d = X.shape[1]
    # rank check on the full design, mirroring the estimators' precondition
    _qr_full_rank(X, d)
    Ic = [j for j in range(d) if j not in set(I)]
    XI = X[:, I]
    diff = (
        np.asarray(theta_hat_I, dtype=float).reshape(-1)
        - np.asarray(theta_star_I, dtype=float).reshape(-1)
    )
    if diff.shape[0] != len(I):
        raise ValueError("theta vectors must match the index set length")
    M = XI.T @ XI
    if Ic:
        Q, _ = _qr_full_rank(X[:, Ic], len(Ic))
        B = Q.T @ XI
        M = M - B.T @ B
    value = float(diff @ M @ diff)
    # the weight matrix is positive semidefinite; clamp rounding noise
    return max(value, 0.0)


def coverage_and_width(
    records: Sequence[ReplicationRecord], alpha: float, method: str
) -> CoverageSummary:
    """Empirical coverage of the true target coordinate and CI width stats."""
    hits = []
    widths = []
    for rec in records:
        try:
            res = rec.methods[method]
        except KeyError:
            raise MissingAlpha(f"record {rec.rep} has no method {method!r}") from None
        if alpha not in res.ci:
            raise MissingAlpha(f"record {rec.rep} lacks alpha={alpha} for {method!r}")
        lo, hi = res.ci[alpha]
        hits.append(1.0 if lo <= rec.target_true <= hi else 0.0)
        widths.append(hi - lo)
    n = len(hits)
    if n == 0:
        raise ValueError("no records")
    p = math.fsum(hits) / n
    mean_w = math.fsum(widths) / n
    sd_w = math.sqrt(math.fsum((w - mean_w) ** 2 for w in widths) / n) if n > 1 else 0.0
    return CoverageSummary(
        alpha=float(alpha),
        nominal=1.0 - float(alpha),
        empirical=p,
        empirical_se=math.sqrt(p * (1.0 - p) / n),
        mean_width=mean_w,
        sd_width=sd_w,
        n_reps=n,
    )


def ks_distance(sample) -> float:
    """Kolmogorov-Smirnov distance between the sample and the standard normal."""
    x = np.sort(np.asarray(sample, dtype=float).reshape(-1))
    n = x.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    cdf = stats.norm.cdf(x)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - cdf), np.max(cdf - (grid - 1.0 / n))))


def ks_critical(alpha: float, n: int) -> float:
    """Asymptotic KS critical value at level alpha for sample size n."""
    return float(special.kolmogi(alpha)) / math.sqrt(n)


def standardized_errors(
    records: Sequence[ReplicationRecord], method: str
) -> tuple[np.ndarray, float]:
    """Per-replication pivots (estimate - truth)/stderr and their KS distance
    from the standard normal."""
    errs = np.array(
        [
            (rec.methods[method].estimate - rec.target_true) / rec.methods[method].stderr
            for rec in records
        ]
    )
    return errs, ks_distance(errs)


def histogram_counts(values, bins: int = 50, lo: float = -5.0, hi: float = 5.0):
    """Binned counts for the plotting layer; returns (edges, counts)."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=(lo, hi))
    return edges, counts


__all__ = [
    "CoverageSummary",
    "MissingAlpha",
    "RankDeficient",
    "ScaledMseRecord",
    "coverage_and_width",
    "histogram_counts",
    "ks_critical",
    "ks_distance",
    "scaled_mse",
    "standardized_errors",
]
