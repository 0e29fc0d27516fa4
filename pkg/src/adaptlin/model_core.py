"""Core data types and dense least-squares/projection kernels.

Conventions used throughout the package: the covariate matrix ``X`` is
row-major with row ``i`` holding the vector collected at time ``i`` and
columns indexed by coordinate (0-based).  The coordinates listed in
``adaptive_idx`` may depend on the past; the remaining coordinates are
i.i.d. across time.

All solves go through an orthogonal (QR) factorization with an explicit
numerical rank check; normal equations are never inverted directly, since
adaptive designs can be badly conditioned and the normal equations square
the condition number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

# Relative tolerance for the numerical rank check: a diagonal entry of R
# counts toward the rank when |R_jj| > RANK_RTOL * max_j |R_jj|.
RANK_RTOL = 1e-10


class RankDeficient(ValueError):
    """Raised when a design matrix has numerical column rank below what an
    operation requires."""

    def __init__(self, rank: int, needed: int):
        super().__init__(f"design matrix has numerical rank {rank}, need {needed}")
        self.rank = rank
        self.needed = needed


@dataclass(frozen=True)
class ModelSpec:
    """True linear model y = x'theta_star + eps with eps ~ N(0, sigma^2).

    ``k`` is the number of adaptively chosen coordinates (the first ``k``
    by convention); ``d`` the ambient dimension; ``n`` the sample size.
    """

    theta_star: np.ndarray
    sigma: float
    n: int
    d: int
    k: int

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float).reshape(-1)
        object.__setattr__(self, "theta_star", theta)
        if not 0 <= self.k <= self.d:
            raise ValueError(f"k={self.k} outside [0, d={self.d}]")
        if theta.shape[0] != self.d:
            raise ValueError(f"theta_star has length {theta.shape[0]}, expected d={self.d}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass(frozen=True)
class AdaptiveDataset:
    """One simulated (or imported) dataset.

    ``adaptive_idx`` declares which columns were collected adaptively; its
    complement is i.i.d. by assumption.  ``meta`` records the generator
    name, parameters and seed for replay.
    """

    X: np.ndarray
    y: np.ndarray
    adaptive_idx: tuple[int, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "adaptive_idx", tuple(int(j) for j in self.adaptive_idx))
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"X is {X.shape}, y has length {y.shape[0]}")
        idx = self.adaptive_idx
        if len(set(idx)) != len(idx) or any(j < 0 or j >= X.shape[1] for j in idx):
            raise ValueError(f"adaptive_idx {idx} not distinct in-range column indices")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def nonadaptive_idx(self) -> tuple[int, ...]:
        ad = set(self.adaptive_idx)
        return tuple(j for j in range(self.d) if j not in ad)

    @property
    def X_ad(self) -> np.ndarray:
        return self.X[:, list(self.adaptive_idx)]

    @property
    def X_nad(self) -> np.ndarray:
        return self.X[:, list(self.nonadaptive_idx)]


@dataclass
class EstimateReport:
    """Point estimates with optional standard errors and per-level CIs.

    ``estimate[j]`` refers to coordinate ``target_idx[j]`` of the model.
    ``ci`` maps a level ``alpha`` to a pair of arrays ``(lower, upper)``
    aligned with ``estimate``.
    """

    method: str
    estimate: np.ndarray
    target_idx: tuple[int, ...]
    stderr: np.ndarray | None = None
    ci: dict[float, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        self.estimate = np.asarray(self.estimate, dtype=float).reshape(-1)
        self.target_idx = tuple(int(j) for j in self.target_idx)
        if self.estimate.shape[0] != len(self.target_idx):
            raise ValueError("estimate and target_idx lengths differ")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float).reshape(-1)
            if np.any(self.stderr < 0):
                raise ValueError("stderr must be nonnegative")
        for alpha, (lo, hi) in self.ci.items():
            lo = np.asarray(lo, dtype=float).reshape(-1)
            hi = np.asarray(hi, dtype=float).reshape(-1)
            self.ci[alpha] = (lo, hi)
            if np.any(lo > self.estimate) or np.any(hi < self.estimate):
                raise ValueError(f"CI at alpha={alpha} does not bracket the estimate")


def _qr_full_rank(M: np.ndarray, needed: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR of M with a numerical rank check against ``needed``."""
    Q, R = np.linalg.qr(M)
    diag = np.abs(np.diag(R))
    tol = RANK_RTOL * (diag.max() if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < needed:
        raise RankDeficient(rank, needed)
    return Q, R


def solve_least_squares(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares coefficients and the materialized Gram inverse.

    Returns ``(coef, gram_inverse)`` where ``coef`` minimizes ||y - X coef||
    and ``gram_inverse = (X'X)^{-1}``, both computed from a single QR
    factorization.  Raises :class:`RankDeficient` when the numerical column
    rank of ``X`` is below its width.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, d = X.shape
    if y.shape[0] != n:
        raise ValueError("X and y row counts differ")
    Q, R = _qr_full_rank(X, d)
    coef = solve_triangular(R, Q.T @ y)
    rinv = solve_triangular(R, np.eye(d))
    gram_inverse = rinv @ rinv.T
    return coef, gram_inverse


def project_onto_colspace(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the column space of ``M``.

    ``v`` may be a vector or a matrix of column vectors.  ``M`` must have
    full column rank.
    """
    M = np.asarray(M, dtype=float)
    Q, _ = _qr_full_rank(M, M.shape[1])
    return Q @ (Q.T @ np.asarray(v, dtype=float))


def center_columns(M: np.ndarray) -> np.ndarray:
    """Subtract each column's mean; equals (I - P_1) M for the all-ones vector."""
    M = np.asarray(M, dtype=float)
    return M - M.mean(axis=0)
