"""Seeded dataset simulators with adaptively assigned leading coordinates.

Three mechanisms are provided:

* ``iid``: every row drawn i.i.d. from the configured law (no adaptivity).
* ``treatment_assignment``: one binary coordinate assigned by an
  epsilon-greedy sign rule on the running least-squares estimate of its own
  coefficient; the other coordinates are i.i.d. standard Gaussian.
* ``k_adaptive_greedy``: ``k`` binary coordinates, each assigned by the
  same epsilon-greedy sign rule applied to its own running coordinate
  estimate with independent exploration coins; the non-adaptive block is
  i.i.d. on the unit sphere (optionally mean-shifted).

Randomness is split into two independent streams derived from the config
seed: one for covariates and exploration coins, one for the response noise.
Regenerating with a different ``noise_seed`` therefore leaves the
non-adaptive columns untouched, and with ``p_exploit = 0`` the whole
covariate matrix is independent of the noise path.

The running fit is the minimum-norm least-squares solution of the full
history, so the sign rule is defined from the second row on even while the
Gram matrix is singular.  Once the Gram matrix becomes positive definite
the fit switches to rank-one updates of its inverse; both branches agree
with the exact full-history least-squares solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .model_core import AdaptiveDataset, ModelSpec

KINDS = ("iid", "treatment_assignment", "k_adaptive_greedy")
LAWS = ("standard_gaussian", "uniform_sphere", "shifted_sphere")


@dataclass(frozen=True)
class GeneratorConfig:
    kind: str
    spec: ModelSpec
    p_exploit: float = 0.8
    nonadaptive_law: str = "standard_gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.nonadaptive_law not in LAWS:
            raise ValueError(f"unknown law {self.nonadaptive_law!r}; expected one of {LAWS}")
        if not 0.0 <= self.p_exploit <= 1.0:
            raise ValueError("p_exploit must lie in [0, 1]")
        spec = self.spec
        if self.kind == "treatment_assignment":
            if spec.k != 1:
                raise ValueError("treatment_assignment requires k = 1")
            if spec.d < 2 or spec.n <= spec.d:
                raise ValueError("treatment_assignment requires d >= 2 and n > d")
            if self.nonadaptive_law != "standard_gaussian":
                raise ValueError("treatment_assignment draws its covariates from N(0, I)")
        if self.kind == "k_adaptive_greedy" and not 1 <= spec.k < spec.d:
            raise ValueError("k_adaptive_greedy requires 1 <= k < d")
        if self.kind == "iid" and spec.k != 0:
            raise ValueError("iid requires k = 0")


def _streams(seed: int, noise_seed: int | None) -> tuple[np.random.Generator, np.random.Generator]:
    cov = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    noise = np.random.default_rng(
        np.random.SeedSequence(entropy=seed if noise_seed is None else noise_seed, spawn_key=(1,))
    )
    return cov, noise


def _draw_rows(rng: np.random.Generator, n: int, dim: int, law: str) -> np.ndarray:
    if law == "standard_gaussian":
        return rng.standard_normal((n, dim))
    # unit-sphere rows; the shifted variant adds a mean vector drawn once
    # from N(1, I) before the rows so the stream layout stays stable
    mu = rng.normal(1.0, 1.0, dim) if law == "shifted_sphere" else None
    g = rng.standard_normal((n, dim))
    rows = g / np.linalg.norm(g, axis=1, keepdims=True)
    return rows if mu is None else rows + mu


class _RunningOLS:
    """Exact full-history least squares, updated one row at a time.

    Minimum-norm solve (lstsq) while the Gram matrix is singular; once it
    admits a Cholesky factor, switch to maintaining the inverse through
    Sherman-Morrison rank-one updates.
    """

    def __init__(self, d: int):
        self.d = d
        self.count = 0
        self.gram = np.zeros((d, d))
        self.moment = np.zeros(d)
        self.gram_inv: np.ndarray | None = None
        self._rows: list[np.ndarray] | None = []
        self._ys: list[float] | None = []

    def coefficients(self) -> np.ndarray | None:
        if self.count == 0:
            return None
        if self.gram_inv is None and self.count >= self.d:
            try:
                chol = np.linalg.cholesky(self.gram)
            except np.linalg.LinAlgError:
                chol = None
            # switch to the fast path only once the factor is sanely
            # conditioned; badly conditioned early Grams stay on lstsq
            if chol is not None:
                diag = np.diag(chol)
                if diag.min() > 1e-7 * diag.max():
                    linv = solve_triangular(chol, np.eye(self.d), lower=True)
                    self.gram_inv = linv.T @ linv
                    self._rows = self._ys = None
        if self.gram_inv is not None:
            return self.gram_inv @ self.moment
        coef, *_ = np.linalg.lstsq(np.asarray(self._rows), np.asarray(self._ys), rcond=None)
        return coef

    def push(self, x: np.ndarray, y: float) -> None:
        self.gram += np.outer(x, x)
        self.moment += y * x
        self.count += 1
        if self.gram_inv is not None:
            u = self.gram_inv @ x
            self.gram_inv -= np.outer(u, u) / (1.0 + x @ u)
        else:
            self._rows.append(x.copy())
            self._ys.append(y)


def _meta(config: GeneratorConfig, noise_seed: int | None) -> dict:
    return {
        "generator": config.kind,
        "seed": int(config.seed),
        "noise_seed": int(config.seed if noise_seed is None else noise_seed),
        "p_exploit": float(config.p_exploit),
        "nonadaptive_law": config.nonadaptive_law,
    }


def gen_iid(config: GeneratorConfig, noise_seed: int | None = None) -> AdaptiveDataset:
    """All n rows i.i.d. from the configured law; no adaptive coordinates."""
    spec = config.spec
    cov, noise = _streams(config.seed, noise_seed)
    X = _draw_rows(cov, spec.n, spec.d, config.nonadaptive_law)
    y = X @ spec.theta_star + noise.normal(0.0, spec.sigma, spec.n)
    return AdaptiveDataset(X, y, (), _meta(config, noise_seed))


def _gen_greedy(config: GeneratorConfig, noise_seed: int | None, k: int, coin_explore: bool) -> AdaptiveDataset:
    """Shared core of the two greedy mechanisms.

    ``coin_explore`` selects the exploration value: always 1 for the
    single-treatment rule, a fair coin per coordinate for the k-coordinate
    variant.  The coin is what keeps several adaptive columns from locking
    into identical all-ones paths (identical columns receive identical
    running estimates, hence identical decisions, and the design would stay
    rank deficient forever).
    """
    spec = config.spec
    n, d, p = spec.n, spec.d, config.p_exploit
    cov, noise = _streams(config.seed, noise_seed)
    X_nad = _draw_rows(cov, n, d - k, config.nonadaptive_law)
    coins = cov.random((n, k))
    explore_vals = (cov.random((n, k)) < 0.5).astype(float) if coin_explore else np.ones((n, k))
    eps = noise.normal(0.0, spec.sigma, n)

    X = np.empty((n, d))
    y = np.empty(n)
    fit = _RunningOLS(d)
    x = np.empty(d)
    for i in range(n):
        if i == 0:
            assign = np.ones(k)
        else:
            theta = fit.coefficients()
            exploit = (theta[:k] > 0).astype(float)
            assign = np.where(coins[i] < p, exploit, explore_vals[i])
        x[:k] = assign
        x[k:] = X_nad[i]
        yi = x @ spec.theta_star + eps[i]
        X[i] = x
        y[i] = yi
        fit.push(x, yi)
    return AdaptiveDataset(X, y, tuple(range(k)), _meta(config, noise_seed))


def gen_treatment_assignment(config: GeneratorConfig, noise_seed: int | None = None) -> AdaptiveDataset:
    """Single binary treatment column assigned by the epsilon-greedy sign rule.

    Row 1 always receives treatment.  From row 2 on, with probability
    ``p_exploit`` the treatment indicator is 1 exactly when the running
    least-squares estimate of the treatment coefficient (fit on all earlier
    rows) is strictly positive, and with probability ``1 - p_exploit`` it
    is forced to 1.  The remaining d-1 coordinates are i.i.d. N(0, I).
    """
    return _gen_greedy(config, noise_seed, 1, coin_explore=False)


def gen_k_adaptive_greedy(config: GeneratorConfig, noise_seed: int | None = None) -> AdaptiveDataset:
    """k binary coordinates, each epsilon-greedy on its own running estimate.

    Exploration draws a fair coin per coordinate, independently across
    coordinates and rows, which keeps the adaptive columns from locking
    into a common path and makes the design identifiable for every k.
    The non-adaptive block is i.i.d. from ``nonadaptive_law`` on dimension
    d - k (unit sphere by default; the shifted variant adds a mean vector
    drawn once per dataset from N(1, I)).
    """
    return _gen_greedy(config, noise_seed, config.spec.k, coin_explore=True)


_DISPATCH = {
    "iid": gen_iid,
    "treatment_assignment": gen_treatment_assignment,
    "k_adaptive_greedy": gen_k_adaptive_greedy,
}


def generate(config: GeneratorConfig, noise_seed: int | None = None) -> AdaptiveDataset:
    """Generate one dataset; byte-for-byte reproducible from (config, seeds)."""
    return _DISPATCH[config.kind](config, noise_seed)
