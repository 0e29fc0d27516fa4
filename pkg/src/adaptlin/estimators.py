"""Estimator suite for adaptive linear models.

Five methods share the :class:`~adaptlin.model_core.EstimateReport` surface:

* ``ols_report``: plain least squares with naive normal CIs.  Under
  adaptive collection these intervals are not generally valid; they are
  included as the baseline whose failure the experiments quantify.
* ``centered_ols``: least squares after subtracting column means from the
  covariates and the mean from the response.  Coefficientwise this equals
  plain least squares with an intercept column appended, and it is the
  appropriate estimator when the non-adaptive coordinates have an unknown
  nonzero mean.
* ``tale_estimate``: a two-stage adaptive linear estimating equation for a
  single adaptive coordinate.  Stage one plugs in the least-squares
  estimate of the non-adaptive (nuisance) block; stage two solves a
  weighted estimating equation whose predictable, decreasing weights make
  the estimator asymptotically normal under adaptive sampling.
* ``concentration_ci``: a non-asymptotic interval from a self-normalized
  martingale bound; valid at any sample size but conservative.
* ``w_decorrelation``: corrects least squares by a decorrelating matrix
  built with an online recursion, with normal CIs from the whitened
  variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .generators import GeneratorConfig, generate
from .model_core import (
    AdaptiveDataset,
    EstimateReport,
    ModelSpec,
    RankDeficient,
    center_columns,
    solve_least_squares,
)

# sum of squared weights never exceeds the full integral of the squared
# weight profile, which evaluates to 1/log 2
WEIGHT_SQ_BUDGET = 1.0 / math.log(2.0)


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class DegenerateDesign(ValueError):
    """The estimating equation has no unique solution for this dataset."""


@dataclass(frozen=True)
class TaleConfig:
    """Settings for the two-stage estimating-equation estimator.

    ``s0`` is the positive origin of the running weight schedule.  ``sigma``
    is a known noise level to plug into the pivot; leave ``None`` to use
    the residual estimate from the full least-squares fit.
    """

    s0: float
    sigma: float | None = None
    alpha_levels: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.s0 > 0:
            raise ValueError("s0 must be positive")
        object.__setattr__(self, "alpha_levels", tuple(float(a) for a in self.alpha_levels))


@dataclass
class TaleResult:
    theta_hat: float
    weight_sum_sq: float
    design_sum: float
    stderr: float
    ci: dict[float, tuple[float, float]] = field(default_factory=dict)
    # scale proxies for the two error terms of the estimating equation:
    # noise_scale for the martingale part, bias_scale for the plug-in part
    noise_scale: float = 0.0
    bias_scale: float = 0.0

    def __post_init__(self):
        if not self.weight_sum_sq > 0:
            raise ValueError("weight_sum_sq must be positive")
        if self.design_sum == 0:
            raise ValueError("design_sum must be nonzero")


def default_s0(n: int) -> float:
    """Default weight-schedule origin log(log n), clamped below at 0.01.

    The clamp only binds for n <= 2, where the double log is nonpositive.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    return max(math.log(math.log(n)), 1e-2)


def f_weight(x):
    """Decreasing weight profile 1 / sqrt(x * log(e^2 x) * (log log(e^2 x))^2).

    Defined for x >= 1; strictly positive and strictly decreasing there,
    with integral of its square over [1, inf) equal to 1/log 2.
    Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 1.0):
        raise DomainError("f_weight requires x >= 1")
    log_e2x = 2.0 + np.log(arr)
    out = 1.0 / np.sqrt(arr * log_e2x * np.log(log_e2x) ** 2)
    return float(out) if np.isscalar(x) else out


def tale_weights(x_ad: np.ndarray, s0: float) -> tuple[np.ndarray, np.ndarray]:
    """Predictable weights and the running sum they are derived from.

    ``s[i] = s0 + sum_{t<=i} x_ad[t]^2`` and ``w[i] = f(s[i]/s0) * x_ad[i]
    / sqrt(s0)``, so ``w[i]`` depends only on the adaptive column up to and
    including time i.  Since f is decreasing, sum(w^2) is bounded by the
    integral of f^2, i.e. by 1/log 2, for every input.
    """
    if not s0 > 0:
        raise ValueError("s0 must be positive")
    x_ad = np.asarray(x_ad, dtype=float).reshape(-1)
    s = s0 + np.cumsum(x_ad**2)
    w = f_weight(s / s0) * x_ad / math.sqrt(s0)
    return w, s


def estimate_sigma(ds: AdaptiveDataset) -> float:
    """Residual noise scale sqrt(RSS / (n - d)) from the full least-squares fit."""
    n, d = ds.X.shape
    if n <= d:
        raise RankDeficient(min(n, d), d + 1)
    coef, _ = solve_least_squares(ds.X, ds.y)
    resid = ds.y - ds.X @ coef
    return math.sqrt(float(resid @ resid) / (n - d))


def _z(alpha: float) -> float:
    return float(stats.norm.ppf(1.0 - alpha / 2.0))


def _normal_ci(estimate: np.ndarray, stderr: np.ndarray, alpha_levels) -> dict:
    return {
        float(a): (estimate - _z(a) * stderr, estimate + _z(a) * stderr)
        for a in alpha_levels
    }


def ols_report(ds: AdaptiveDataset, alpha_levels=(), sigma: float | None = None) -> EstimateReport:
    """Plain least squares with per-coordinate normal CIs.

    ``stderr[j] = sigma_hat * sqrt((X'X)^{-1}_{jj})``, using the supplied
    noise level when given and the residual estimate otherwise.
    """
    coef, gram_inv = solve_least_squares(ds.X, ds.y)
    sigma_hat = estimate_sigma(ds) if sigma is None else float(sigma)
    stderr = sigma_hat * np.sqrt(np.diag(gram_inv))
    return EstimateReport(
        method="OLS",
        estimate=coef,
        target_idx=tuple(range(ds.d)),
        stderr=stderr,
        ci=_normal_ci(coef, stderr, alpha_levels),
    )


def centered_ols(ds: AdaptiveDataset, alpha_levels=(), sigma: float | None = None) -> EstimateReport:
    """Least squares on column-centered covariates and mean-centered response.

    Requires n >= d + 1 since centering absorbs one degree of freedom.  The
    coefficients coincide with the non-intercept coefficients of plain
    least squares on (X, 1_n); standard errors come from the centered Gram
    inverse with the residual scale on n - d - 1 degrees of freedom.
    """
    n, d = ds.X.shape
    if n < d + 1:
        raise RankDeficient(min(n, d), d + 1)
    Xc = center_columns(ds.X)
    yc = ds.y - ds.y.mean()
    coef, gram_inv = solve_least_squares(Xc, yc)
    if sigma is None:
        resid = yc - Xc @ coef
        sigma_hat = math.sqrt(float(resid @ resid) / (n - d - 1))
    else:
        sigma_hat = float(sigma)
    stderr = sigma_hat * np.sqrt(np.diag(gram_inv))
    return EstimateReport(
        method="CenteredOLS",
        estimate=coef,
        target_idx=tuple(range(d)),
        stderr=stderr,
        ci=_normal_ci(coef, stderr, alpha_levels),
    )


def tale_estimate(
    ds: AdaptiveDataset,
    cfg: TaleConfig,
    prior_nad: np.ndarray | None = None,
) -> TaleResult:
    """Two-stage adaptive linear estimating-equation estimator.

    Restricted to a single adaptive coordinate.  With weights ``w`` from
    :func:`tale_weights` and a plug-in estimate ``prior_nad`` of the
    non-adaptive coefficients (the least-squares fit by default), solves

        sum_i w_i * (y_i - x_ad_i * theta - x_nad_i' prior_nad) = 0

    for the scalar ``theta``.  The equation is affine, so the solution is
    the closed-form ratio; it is unique iff ``sum_i w_i x_ad_i != 0``.
    The pivot (sum w_i x_ad_i) (theta_hat - theta*) / (sigma_hat
    sqrt(sum w_i^2)) is asymptotically standard normal, giving
    ``stderr = sigma_hat * sqrt(sum w_i^2) / |sum w_i x_ad_i|``.
    """
    if len(ds.adaptive_idx) != 1:
        raise ValueError("tale_estimate handles exactly one adaptive coordinate")
    n, d = ds.X.shape
    if n <= d:
        raise RankDeficient(min(n, d), d + 1)
    target = ds.adaptive_idx[0]
    x_ad = ds.X[:, target]
    X_nad = ds.X_nad

    if prior_nad is None:
        coef, _ = solve_least_squares(ds.X, ds.y)
        prior_nad = coef[list(ds.nonadaptive_idx)]
    else:
        prior_nad = np.asarray(prior_nad, dtype=float).reshape(-1)

    w, _ = tale_weights(x_ad, cfg.s0)
    design_sum = float(w @ x_ad)
    if design_sum == 0.0:
        raise DegenerateDesign("sum of w_i * x_ad_i vanishes; estimating equation is degenerate")
    partial = ds.y - X_nad @ prior_nad
    theta_hat = float(w @ partial) / design_sum

    sigma_hat = estimate_sigma(ds) if cfg.sigma is None else float(cfg.sigma)
    weight_sum_sq = float(w @ w)
    stderr = sigma_hat * math.sqrt(weight_sum_sq) / abs(design_sum)
    ci = {
        float(a): (theta_hat - _z(a) * stderr, theta_hat + _z(a) * stderr)
        for a in cfg.alpha_levels
    }
    return TaleResult(
        theta_hat=theta_hat,
        weight_sum_sq=weight_sum_sq,
        design_sum=design_sum,
        stderr=stderr,
        ci=ci,
        noise_scale=sigma_hat * math.sqrt(weight_sum_sq),
        bias_scale=float(np.linalg.norm(w @ X_nad)),
    )


def tale_report(ds: AdaptiveDataset, cfg: TaleConfig) -> EstimateReport:
    """EstimateReport view of :func:`tale_estimate` for the harness."""
    res = tale_estimate(ds, cfg)
    target = ds.adaptive_idx[0]
    est = np.array([res.theta_hat])
    return EstimateReport(
        method="TALE",
        estimate=est,
        target_idx=(target,),
        stderr=np.array([res.stderr]),
        ci={a: (np.array([lo]), np.array([hi])) for a, (lo, hi) in res.ci.items()},
    )


def concentration_ci(
    ds: AdaptiveDataset,
    target: int,
    delta,
    sigma: float | None = None,
) -> EstimateReport:
    """Anytime-valid interval from a self-normalized martingale bound.

    Centered at the least-squares estimate.  With the ridge-regularized
    matrix V = X'X + I, the half width for coordinate j at confidence
    1 - delta is sqrt(V^{-1}_jj * 2 sigma_hat^2 * log(det(V)^{1/2} /
    delta)).  The interval is conservative by construction and widens
    monotonically as delta shrinks.  ``delta`` may be a scalar or a
    sequence of levels.
    """
    deltas = [float(delta)] if np.isscalar(delta) else [float(x) for x in delta]
    if any(not 0.0 < x < 1.0 for x in deltas):
        raise ValueError("delta must lie in (0, 1)")
    coef, _ = solve_least_squares(ds.X, ds.y)
    sigma_hat = estimate_sigma(ds) if sigma is None else float(sigma)
    V = ds.X.T @ ds.X + np.eye(ds.d)
    v_jj = float(np.linalg.inv(V)[target, target])
    _, logdet = np.linalg.slogdet(V)
    est = np.array([coef[target]])
    ci = {}
    for dl in deltas:
        radius = math.sqrt(v_jj * 2.0 * sigma_hat**2 * (0.5 * logdet + math.log(1.0 / dl)))
        ci[dl] = (est - radius, est + radius)
    return EstimateReport(
        method="ConcentrationCI",
        estimate=est,
        target_idx=(int(target),),
        stderr=None,
        ci=ci,
    )


def w_decorrelation(
    ds: AdaptiveDataset,
    lambda_: float,
    alpha_levels=(),
    sigma: float | None = None,
) -> EstimateReport:
    """Decorrelated least squares with online-built whitening matrix.

    Columns of the decorrelating matrix W are produced by the recursion
    ``w_t = (I - sum_{s<t} w_s x_s') x_t / (lambda + ||x_t||^2)`` over the
    rows in collection order; the estimate is ``theta_hat + W (y - X
    theta_hat)`` with variance ``sigma_hat^2 * diag(W W')``.  As
    ``lambda -> inf`` the correction vanishes and plain least squares is
    recovered.
    """
    if not lambda_ > 0:
        raise ValueError("lambda_ must be positive")
    coef, _ = solve_least_squares(ds.X, ds.y)
    resid = ds.y - ds.X @ coef
    d = ds.d
    M = np.eye(d)
    correction = np.zeros(d)
    var_diag = np.zeros(d)
    for t in range(ds.n):
        x = ds.X[t]
        w = M @ x / (lambda_ + x @ x)
        M -= np.outer(w, x)
        correction += w * resid[t]
        var_diag += w * w
    estimate = coef + correction
    sigma_hat = estimate_sigma(ds) if sigma is None else float(sigma)
    stderr = sigma_hat * np.sqrt(var_diag)
    return EstimateReport(
        method="WDecorrelation",
        estimate=estimate,
        target_idx=tuple(range(d)),
        stderr=stderr,
        ci=_normal_ci(estimate, stderr, alpha_levels),
    )


def min_gram_eigenvalue_quantile(
    gen: GeneratorConfig, n_mc: int, quantile: float, seed: int
) -> float:
    """Empirical quantile of the smallest eigenvalue of X'X over independent
    draws of the covariate matrix from ``gen``."""
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    vals = np.empty(n_mc)
    for r in range(n_mc):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(r,))
        draw_seed = int(ss.generate_state(1, np.uint64)[0])
        ds = generate(replace(gen, seed=draw_seed))
        vals[r] = np.linalg.eigvalsh(ds.X.T @ ds.X)[0]
    return float(np.quantile(vals, quantile))


def calibrate_wdecorr_lambda(
    spec: ModelSpec, gen: GeneratorConfig, n_mc: int, seed: int
) -> float:
    """Decorrelation strength: the empirical 1/n quantile of the smallest
    eigenvalue of X'X over ``n_mc`` independent covariate draws, divided by
    log n."""
    if n_mc < 100:
        raise ValueError("n_mc must be at least 100")
    if spec.n < 2:
        raise ValueError("calibration requires n >= 2")
    gen = replace(gen, spec=spec)
    return min_gram_eigenvalue_quantile(gen, n_mc, 1.0 / spec.n, seed) / math.log(spec.n)
