"""Experiment driver: deterministic replication loop, CSV persistence, presets.

Seed scheme (documented contract): every random draw in an experiment is
derived from the master seed through ``SeedSequence(master, spawn_key)``
with fixed spawn keys

* ``(k, rep, 0)`` -> dataset generation for replication ``rep`` at sweep
  value ``k``;
* ``(k, rep, 1)`` -> per-replication parameter draw (theta policies that
  redraw coefficients);
* ``(k, 0, 2)``   -> decorrelation-strength calibration for sweep value k.

Replications therefore never share streams, adding replications leaves
earlier ones unchanged, and any worker count produces identical output.

Output files per run: ``replications.csv`` (one row per replication,
method and level; fixed column set; floats at 17 significant digits),
``summary.csv`` (per-cell aggregates), ``config.echo`` (canonical TOML of
the resolved config) and ``manifest.json`` (versions, seeds, wall time).
The ``runtime_ms`` column in replications.csv is left empty so the file is
byte-reproducible; wall-clock timings live in the manifest.
"""

from __future__ import annotations

import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._config import ConfigError, ExperimentConfig, emit_config
from .estimators import (
    TaleConfig,
    calibrate_wdecorr_lambda,
    centered_ols,
    concentration_ci,
    default_s0,
    estimate_sigma,
    ols_report,
    tale_report,
    w_decorrelation,
)
from .generators import GeneratorConfig, generate
from .metrics import coverage_and_width, ks_distance, scaled_mse
from .model_core import ModelSpec, center_columns
from .records import MethodResult, ReplicationRecord

REPLICATION_COLUMNS = (
    "experiment,name,k,rep,method,coord,estimate,stderr,alpha,ci_lo,ci_hi,"
    "covered,scaled_mse,std_err_pivot,sigma_hat,runtime_ms"
)
SUMMARY_COLUMNS = (
    "experiment,name,k,method,coord,alpha,nominal,coverage,coverage_se,"
    "mean_width,sd_width,mean_scaled_mse,sd_scaled_mse,mean_block_scaled_mse,"
    "ks_distance,n_reps"
)

METHOD_TAGS = {
    "ols": "OLS",
    "centered_ols": "CenteredOLS",
    "tale": "TALE",
    "concentration": "ConcentrationCI",
    "w_decorrelation": "WDecorrelation",
}


class IoError(OSError):
    """Failed to write experiment outputs."""


def derive_seed(master_seed: int, *key: int) -> int:
    """64-bit seed derived from the master seed and a fixed spawn key."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(x) for x in key))
    return int(ss.generate_state(1, np.uint64)[0])


def _theta_for(config: ExperimentConfig, k: int, rep: int) -> np.ndarray:
    if isinstance(config.theta, tuple):
        return np.asarray(config.theta, dtype=float)
    if config.theta == "null_treatment":
        theta = np.full(config.d, 1.0 / math.sqrt(config.d - 1))
        theta[0] = 0.0
        return theta
    # unit_first_gaussian: leading coefficient 1, the rest redrawn N(0,1)
    # per replication from the dedicated stream
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.master_seed, spawn_key=(k, rep, 1))
    )
    theta = rng.standard_normal(config.d)
    theta[0] = 1.0
    return theta


def _generator_for(config: ExperimentConfig, k: int, rep: int) -> GeneratorConfig:
    theta = _theta_for(config, k, rep)
    spec = ModelSpec(theta_star=theta, sigma=config.sigma, n=config.n, d=config.d, k=k)
    return GeneratorConfig(
        kind=config.kind,
        spec=spec,
        p_exploit=config.p_exploit,
        nonadaptive_law=config.nonadaptive_law,
        seed=derive_seed(config.master_seed, k, rep, 0),
    )


def _tale_s0(config: ExperimentConfig) -> float:
    return default_s0(config.n) if config.tale_s0 == "auto" else float(config.tale_s0)


def _pick(report, coord: int) -> tuple[float, float, dict]:
    """Extract (estimate, stderr, ci) for one model coordinate from a report."""
    pos = report.target_idx.index(coord)
    est = float(report.estimate[pos])
    se = float(report.stderr[pos]) if report.stderr is not None else float("nan")
    ci = {a: (float(lo[pos]), float(hi[pos])) for a, (lo, hi) in report.ci.items()}
    return est, se, ci


def run_replication(config: ExperimentConfig, k: int, rep: int, wd_lambda: float | None) -> ReplicationRecord:
    """Generate one dataset and evaluate every configured estimator on it.

    Per-coordinate scaled MSE uses the raw design for all methods except
    centered least squares, whose error is weighted by the centered design
    (the scale on which that estimator operates).  The block metric does
    the same over the whole adaptive index set for full-vector methods.
    """
    gen = _generator_for(config, k, rep)
    theta = gen.spec.theta_star
    ds = generate(gen)
    target = config.target_coord
    truth = float(theta[target])
    sigma = config.sigma if config.sigma_mode == "known" else None
    alphas = config.alpha_grid
    Xc = None
    record = ReplicationRecord(rep=rep, k=k, target_coord=target, target_true=truth)

    for method in config.methods:
        t0 = time.perf_counter()
        block_idx = ds.adaptive_idx
        block = float("nan")
        if method == "ols":
            rpt = ols_report(ds, alphas, sigma=sigma)
            est, se, ci = _pick(rpt, target)
            smse = scaled_mse([est], [truth], ds.X, [target])
            if block_idx:
                block = scaled_mse(
                    rpt.estimate[list(block_idx)], theta[list(block_idx)], ds.X, block_idx
                )
        elif method == "centered_ols":
            rpt = centered_ols(ds, alphas, sigma=sigma)
            est, se, ci = _pick(rpt, target)
            if Xc is None:
                Xc = center_columns(ds.X)
            smse = scaled_mse([est], [truth], Xc, [target])
            if block_idx:
                block = scaled_mse(
                    rpt.estimate[list(block_idx)], theta[list(block_idx)], Xc, block_idx
                )
        elif method == "tale":
            rpt = tale_report(ds, TaleConfig(s0=_tale_s0(config), sigma=sigma, alpha_levels=alphas))
            est, se, ci = _pick(rpt, target)
            smse = scaled_mse([est], [truth], ds.X, [target])
        elif method == "concentration":
            rpt = concentration_ci(ds, target, alphas or (0.1,), sigma=sigma)
            est, se, ci = _pick(rpt, target)
            if not alphas:
                ci = {}
            smse = scaled_mse([est], [truth], ds.X, [target])
        elif method == "w_decorrelation":
            rpt = w_decorrelation(ds, wd_lambda, alphas, sigma=sigma)
            est, se, ci = _pick(rpt, target)
            smse = scaled_mse([est], [truth], ds.X, [target])
            if block_idx:
                block = scaled_mse(
                    rpt.estimate[list(block_idx)], theta[list(block_idx)], ds.X, block_idx
                )
        else:  # pragma: no cover - validated at config time
            raise ConfigError(f"unknown method {method!r}")
        elapsed_ms = (time.perf_counter() - t0) * 1e3
        sigma_hat = float(config.sigma) if sigma is not None else estimate_sigma(ds)
        pivot = (est - truth) / se if se and not math.isnan(se) and se > 0 else float("nan")
        record.methods[METHOD_TAGS[method]] = MethodResult(
            estimate=est,
            stderr=se,
            ci=ci,
            scaled_mse=smse,
            block_scaled_mse=block,
            std_pivot=pivot,
            sigma_hat=sigma_hat,
            runtime_ms=elapsed_ms,
        )
    return record


def _run_cell_chunk(args) -> list[ReplicationRecord]:
    config, k, reps, wd_lambda = args
    return [run_replication(config, k, rep, wd_lambda) for rep in reps]


def _calibrations(config: ExperimentConfig, k_values, quiet: bool) -> dict[int, float | None]:
    lams: dict[int, float | None] = {}
    for k in k_values:
        if "w_decorrelation" not in config.methods:
            lams[k] = None
        elif config.wdecorr_lambda is not None:
            lams[k] = float(config.wdecorr_lambda)
        else:
            gen = _generator_for(config, k, 0)
            lams[k] = calibrate_wdecorr_lambda(
                gen.spec, gen, config.wdecorr_calibration_draws, derive_seed(config.master_seed, k, 0, 2)
            )
            if not quiet:
                print(f"[{config.name}] k={k}: decorrelation lambda = {lams[k]:.6g}", file=sys.stderr)
    return lams


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.17g}"
    return str(value)


def _replication_rows(config: ExperimentConfig, records: list[ReplicationRecord]):
    coord_1based = config.target_coord + 1
    alphas = config.alpha_grid or (None,)
    for rec in records:
        for method in config.methods:
            tag = METHOD_TAGS[method]
            res = rec.methods[tag]
            for alpha in alphas:
                if alpha is None or alpha not in res.ci:
                    a, lo, hi, covered = None, None, None, None
                else:
                    a = alpha
                    lo, hi = res.ci[alpha]
                    covered = int(lo <= rec.target_true <= hi)
                yield (
                    config.name,
                    config.kind,
                    rec.k,
                    rec.rep,
                    tag,
                    coord_1based,
                    res.estimate,
                    res.stderr,
                    a,
                    lo,
                    hi,
                    covered,
                    res.scaled_mse,
                    res.std_pivot,
                    res.sigma_hat,
                    None,  # runtime_ms: blank so reruns are byte-identical
                )


def _mean_sd(values: list[float]) -> tuple[float, float]:
    vals = [v for v in values if not math.isnan(v)]
    if not vals:
        return float("nan"), float("nan")
    mean = math.fsum(vals) / len(vals)
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / len(vals)) if len(vals) > 1 else 0.0
    return mean, sd


def _summary_rows(config: ExperimentConfig, per_k: dict[int, list[ReplicationRecord]]):
    coord_1based = config.target_coord + 1
    for k, records in per_k.items():
        for method in config.methods:
            tag = METHOD_TAGS[method]
            mean_smse, sd_smse = _mean_sd([r.methods[tag].scaled_mse for r in records])
            mean_block, _ = _mean_sd([r.methods[tag].block_scaled_mse for r in records])
            pivots = [r.methods[tag].std_pivot for r in records if not math.isnan(r.methods[tag].std_pivot)]
            ks = ks_distance(pivots) if pivots else float("nan")
            base = (config.name, config.kind, k, tag, coord_1based)
            tail = (mean_smse, sd_smse, mean_block, ks, len(records))
            if not config.alpha_grid:
                yield base + (None, None, None, None, None, None) + tail
                continue
            for alpha in config.alpha_grid:
                cov = coverage_and_width(records, alpha, tag)
                yield base + (
                    alpha,
                    cov.nominal,
                    cov.empirical,
                    cov.empirical_se,
                    cov.mean_width,
                    cov.sd_width,
                ) + tail


def _write_csv(path: Path, header: str, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def run_experiment(
    config: ExperimentConfig,
    output_dir,
    jobs: int | None = None,
    quiet: bool = False,
) -> Path:
    """Run all replications (optionally across a k sweep) and persist results.

    Returns the results directory.  Identical config and seed produce
    byte-identical replications.csv and summary.csv for any worker count.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = jobs if jobs and jobs > 0 else (os.cpu_count() or 1)
    k_values = list(config.k_grid) if config.k_grid is not None else [config.k]
    t_start = time.perf_counter()
    lams = _calibrations(config, k_values, quiet)

    per_k: dict[int, list[ReplicationRecord]] = {}
    tasks = [(k, rep) for k in k_values for rep in range(config.n_reps)]
    if jobs == 1:
        results = [run_replication(config, k, rep, lams[k]) for k, rep in tasks]
    else:
        chunk = max(1, len(tasks) // (jobs * 8))
        chunks = [tasks[i : i + chunk] for i in range(0, len(tasks), chunk)]
        payloads = [
            (config, ch[0][0], [rep for _, rep in ch], lams[ch[0][0]])
            for ch in _split_on_k(chunks)
        ]
        results = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for batch in pool.map(_run_cell_chunk, payloads):
                results.extend(batch)
    results.sort(key=lambda r: (k_values.index(r.k), r.rep))
    for rec in results:
        per_k.setdefault(rec.k, []).append(rec)

    _write_csv(out / "replications.csv", REPLICATION_COLUMNS, _replication_rows(config, results))
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, _summary_rows(config, per_k))
    (out / "config.echo").write_text(emit_config(config))

    runtime_by_method: dict[str, float] = {}
    for method in config.methods:
        tag = METHOD_TAGS[method]
        mean_ms, _ = _mean_sd([r.methods[tag].runtime_ms for r in results])
        runtime_by_method[tag] = mean_ms
    manifest = {
        "experiment": config.name,
        "package": {"adaptlin": __version__},
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "master_seed": config.master_seed,
        "k_values": k_values,
        "n_reps": config.n_reps,
        "jobs": jobs,
        "wdecorr_lambda": {str(k): lams[k] for k in k_values},
        "mean_runtime_ms": runtime_by_method,
        "wall_time_s": round(time.perf_counter() - t_start, 3),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if not quiet:
        print(f"[{config.name}] wrote {out}", file=sys.stderr)
    return out


def _split_on_k(chunks):
    """Split row chunks further so each payload spans a single k value."""
    for ch in chunks:
        start = 0
        for i in range(1, len(ch) + 1):
            if i == len(ch) or ch[i][0] != ch[start][0]:
                yield ch[start:i]
                start = i


# Built-in experiment presets.  The *fig2* pair is the coverage comparison
# (one adaptive treatment coordinate, epsilon-greedy assignment); *fig1*
# sweeps the number of adaptive coordinates; *-desk* variants run the same
# designs at desk scale.
def _fig2(name: str, n: int, d: int) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        kind="treatment_assignment",
        n=n,
        d=d,
        k=1,
        sigma=0.3,
        theta="null_treatment",
        p_exploit=0.8,
        nonadaptive_law="standard_gaussian",
        methods=("tale", "ols", "concentration", "w_decorrelation"),
        sigma_mode="known",
        tale_s0="auto",
        wdecorr_calibration_draws=1000,
        wdecorr_lambda=None,
        n_reps=1000,
        master_seed=20250809,
        alpha_grid=(0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5),
        k_grid=None,
        target_coord=0,
    )


def _fig1(name: str, n: int, d: int, k_grid: tuple[int, ...], law: str, seed: int) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        kind="k_adaptive_greedy",
        n=n,
        d=d,
        k=k_grid[0],
        sigma=1.0,
        theta="unit_first_gaussian",
        p_exploit=0.8,
        nonadaptive_law=law,
        methods=("ols", "centered_ols"),
        sigma_mode="residual",
        tale_s0="auto",
        wdecorr_calibration_draws=1000,
        wdecorr_lambda=None,
        n_reps=20,
        master_seed=seed,
        alpha_grid=(),
        k_grid=k_grid,
        target_coord=0,
    )


PRESETS: dict[str, ExperimentConfig] = {
    "fig2-low": _fig2("fig2-low", 1000, 10),
    "fig2-high": _fig2("fig2-high", 500, 50),
    "fig1": _fig1("fig1", 1000, 300, tuple(range(2, 201, 3)), "uniform_sphere", 31415926),
    "fig1-shifted": _fig1(
        "fig1-shifted", 1000, 300, tuple(range(2, 201, 3)), "shifted_sphere", 31415926
    ),
    "fig1-desk": _fig1(
        "fig1-desk", 600, 120, (2,) + tuple(range(10, 81, 10)), "uniform_sphere", 27182818
    ),
}

PRESET_NOTES = {
    "fig2-low": "coverage/width comparison, n=1000 d=10 sigma=0.3, 1000 reps",
    "fig2-high": "coverage/width comparison, n=500 d=50 sigma=0.3, 1000 reps",
    "fig1": "scaled-MSE sweep over k=2..200 step 3, n=1000 d=300, 20 reps",
    "fig1-shifted": "same sweep with mean-shifted non-adaptive covariates",
    "fig1-desk": "reduced sweep k in {2,10,...,80}, n=600 d=120, 20 reps",
}
