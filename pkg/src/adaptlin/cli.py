"""Command-line interface.

Subcommands: ``generate`` (emit one dataset as CSV plus a metadata
sidecar), ``estimate`` (run one estimator on a dataset CSV), ``experiment``
(run a full experiment from a config file or preset), ``report``
(concatenate summary.csv files across runs) and ``presets`` (list the
built-in experiment presets).

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
(rank-deficient design or degenerate estimating equation).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._config import ConfigError, ExperimentConfig, load_config
from .estimators import (
    DegenerateDesign,
    DomainError,
    TaleConfig,
    centered_ols,
    concentration_ci,
    default_s0,
    ols_report,
    tale_report,
    w_decorrelation,
)
from .generators import generate
from .harness import PRESET_NOTES, PRESETS, IoError, _generator_for, run_experiment
from .model_core import AdaptiveDataset, RankDeficient


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.17g}"


def _resolve_config(args) -> ExperimentConfig:
    if args.preset:
        try:
            config = PRESETS[args.preset]
        except KeyError:
            raise ConfigError(
                f"unknown preset {args.preset!r}; available: {', '.join(sorted(PRESETS))}"
            ) from None
    elif args.config:
        config = load_config(args.config)
    else:
        raise ConfigError("provide --config PATH or --preset NAME")
    overrides = {}
    if getattr(args, "reps", None):
        overrides["n_reps"] = args.reps
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    return dataclasses.replace(config, **overrides) if overrides else config


def _cmd_presets(_args) -> int:
    for name in sorted(PRESETS):
        print(f"{name:12s} {PRESET_NOTES[name]}")
    return 0


def _cmd_generate(args) -> int:
    config = _resolve_config(args)
    k = args.k if args.k is not None else (config.k_grid[0] if config.k_grid else config.k)
    gen = _generator_for(config, k, args.rep)
    if args.seed is not None:
        gen = dataclasses.replace(gen, seed=args.seed)
    ds = generate(gen)
    out = Path(args.out)
    header = "y," + ",".join(f"x{j}" for j in range(1, ds.d + 1))
    with open(out, "w", newline="") as fh:
        fh.write(header + "\n")
        for i in range(ds.n):
            fh.write(",".join(_fmt(v) for v in (ds.y[i], *ds.X[i])) + "\n")
    sidecar = {
        **ds.meta,
        "adaptive_columns": [j + 1 for j in ds.adaptive_idx],
        "n": ds.n,
        "d": ds.d,
        "sigma": gen.spec.sigma,
        "theta_star": [float(t) for t in gen.spec.theta_star],
    }
    Path(str(out) + ".meta.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        print(f"wrote {out} and {out}.meta.json", file=sys.stderr)
    return 0


def _load_dataset(path: str, adaptive_cols: str | None) -> AdaptiveDataset:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    y = data[:, 0]
    X = data[:, 1:]
    meta_path = Path(path + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    if adaptive_cols:
        idx = tuple(int(c) - 1 for c in adaptive_cols.split(","))
    else:
        idx = tuple(int(c) - 1 for c in meta.get("adaptive_columns", ()))
    return AdaptiveDataset(X, y, idx, meta)


def _cmd_estimate(args) -> int:
    ds = _load_dataset(args.dataset, args.adaptive_cols)
    alphas = tuple(args.alpha or ())
    sigma = args.sigma
    if args.method == "ols":
        rpt = ols_report(ds, alphas, sigma=sigma)
    elif args.method == "centered_ols":
        rpt = centered_ols(ds, alphas, sigma=sigma)
    elif args.method == "tale":
        s0 = args.s0 if args.s0 is not None else default_s0(ds.n)
        rpt = tale_report(ds, TaleConfig(s0=s0, sigma=sigma, alpha_levels=alphas))
    elif args.method == "concentration":
        deltas = alphas or (args.delta,)
        rpt = concentration_ci(ds, args.target - 1, deltas, sigma=sigma)
    else:  # w_decorrelation
        if args.lambda_ is None:
            raise ConfigError("w_decorrelation requires --lambda")
        rpt = w_decorrelation(ds, args.lambda_, alphas, sigma=sigma)

    lines = ["method,coord,estimate,stderr,alpha,ci_lo,ci_hi"]
    levels = sorted(rpt.ci) or [None]
    for pos, coord in enumerate(rpt.target_idx):
        se = rpt.stderr[pos] if rpt.stderr is not None else float("nan")
        for a in levels:
            lo, hi = (rpt.ci[a][0][pos], rpt.ci[a][1][pos]) if a is not None else (None, None)
            lines.append(
                ",".join(
                    [
                        rpt.method,
                        str(coord + 1),
                        _fmt(rpt.estimate[pos]),
                        _fmt(se),
                        _fmt(a),
                        _fmt(lo),
                        _fmt(hi),
                    ]
                )
            )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_experiment(args) -> int:
    config = _resolve_config(args)
    out = args.out or f"results/{config.name}"
    run_experiment(config, out, jobs=args.jobs, quiet=args.quiet)
    print(str(Path(out)))
    return 0


def _cmd_report(args) -> int:
    header = None
    lines = []
    for run in args.runs:
        path = Path(run)
        if path.is_dir():
            path = path / "summary.csv"
        content = path.read_text().splitlines()
        if not content:
            raise ConfigError(f"{path} is empty")
        if header is None:
            header = content[0]
        elif content[0] != header:
            raise ConfigError(f"{path} has a different summary schema")
        lines.extend(content[1:])
    text = (header or "") + "\n" + "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptlin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("--config", help="experiment config file (TOML)")
        p.add_argument("--preset", help="built-in preset name (see `presets`)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("presets", help="list built-in experiment presets")
    p.set_defaults(func=_cmd_presets)

    p = sub.add_parser("generate", help="emit one dataset as CSV + metadata sidecar")
    add_config_args(p)
    p.add_argument("--k", type=int, help="sweep value (defaults to the config's k)")
    p.add_argument("--rep", type=int, default=0, help="replication index (default 0)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("estimate", help="run one estimator on a dataset CSV")
    p.add_argument(
        "--method",
        required=True,
        choices=("ols", "centered_ols", "tale", "concentration", "w_decorrelation"),
    )
    p.add_argument("--dataset", required=True, help="dataset CSV (header y,x1..xd)")
    p.add_argument("--adaptive-cols", help="1-based adaptive column list, e.g. '1' or '1,2'")
    p.add_argument("--alpha", type=float, action="append", help="CI level (repeatable)")
    p.add_argument("--sigma", type=float, help="known noise level (default: residual estimate)")
    p.add_argument("--s0", type=float, help="weight-schedule origin (default log log n)")
    p.add_argument("--delta", type=float, default=0.1, help="confidence level for concentration")
    p.add_argument("--lambda", dest="lambda_", type=float, help="decorrelation strength")
    p.add_argument("--target", type=int, default=1, help="1-based coordinate for concentration")
    p.add_argument("--out", help="write the report CSV here instead of stdout")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("experiment", help="run an experiment from config or preset")
    add_config_args(p)
    p.add_argument("--out", help="results directory (default results/<name>)")
    p.add_argument("--reps", type=int, help="override the replication count")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("report", help="concatenate summary.csv files across runs")
    p.add_argument("runs", nargs="+", help="run directories or summary.csv paths")
    p.add_argument("--out", help="write the combined CSV here instead of stdout")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IoError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RankDeficient, DegenerateDesign, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
