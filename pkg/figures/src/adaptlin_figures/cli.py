"""Render figures from harness CSV outputs.

Examples:
    plot --figure fig2-coverage --in run/summary.csv --out coverage.png
    plot --figure fig2-width --in run/summary.csv --out width.png --exclude ConcentrationCI
    plot --figure fig3-hist --in run/replications.csv --out hist.png
    plot --figure fig1 --in sweep/summary.csv --out sweep.png
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURES, PlotSpec, render
from .schema import SchemaError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("--figure", required=True, choices=FIGURES)
    parser.add_argument("--in", dest="input", required=True, help="summary.csv or replications.csv")
    parser.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    parser.add_argument("--no-band", action="store_true", help="suppress the +-1 sd bands")
    parser.add_argument("--bins", type=int, default=50, help="histogram bins (default 50)")
    parser.add_argument("--method", action="append", help="restrict to a method (repeatable)")
    parser.add_argument("--exclude", action="append", help="drop a method (repeatable)")
    parser.add_argument(
        "--column",
        default="mean_scaled_mse",
        help="summary column for fig1 (e.g. mean_block_scaled_mse)",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = PlotSpec(
        figure=args.figure,
        input=args.input,
        output=args.out,
        band=not args.no_band,
        bins=args.bins,
        methods=tuple(args.method or ()),
        exclude=tuple(args.exclude or ()),
        column=args.column,
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(str(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
