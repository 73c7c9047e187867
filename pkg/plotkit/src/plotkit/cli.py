"""`plot-converge` command: study CSVs in, figure plus sidecar out."""

from __future__ import annotations

import argparse
import sys

from .render import PlotError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-converge",
        description="Render log-log MSE-vs-N figures from study CSVs.",
    )
    parser.add_argument("csvs", nargs="+", help="study CSV files")
    parser.add_argument("--out", required=True, help="figure output path (png/pdf)")
    parser.add_argument(
        "--sidecar",
        help="plotted-data sidecar path (default: <out>.data.csv)",
    )
    parser.add_argument(
        "--slope-ref",
        type=float,
        default=-1.0,
        help="slope of the dashed reference lines (default -1)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    sidecar = args.sidecar or args.out + ".data.csv"
    try:
        series = render(args.csvs, args.out, sidecar, args.slope_ref)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for s in series:
        print(f"{s.label}: fitted_slope={s.fitted_slope!r} points={len(s.raw_rows)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
