"""Plot figures from result CSVs: `aeroedge-plots --csv results.csv
--metric eta_bits_per_J --out fig.png --band std`."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render_sweep_figure, render_training_curves


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeroedge-plots",
        description="Render sweep and training-curve figures from CSVs")
    parser.add_argument("--csv", required=True, help="input CSV path")
    parser.add_argument("--metric", default=None,
                        help="metric column (default depends on --kind)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--band", choices=("std", "ci95"), default="std")
    parser.add_argument("--kind", choices=("sweep", "curves"), default="sweep")
    parser.add_argument("--window", type=int, default=None,
                        help="moving-average window for curves (render only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.kind == "sweep":
        metric = args.metric or "eta_bits_per_J"
        render_sweep_figure(FigureSpec(csv_path=args.csv, metric=metric,
                                       out_path=args.out, band=args.band))
    else:
        metric = args.metric or "mean_reward"
        render_training_curves(args.csv, metric=metric, out_path=args.out,
                               band=args.band, window=args.window)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
