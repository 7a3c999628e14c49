"""Standalone rendering commands; exit 0 on success, 2 on bad inputs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import PlotError
from .render import PlotSpec, render_histograms, render_loglog


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pvarsim-plots", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("loglog", help="log-log increment chart with bands and fits")
    sp.add_argument("--increments", required=True)
    sp.add_argument("--fits", required=True)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--name", default="increments_loglog")
    sp.add_argument("--guide-slope", type=float, default=1.0)

    sp = sub.add_parser("hist", help="histogram panel grid of p-variation sums")
    sp.add_argument("--pvar", required=True)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--name", default="pvar_histograms")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "loglog":
            spec = PlotSpec(
                kind="loglog_increments",
                inputs={"increments": args.increments, "fits": args.fits},
                output_image=Path(args.outdir) / f"{args.name}.png",
                guide_slope=args.guide_slope,
            )
            res = render_loglog(spec)
        else:
            spec = PlotSpec(
                kind="pvar_histograms",
                inputs={"pvar": args.pvar},
                output_image=Path(args.outdir) / f"{args.name}.png",
            )
            res = render_histograms(spec)
    except PlotError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(res.image)
    return 0


if __name__ == "__main__":
    sys.exit(main())
