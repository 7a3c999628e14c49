"""Command-line interface.

Exit codes: 0 success, 2 configuration error (bad flag, unreadable config,
invalid parameter range), 3 numerical failure.  All CSVs are written
atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import load_config
from .csvio import read_columns, write_csv, write_path_csv, write_zero_energy_csv
from .errors import ConfigError, DomainError, GridError, NumericalError, PvarsimError
from .experiments import (
    FITS_HEADER,
    MEDIANS_HEADER,
    fbm_theorem_experiment,
    fit_loglog,
    mean_ci,
    pvar_histogram_experiment,
    single_increment_experiment,
)
from .grids import Grid
from .median_flow import cond_exp_median, median_from_flow, rademacher_driver, reversed_driver
from .paths import default_half_length, sample_bm, sample_fbm
from .pvariation import crossing_times, theorem1_statistic
from .rng import TAG_DRIVER, mix_seed
from .zero_energy import zero_energy_path

log = logging.getLogger("pvarsim")


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid float list: {text!r}") from exc
    if not vals:
        raise ConfigError(f"empty float list: {text!r}")
    return vals


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, default=None, help="master seed")
    sp.add_argument("--config", type=str, default=None, help="key = value config file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pvarsim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen-fbm", help="sample fBM on [-L, L] and dump x,value CSV")
    sp.add_argument("--hurst", type=float, default=0.5)
    sp.add_argument("--half-length", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("zero-energy", help="dump t,A,martingale,F_of_B for one pair")
    sp.add_argument("--hurst", type=float, default=0.5)
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--time-step", type=float, default=1e-4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("pvar", help="uniform-partition power sums, one summary row per mesh")
    sp.add_argument("--H", dest="hurst", type=float, default=0.5)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--meshes", type=str, required=True)
    sp.add_argument("--paths", type=int, default=100)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--time-step", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("crossing", help="level-crossing partition of one Brownian path")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("median", help="reversed-flow medians and one-step cond. expectations")
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--delta-tau", type=float, default=1e-3)
    sp.add_argument("--paths", type=int, default=10)
    sp.add_argument("--inner-n", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("increments", help="single-increment regression experiment")
    _add_common(sp)
    sp.add_argument("--outdir", type=str, default=None)
    sp.add_argument("--realizations", type=int, default=None)
    sp.add_argument("--inner-n", dest="inner_n", type=int, default=None)
    sp.add_argument("--delta-taus", type=str, default=None)
    sp.add_argument("--time-step", dest="time_step", type=float, default=None)

    sp = sub.add_parser("histogram", help="conditional p-variation sums for histogramming")
    _add_common(sp)
    sp.add_argument("--outdir", type=str, default=None)
    sp.add_argument("--trajectories", type=int, default=None)
    sp.add_argument("--meshes", type=str, default=None)

    sp = sub.add_parser("fbm-theorems", help="crossing/uniform statistics and the c estimate")
    _add_common(sp)
    sp.add_argument("--outdir", type=str, default=None)
    sp.add_argument("--paths", dest="thm2_paths", type=int, default=None)
    sp.add_argument("--deltas", type=str, default=None)

    sp = sub.add_parser("fit", help="log-log OLS fit of an x,y CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", default=None)

    return ap


def _experiment_config(args, float_lists=(), renames=None):
    overrides = {}
    renames = renames or {}
    for key, val in vars(args).items():
        if key in ("command", "config", "outdir"):
            continue
        if val is None:
            continue
        name = renames.get(key, key)
        if key == "seed":
            name = "master_seed"
        if name in float_lists and isinstance(val, str):
            val = _parse_floats(val)
        overrides[name] = val
    return load_config(args.config, overrides)


def _run(args) -> int:
    cmd = args.command
    if cmd == "gen-fbm":
        n = int(round(args.half_length / args.step))
        grid = Grid.symmetric_grid(args.half_length, n)
        path = sample_fbm(grid, args.hurst, args.seed)
        write_path_csv(args.out, "x", path.grid.points, path.values)
    elif cmd == "zero-energy":
        n = int(round(args.horizon / args.time_step))
        bm = sample_bm(Grid.uniform_grid(0.0, args.horizon, n), mix_seed(args.seed, 2))
        half = default_half_length(args.horizon)
        sgrid = Grid.symmetric_grid(half, int(np.ceil(half / np.sqrt(args.time_step))))
        fbm = sample_fbm(sgrid, args.hurst, mix_seed(args.seed, 1))
        write_zero_energy_csv(args.out, zero_energy_path(fbm, bm))
    elif cmd == "pvar":
        meshes = _parse_floats(args.meshes)
        step = args.time_step if args.time_step else min(meshes) / 16.0
        n = int(round(args.t / step))
        tgrid = Grid.uniform_grid(0.0, args.t, n)
        half = default_half_length(args.t)
        sgrid = Grid.symmetric_grid(half, int(np.ceil(half / np.sqrt(step))))
        acc = {mesh: [] for mesh in meshes}
        for i in range(args.paths):
            bm = sample_bm(tgrid, mix_seed(args.seed, 2, i))
            fbm = sample_fbm(sgrid, args.hurst, mix_seed(args.seed, 1, i))
            for est in theorem1_statistic(fbm, bm, meshes, args.p, args.t):
                acc[est.parameter].append(est.value)
        rows = []
        for mesh in meshes:
            mean, lo, hi = mean_ci(acc[mesh])
            rows.append((args.p, mesh, mean, (hi - lo) / 2.0, args.paths))
        write_csv(args.out, ["p", "mesh", "mean", "stderr_95", "n_paths"], rows)
    elif cmd == "crossing":
        step = args.step if args.step else args.delta**2 / 100.0
        n = int(round(args.horizon / step))
        bm = sample_bm(Grid.uniform_grid(0.0, args.horizon, n), args.seed)
        part = crossing_times(bm, args.delta)
        write_csv(args.out, ["k", "tau"], enumerate(part.times))
    elif cmd == "median":
        n = int(round(args.horizon / args.dt))
        rows = []
        for i in range(args.paths):
            seed = mix_seed(args.seed, TAG_DRIVER, i)
            fwd = rademacher_driver(n, args.dt, seed).increments
            m = median_from_flow(reversed_driver(fwd, args.dt, seed=seed)).m
            ce = cond_exp_median(fwd, args.dt, args.delta_tau, args.inner_n, seed=seed)
            rows.append((seed, args.horizon, args.delta_tau, m, ce, abs(ce - m)))
        write_csv(args.out, MEDIANS_HEADER, rows)
    elif cmd == "increments":
        cfg = _experiment_config(args, float_lists=("delta_taus",))
        single_increment_experiment(cfg, args.outdir or cfg.outdir)
    elif cmd == "histogram":
        cfg = _experiment_config(args, float_lists=("meshes",))
        pvar_histogram_experiment(cfg, args.outdir or cfg.outdir)
    elif cmd == "fbm-theorems":
        cfg = _experiment_config(args, float_lists=("deltas",))
        fbm_theorem_experiment(cfg, args.outdir or cfg.outdir)
    elif cmd == "fit":
        x, y = read_columns(args.input, ["x", "y"])
        fit = fit_loglog(zip(x, y))
        row = [(float("nan"), fit.slope, fit.intercept, fit.ssr, fit.n_points)]
        if args.out:
            write_csv(args.out, FITS_HEADER, row)
        else:
            print(",".join(FITS_HEADER))
            print(f"nan,{fit.slope!r},{fit.intercept!r},{fit.ssr!r},{fit.n_points}")
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown subcommand {cmd!r}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _run(args)
    except (ConfigError, GridError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except PvarsimError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
