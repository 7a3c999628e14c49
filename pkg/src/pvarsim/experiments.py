"""Experiment drivers: single-increment regressions, conditional p-variation
histogram sums, and the crossing/uniform-partition statistics, with CSV emission.

Every run is a pure function of (config, master seed): per-realization seeds
come from the fixed 64-bit mixing function and aggregation is keyed by
realization index, so outputs are byte-identical for any worker count.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .config import ExperimentConfig
from .csvio import atomic_write_text, write_csv
from .errors import ConfigError, PvarsimError
from .grids import Grid
from .median_flow import inner_start_values, scale_lamperti_inv
from .paths import default_half_length, sample_bm, sample_fbm
from .pvariation import estimate_c, theorem1_statistic, theorem2_statistic
from .rng import TAG_BM, TAG_DRIVER, TAG_FBM, TAG_INNER, TAG_ORACLE, generator, mix_seed

log = logging.getLogger(__name__)

_Z95 = 1.959963984540054  # two-sided 95% normal quantile

INCREMENTS_HEADER = ["seed", "p", "delta_tau", "mean_abs_incr_pow", "ci_low", "ci_high"]
FITS_HEADER = ["p", "slope", "intercept", "ssr", "n_points"]
PVAR_HEADER = ["seed", "p", "mesh", "value"]
ESTIMATE_HEADER = ["seed", "p", "mesh_or_delta", "partition_kind", "value"]
MEDIANS_HEADER = ["seed", "T", "delta_tau", "m_T", "cond_exp", "abs_increment"]


def apply_thread_cap(threads: int = 0) -> int:
    """Cap numba workers: PVAR_THREADS env wins, 0 means auto."""
    cap = threads
    env = os.environ.get("PVAR_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"PVAR_THREADS must be an integer, got {env!r}") from exc
    import numba

    avail = int(numba.config.NUMBA_NUM_THREADS)
    n = avail if cap <= 0 else max(1, min(cap, avail))
    numba.set_num_threads(n)
    return n


# ---------------------------------------------------------------------------
# regression and intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegressionFit:
    """Least-squares line through log-log points."""

    slope: float
    intercept: float
    ssr: float
    n_points: int

    def __post_init__(self):
        if self.ssr < 0:
            raise PvarsimError("ssr must be nonnegative")


def fit_loglog(points) -> RegressionFit:
    """OLS on (log10 x, log10 y); SSR reported in log space.

    Input points are sorted internally, so the fit is exactly invariant
    under reordering.  Two points fit exactly (ssr = 0).
    """
    pts = sorted((float(x), float(y)) for x, y in points)
    if len(pts) < 2:
        raise PvarsimError("fit_loglog needs at least 2 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise PvarsimError("fit_loglog needs strictly positive coordinates")
    lx = np.log10([x for x, _ in pts])
    ly = np.log10([y for _, y in pts])
    xm, ym = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - xm) ** 2))
    if sxx == 0.0:
        raise PvarsimError("fit_loglog needs at least two distinct x values")
    slope = float(np.sum((lx - xm) * (ly - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ssr = 0.0 if len(pts) == 2 else float(np.sum((ly - (slope * lx + intercept)) ** 2))
    return RegressionFit(slope=slope, intercept=intercept, ssr=ssr, n_points=len(pts))


def mean_ci(values, level_z: float = _Z95) -> tuple[float, float, float]:
    """Sample mean with a normal-approximation confidence interval."""
    v = np.asarray(values, dtype=np.float64)
    mean = float(v.mean())
    half = float(level_z * v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return mean, mean - half, mean + half


# ---------------------------------------------------------------------------
# single-increment experiment (log-log regressions over delta_tau)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleIncrementResult:
    seeds: np.ndarray  # per-realization driver seeds
    increments: np.ndarray  # (realizations, n_delta_tau) |cond_exp - m|
    medians: np.ndarray  # (realizations,) m at the horizon
    cond_exps: np.ndarray  # (realizations, n_delta_tau)
    summary: dict  # (p, delta_tau) -> (mean, lo, hi)
    fits: dict  # p -> RegressionFit or None
    files: dict


def _forward_increments(cfg: ExperimentConfig, r: int, n_steps: int) -> np.ndarray:
    seed = mix_seed(cfg.master_seed, TAG_DRIVER, r)
    if cfg.degenerate_zero_drivers:
        return np.zeros(n_steps)
    g = generator(seed)
    root = np.sqrt(cfg.time_step)
    if cfg.driver_kind == "rademacher":
        return np.where(g.integers(0, 2, size=n_steps) == 1, root, -root)
    return g.standard_normal(n_steps) * root


def single_increment_experiment(
    cfg: ExperimentConfig, outdir: str | Path | None = None
) -> SingleIncrementResult:
    """|E[m_{T+dtau} | path to T] - m_T| per realization and delta_tau,
    then per-(p, dtau) Monte Carlo means with 95% CIs and per-p fits.
    """
    apply_thread_cap(cfg.threads)
    n_steps = int(round(cfg.horizon / cfg.time_step))
    n_tau = len(cfg.delta_taus)
    R = cfg.realizations
    seeds = np.array([mix_seed(cfg.master_seed, TAG_DRIVER, r) for r in range(R)],
                     dtype=np.uint64)

    incr = np.empty((R, n_tau))
    cond = np.empty((R, n_tau))
    meds = np.empty(R)
    chunk = max(1, min(R, int(32 * 1e6 / max(n_steps, 1))))  # ~256 MB of drivers
    for lo in range(0, R, chunk):
        hi = min(R, lo + chunk)
        rev = np.empty((hi - lo, n_steps))
        for r in range(lo, hi):
            fwd = _forward_increments(cfg, r, n_steps)
            rev[r - lo] = -fwd[::-1]
        for j, dtau in enumerate(cfg.delta_taus):
            states0 = np.empty((hi - lo, 1 + cfg.inner_n))
            states0[:, 0] = 0.0
            for r in range(lo, hi):
                states0[r - lo, 1:] = inner_start_values(
                    dtau,
                    cfg.time_step,
                    cfg.inner_n,
                    mix_seed(cfg.master_seed, TAG_INNER, r, j),
                    inner_steps=cfg.inner_steps or None,
                    antithetic=cfg.antithetic,
                    kind=cfg.driver_kind,
                )
            ends = _kernels.propagate_batch(rev, states0)
            m_block = scale_lamperti_inv(ends[:, 0])
            if cfg.average_raw_F:
                ce_block = scale_lamperti_inv(ends[:, 1:].mean(axis=1))
            else:
                ce_block = np.mean(scale_lamperti_inv(ends[:, 1:]), axis=1)
            meds[lo:hi] = m_block
            cond[lo:hi, j] = ce_block
            incr[lo:hi, j] = np.abs(ce_block - m_block)

    summary = {}
    fits = {}
    for p in cfg.ps:
        pts = []
        for j, dtau in enumerate(cfg.delta_taus):
            stat = mean_ci(incr[:, j] ** p)
            summary[(p, dtau)] = stat
            if stat[0] > 0:
                pts.append((dtau, stat[0]))
        if len(pts) >= 2:
            fits[p] = fit_loglog(pts)
        else:
            fits[p] = None
            log.warning("p=%g: fewer than 2 positive means, no fit emitted", p)

    files = {}
    if outdir is not None:
        outdir = Path(outdir)
        files["medians"] = write_csv(
            outdir / "medians.csv",
            MEDIANS_HEADER,
            (
                (int(seeds[r]), cfg.horizon, dtau, meds[r], cond[r, j], incr[r, j])
                for j, dtau in enumerate(cfg.delta_taus)
                for r in range(R)
            ),
        )
        files["increments"] = write_csv(
            outdir / "increments.csv",
            INCREMENTS_HEADER,
            (
                (cfg.master_seed, p, dtau, *summary[(p, dtau)])
                for p in cfg.ps
                for dtau in cfg.delta_taus
            ),
        )
        files["fits"] = write_csv(
            outdir / "fits.csv",
            FITS_HEADER,
            (
                (p, f.slope, f.intercept, f.ssr, f.n_points)
                for p, f in fits.items()
                if f is not None
            ),
        )
        files["meta"] = _write_meta(outdir / "increments_meta.txt", cfg, extra=[
            "inner_step_rule = min(time_step, delta_tau)",
            "average_order = raw_flow_then_transform"
            if cfg.average_raw_F else "transform_then_average",
        ])
    return SingleIncrementResult(
        seeds=seeds, increments=incr, medians=meds, cond_exps=cond,
        summary=summary, fits=fits, files=files,
    )


# ---------------------------------------------------------------------------
# conditional p-variation histogram experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HistogramResult:
    values: dict  # (p, mesh) -> np.ndarray of per-trajectory sums
    files: dict


def pvar_histogram_experiment(
    cfg: ExperimentConfig, outdir: str | Path | None = None
) -> HistogramResult:
    """Per-trajectory conditional p-variation sums at t = horizon.

    The partition mesh equals the trajectory grid mesh, so the one-step
    conditional expectation is the exact two-point lattice average; sums
    are emitted raw, one row per (trajectory, p), for histogramming.
    """
    apply_thread_cap(cfg.threads)
    ps = np.array(cfg.hist_ps, dtype=np.float64)
    values: dict = {}
    rows = []
    for mi, mesh in enumerate(cfg.meshes):
        n = int(round(cfg.horizon / mesh))
        root = np.sqrt(mesh)
        J = cfg.trajectories
        fwd = np.empty((J, n))
        tr_seeds = np.empty(J, dtype=np.uint64)
        for j in range(J):
            s = mix_seed(cfg.master_seed, TAG_DRIVER, mi, j)
            tr_seeds[j] = s
            if cfg.degenerate_zero_drivers:
                fwd[j] = 0.0
            else:
                g = generator(s)
                fwd[j] = np.where(g.integers(0, 2, size=n) == 1, root, -root)
        sums = _kernels.conditional_pvar_sums(fwd, root, ps)
        for qi, p in enumerate(cfg.hist_ps):
            values[(p, mesh)] = sums[:, qi].copy()
            rows.extend(
                (int(tr_seeds[j]), p, mesh, sums[j, qi]) for j in range(J)
            )
    files = {}
    if outdir is not None:
        outdir = Path(outdir)
        files["pvar"] = write_csv(outdir / "pvar.csv", PVAR_HEADER, rows)
        files["meta"] = _write_meta(outdir / "pvar_meta.txt", cfg, extra=[
            "partition = trajectory grid (mesh == time step per mesh entry)",
            "cond_expectation = exact two-point lattice average",
        ])
    return HistogramResult(values=values, files=files)


# ---------------------------------------------------------------------------
# fBM theorem statistics experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremResult:
    c_value: float
    c_stderr: float
    p0: float
    thm2_sums: dict  # delta -> np.ndarray over paths
    thm1_means: dict  # (p, mesh) -> mean over paths
    files: dict


def fbm_theorem_experiment(
    cfg: ExperimentConfig, outdir: str | Path | None = None
) -> TheoremResult:
    """Crossing-time sums, uniform-partition sums, and the c estimate."""
    apply_thread_cap(cfg.threads)
    p0 = 2.0 / (1.0 + cfg.hurst)
    c = estimate_c(cfg.hurst, cfg.c_paths, step=cfg.thm2_step_ratio,
                   master_seed=mix_seed(cfg.master_seed, TAG_ORACLE))

    thm2_rows = []
    thm2_sums: dict = {}
    horizon = 2.0 * cfg.t  # truncation rule: simulate to twice the target time
    for di, delta in enumerate(cfg.deltas):
        step = delta * delta * cfg.thm2_step_ratio
        n_cells = int(round(horizon / step))
        tgrid = Grid.uniform_grid(0.0, horizon, n_cells)
        half = default_half_length(horizon)
        sgrid = Grid.symmetric_grid(half, int(np.ceil(half / np.sqrt(step))))
        vals = np.empty(cfg.thm2_paths)
        for i in range(cfg.thm2_paths):
            bs = mix_seed(cfg.master_seed, TAG_BM, di, i)
            fs = mix_seed(cfg.master_seed, TAG_FBM, di, i)
            bm = sample_bm(tgrid, bs)
            fbm = sample_fbm(sgrid, cfg.hurst, fs)
            vals[i] = theorem2_statistic(fbm, bm, delta, cfg.t)
            thm2_rows.append((bs, p0, delta, "crossing", vals[i]))
        thm2_sums[delta] = vals

    thm1_acc: dict = {}
    thm1_rows = []
    n_cells = int(round(cfg.t / cfg.t1_time_step))
    tgrid = Grid.uniform_grid(0.0, cfg.t, n_cells)
    half = default_half_length(cfg.t)
    sgrid = Grid.symmetric_grid(half, int(np.ceil(half / np.sqrt(cfg.t1_time_step))))
    for i in range(cfg.t1_paths):
        bs = mix_seed(cfg.master_seed, TAG_BM, len(cfg.deltas), i)
        fs = mix_seed(cfg.master_seed, TAG_FBM, len(cfg.deltas), i)
        bm = sample_bm(tgrid, bs)
        fbm = sample_fbm(sgrid, cfg.hurst, fs)
        for p in cfg.t1_ps:
            for est in theorem1_statistic(fbm, bm, cfg.t1_meshes, p, cfg.t):
                thm1_acc.setdefault((p, est.parameter), []).append(est.value)
                thm1_rows.append((bs, p, est.parameter, "uniform", est.value))
    thm1_means = {key: float(np.mean(v)) for key, v in thm1_acc.items()}

    files = {}
    if outdir is not None:
        outdir = Path(outdir)
        files["thm2"] = write_csv(outdir / "crossing_sums.csv", ESTIMATE_HEADER, thm2_rows)
        files["thm1"] = write_csv(outdir / "uniform_sums.csv", ESTIMATE_HEADER, thm1_rows)
        files["summary"] = write_csv(
            outdir / "summary.csv",
            ["quantity", "value"],
            [("c_hat", c.value), ("c_stderr", c.stderr), ("p0", p0),
             ("c_paths", c.n_paths), ("c_resampled", c.resampled)]
            + [(f"thm2_mean_delta_{delta:g}", float(np.mean(v)))
               for delta, v in thm2_sums.items()],
        )
        files["meta"] = _write_meta(outdir / "theorem_meta.txt", cfg, extra=[
            "thm2_horizon_rule = 2*t (last crossing increment kept only if observed)",
            "thm2_step_rule = delta^2/100",
        ])
    return TheoremResult(
        c_value=c.value, c_stderr=c.stderr, p0=p0,
        thm2_sums=thm2_sums, thm1_means=thm1_means, files=files,
    )


def _write_meta(dest: Path, cfg: ExperimentConfig, extra: list[str] | None = None) -> Path:
    lines = cfg.metadata_lines() + (extra or [])
    return atomic_write_text(dest, "\n".join(lines) + "\n")
