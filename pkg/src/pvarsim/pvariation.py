"""Partition schemes and p-variation statistics.

Crossing detection is grid-restricted: a crossing is the first grid point at
or beyond the level, never interpolated, so crossing times commute exactly
with the dyadic rescaling of the paths.  Keep the time step below
delta^2/100 to control the overshoot bias.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import GridError, NumericalError, PvarsimError
from .grids import Grid
from .paths import BmPath, FbmPath, default_half_length, sample_bm, sample_fbm
from .rng import TAG_BM, TAG_FBM, mix_seed
from .zero_energy import zero_energy_path

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    """Partition of [0, T]: uniform, dyadic, or level-crossing stopping times."""

    kind: str  # "uniform" | "dyadic" | "crossing"
    times: np.ndarray
    parameter: float  # mesh for uniform/dyadic, delta for crossing

    def __post_init__(self):
        t = np.ascontiguousarray(np.asarray(self.times, dtype=np.float64))
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        if t.size < 1 or t[0] != 0.0:
            raise GridError("partition must start at time 0")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise GridError("partition times must be strictly increasing")


@dataclass(frozen=True)
class PVarEstimate:
    """One p-variation power sum with its partition descriptor."""

    p: float
    value: float
    partition_kind: str
    parameter: float
    seed: int | None = None

    def __post_init__(self):
        if self.p <= 0:
            raise PvarsimError("p must be positive")
        if self.value < 0:
            raise PvarsimError("p-variation sums are nonnegative")


@dataclass(frozen=True)
class CEstimate:
    """Monte Carlo estimate of c = E|A at the first unit exit|^{p0}."""

    value: float
    stderr: float
    n_paths: int
    p0: float
    resampled: int


def crossing_indices(values: np.ndarray, delta: float) -> np.ndarray:
    """Grid indices of successive |move| >= delta crossings, starting at 0."""
    if delta <= 0:
        raise PvarsimError("delta must be positive")
    n = values.size
    out = [0]
    i = 0
    window = 256
    while True:
        ref = values[i]
        j = i + 1
        hit = -1
        w = window
        while j < n:
            stop = min(n, j + w)
            block = np.abs(values[j:stop] - ref) >= delta
            k = int(np.argmax(block))
            if block[k]:
                hit = j + k
                break
            j = stop
            w *= 4
        if hit < 0:
            break
        out.append(hit)
        i = hit
    return np.asarray(out, dtype=np.int64)


def crossing_times(bm: BmPath, delta: float) -> Partition:
    """Successive first grid times with |B - B at last crossing| >= delta."""
    idx = crossing_indices(bm.values, delta)
    return Partition(kind="crossing", times=bm.grid.points[idx], parameter=float(delta))


def p_variation(values, p: float, *, kind: str = "uniform",
                parameter: float = float("nan"), seed: int | None = None) -> PVarEstimate:
    """Plain power sum of absolute increments along the given values."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise PvarsimError("need at least 2 partition points")
    total = float(np.sum(np.abs(np.diff(v)) ** p))
    return PVarEstimate(p=float(p), value=total, partition_kind=kind,
                        parameter=float(parameter), seed=seed)


def theorem2_statistic(fbm: FbmPath, bm: BmPath, delta: float, t: float) -> float:
    """Crossing-time power sum sum_{k: tau_k < t} |A_{tau_{k+1}} - A_{tau_k}|^{p0}.

    p0 = 2/(1+H) is taken from the fBM.  The increment to tau_{k+1} is
    included only when tau_{k+1} is observed before the simulation horizon;
    run the path to a horizon of 2t so the truncation is negligible.
    """
    p0 = 2.0 / (1.0 + fbm.hurst)
    idx = crossing_indices(bm.values, delta)
    if idx.size < 2:
        return 0.0
    a = zero_energy_path(fbm, bm).A_values[idx]
    times = bm.grid.points[idx]
    keep = times[:-1] < t  # k: tau_k < t, increment to tau_{k+1} observed
    if not np.any(keep):
        return 0.0
    return float(np.sum(np.abs(np.diff(a))[keep] ** p0))


def theorem1_statistic(
    fbm: FbmPath, bm: BmPath, meshes, p: float, t: float
) -> list[PVarEstimate]:
    """Power sums of A over uniform partitions of [0, t], one per mesh."""
    mesh_list = [float(m) for m in meshes]
    if not all(b < a for a, b in zip(mesh_list, mesh_list[1:])):
        raise PvarsimError("meshes must be strictly decreasing")
    step = bm.grid.step
    if step is None:
        raise GridError("theorem1_statistic needs a uniform time grid")
    end = bm.grid.index_of(t)
    a = zero_energy_path(fbm, bm).A_values
    out = []
    for mesh in mesh_list:
        stride_f = mesh / step
        stride = int(round(stride_f))
        if stride < 1 or abs(stride_f - stride) > 1e-9:
            raise GridError(f"mesh {mesh:g} is not a multiple of the grid step {step:g}")
        sub = a[: end + 1 : stride]
        if (end % stride) != 0:
            sub = np.concatenate([sub, a[end : end + 1]])
        out.append(
            p_variation(sub, p, kind="uniform", parameter=mesh, seed=bm.seed)
        )
    return out


def estimate_c(
    hurst: float,
    n_paths: int,
    *,
    master_seed: int,
    step: float = 0.01,
    horizon: float = 8.0,
    half_length: float = 3.0,
    max_attempts: int = 8,
    degenerate_zero_fbm: bool = False,
) -> CEstimate:
    """MC mean of |A at the first exit of |B| from (-1, 1)|^{p0}.

    Each path gets an independent (B, B^H) pair seeded from the master seed.
    A path with no exit before the horizon is resampled with a doubled
    horizon (logged); degenerate_zero_fbm forces B^H = 0 (test hook, c = 0).
    """
    p0 = 2.0 / (1.0 + hurst)
    n_space = int(np.ceil(half_length / np.sqrt(step)))
    space = Grid.symmetric_grid(half_length, n_space)
    vals = np.empty(n_paths)
    resampled = 0
    for i in range(n_paths):
        cur_horizon = horizon
        for attempt in range(max_attempts):
            bseed = mix_seed(master_seed, TAG_BM, i, attempt)
            grid = Grid.uniform_grid(0.0, cur_horizon, int(round(cur_horizon / step)))
            bm = sample_bm(grid, bseed)
            hits = np.abs(bm.values) >= 1.0
            k = int(np.argmax(hits))
            if hits[k]:
                break
            resampled += 1
            cur_horizon *= 2.0
            log.info("path %d: no unit exit before %g, resampling with horizon %g",
                     i, cur_horizon / 2.0, cur_horizon)
        else:
            raise NumericalError(f"path {i}: no unit exit after {max_attempts} attempts")
        fseed = mix_seed(master_seed, TAG_FBM, i)
        fbm = sample_fbm(space, hurst, fseed)
        if degenerate_zero_fbm:
            fbm = FbmPath(grid=space, values=np.zeros(space.n_points),
                          hurst=hurst, seed=fseed)
        # A at the exit time only; truncate the path right after the exit
        sub = BmPath(grid=Grid(grid.points[: k + 1], uniform=True, step=grid.step),
                     values=bm.values[: k + 1], seed=bseed)
        vals[i] = abs(zero_energy_path(fbm, sub).A_values[-1]) ** p0
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else float("nan")
    return CEstimate(value=mean, stderr=stderr, n_paths=n_paths, p0=p0,
                     resampled=resampled)
