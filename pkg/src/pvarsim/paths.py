"""Two-sided fractional Brownian motion and standard Brownian motion.

Covariance kernels are exact closed forms. Sampling is exact in law:
circulant embedding of the stationary increments on uniform grids
(O(n log n)), dense covariance factorization as the fallback for
non-uniform or small grids. Both anchor the path at 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridError, NumericalError, PvarsimError
from .grids import Grid
from .rng import generator

#: Relative threshold below which negative embedding eigenvalues are treated
#: as roundoff and clipped; clipped mass beyond _CLIP_ABORT of the total is an error.
_CLIP_REL = 1e-10
_CLIP_ABORT = 1e-6

_DENSE_MAX_POINTS = 4096


def _check_hurst(hurst: float) -> float:
    h = float(hurst)
    if not 0.0 < h < 1.0:
        raise PvarsimError(f"Hurst parameter must lie in (0, 1), got {hurst}")
    return h


def fbm_cov(x, y, hurst: float):
    """Covariance of two-sided fBM anchored at 0:
    cov(x, y) = (|x|^2H + |y|^2H - |x-y|^2H) / 2.
    """
    h2 = 2.0 * _check_hurst(hurst)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = 0.5 * (np.abs(x) ** h2 + np.abs(y) ** h2 - np.abs(x - y) ** h2)
    return out if out.ndim else float(out)


def translated_cov(x, xp, y, hurst: float):
    """Covariance of a translated increment against the anchored path:
    cov(B^H_{y+x} - B^H_y, B^H_{x'}) in closed form.
    """
    h2 = 2.0 * _check_hurst(hurst)
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = 0.5 * (
        np.abs(y + x) ** h2
        - np.abs(y + x - xp) ** h2
        - np.abs(y) ** h2
        + np.abs(y - xp) ** h2
    )
    return out if out.ndim else float(out)


def mixing_bound(x, xp, y, hurst: float):
    """Nominal decay envelope |1-2H|/2 * |x||x'| |y|^(2H-2) for translated_cov
    on the cone max(|x|, |x'|) <= |y|/2.

    Exact only at H = 1/2 (where both sides vanish); for H != 1/2 the true
    supremum of |translated_cov| on the cone exceeds this by a factor
    between 2 and 4.  See mixing_bound_sharp for the provable envelope.
    """
    h = _check_hurst(hurst)
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = 0.5 * abs(1.0 - 2.0 * h) * np.abs(x) * np.abs(xp) * np.abs(y) ** (2.0 * h - 2.0)
    return out if out.ndim else float(out)


def mixing_bound_sharp(x, xp, y, hurst: float):
    """Sharp decay envelope 2|2^(1-2H) - 1| * |x||x'| |y|^(2H-2) for
    translated_cov on the cone max(|x|, |x'|) <= |y|/2.

    Sharp: equality holds at (x, x') = (-y/2, y/2), where the middle
    covariance term |y + x - x'| vanishes.  Same |x||x'| |y|^(2H-2) decay
    as mixing_bound, with the constant corrected.
    """
    h = _check_hurst(hurst)
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    const = 2.0 * abs(2.0 ** (1.0 - 2.0 * h) - 1.0)
    out = const * np.abs(x) * np.abs(xp) * np.abs(y) ** (2.0 * h - 2.0)
    return out if out.ndim else float(out)


def fbm_cov_matrix(points, hurst: float) -> np.ndarray:
    """Dense covariance matrix of the anchored fBM at the given points."""
    p = np.asarray(points, dtype=np.float64)
    return np.asarray(fbm_cov(p[:, None], p[None, :], hurst))


def default_half_length(horizon: float, safety: float = 0.2) -> float:
    """Default spatial extent for B^H when B runs on [0, horizon]."""
    return 6.0 * np.sqrt(horizon) * (1.0 + safety)


@dataclass(frozen=True)
class FbmPath:
    """Fractional Brownian motion sampled on a space grid containing 0."""

    grid: Grid
    values: np.ndarray
    hurst: float
    seed: int

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.points.shape:
            raise GridError("values length must match the grid")
        i0 = self.grid.index_of(0.0)
        if v[i0] != 0.0:
            raise PvarsimError("fBM must vanish at the grid point 0")

    @property
    def zero_index(self) -> int:
        return self.grid.index_of(0.0)


@dataclass(frozen=True)
class BmPath:
    """Standard Brownian motion sampled on a time grid starting at 0."""

    grid: Grid
    values: np.ndarray
    seed: int

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.points.shape:
            raise GridError("values length must match the grid")
        if self.grid.points[0] != 0.0 or v[0] != 0.0:
            raise PvarsimError("Brownian path must start at time 0 with value 0")


def _clip_eigs(lam: np.ndarray, what: str) -> np.ndarray:
    top = float(np.max(lam)) if lam.size else 0.0
    neg = lam < 0.0
    if not np.any(neg):
        return lam
    clipped_mass = float(-lam[neg].sum())
    total = float(lam[~neg].sum())
    if total <= 0.0 or clipped_mass > _CLIP_ABORT * total:
        raise NumericalError(
            f"{what}: clipped eigenvalue mass {clipped_mass:.3e} exceeds "
            f"{_CLIP_ABORT:.0e} of total {total:.3e}"
        )
    out = lam.copy()
    out[lam < -_CLIP_REL * top] = 0.0
    out[out < 0.0] = 0.0
    return out


def _fgn_circulant(n_incr: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Exact fractional Gaussian noise of unit step via circulant embedding."""
    k = np.arange(n_incr + 1, dtype=np.float64)
    h2 = 2.0 * hurst
    gamma = 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)
    # circulant first row [g0 .. g_m, g_{m-1} .. g_1], size 2m
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = _clip_eigs(np.fft.fft(row).real, "circulant embedding")
    m2 = row.size
    xi = np.empty(m2, dtype=np.complex128)
    xi[0] = rng.standard_normal()
    xi[n_incr] = rng.standard_normal()
    if n_incr > 1:
        zw = rng.standard_normal((n_incr - 1, 2))
        inner = (zw[:, 0] + 1j * zw[:, 1]) / np.sqrt(2.0)
        xi[1:n_incr] = inner
        xi[n_incr + 1 :] = np.conj(inner[::-1])
    return np.fft.fft(np.sqrt(lam / m2) * xi).real[:n_incr]


def _sample_dense(points: np.ndarray, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Exact anchored fBM on arbitrary points (0 must be among them)."""
    zero = np.abs(points) == 0.0
    rest = points[~zero]
    cov = fbm_cov_matrix(rest, hurst)
    try:
        chol = np.linalg.cholesky(cov)
        sample = chol @ rng.standard_normal(rest.size)
    except np.linalg.LinAlgError:
        lam, vec = np.linalg.eigh(cov)
        lam = _clip_eigs(lam, "dense covariance factorization")
        sample = vec @ (np.sqrt(lam) * rng.standard_normal(rest.size))
    out = np.zeros(points.size)
    out[~zero] = sample
    return out


def sample_fbm(grid: Grid, hurst: float, seed: int, method: str = "auto") -> FbmPath:
    """Sample anchored two-sided fBM on a grid containing 0.

    method: "circulant" (uniform grids), "dense" (<= 4096 points), or
    "auto" to pick circulant when the grid allows it.  The result is an
    exact-in-law Gaussian vector with kernel fbm_cov and a deterministic
    function of (grid, hurst, seed).
    """
    h = _check_hurst(hurst)
    i0 = grid.index_of(0.0)  # raises GridError when 0 is not a grid point
    if method == "auto":
        method = "circulant" if grid.uniform else "dense"
    rng = generator(seed)
    if method == "circulant":
        if not grid.uniform:
            raise GridError("circulant sampling needs a uniform grid")
        n_incr = grid.n_points - 1
        fgn = _fgn_circulant(n_incr, h, rng) * grid.step**h
        walk = np.concatenate([[0.0], np.cumsum(fgn)])
        values = walk - walk[i0]
    elif method == "dense":
        if grid.n_points > _DENSE_MAX_POINTS:
            raise GridError(
                f"dense sampling is limited to {_DENSE_MAX_POINTS} points, "
                f"got {grid.n_points}"
            )
        values = _sample_dense(grid.points, h, rng)
    else:
        raise PvarsimError(f"unknown sampling method {method!r}")
    values[i0] = 0.0
    return FbmPath(grid=grid, values=values, hurst=h, seed=seed)


def sample_bm(grid: Grid, seed: int) -> BmPath:
    """Brownian motion on [0, T]: independent N(0, dt) increments, B_0 = 0."""
    if grid.points[0] != 0.0:
        raise GridError("Brownian time grid must start at 0")
    rng = generator(seed)
    dt = np.diff(grid.points)
    incs = rng.standard_normal(dt.size) * np.sqrt(dt)
    values = np.concatenate([[0.0], np.cumsum(incs)])
    return BmPath(grid=grid, values=values, seed=seed)


def require_in_domain(fbm: FbmPath, x) -> None:
    """Hard error when any evaluation point leaves [grid start, grid stop]."""
    x = np.asarray(x)
    lo, hi = fbm.grid.start, fbm.grid.stop
    if np.any(x < lo) or np.any(x > hi):
        bad = x[(x < lo) | (x > hi)]
        raise DomainError(
            f"evaluation outside the simulated domain [{lo:g}, {hi:g}]: "
            f"first offender {float(np.ravel(bad)[0]):g}"
        )
