import numpy as np
import pytest

from pvarsim import FbmPath, Grid, sample_bm, sample_fbm


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov distance (independent empirical CDF oracle)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    allv = np.sort(np.concatenate([a, b]))
    fa = np.searchsorted(np.sort(a), allv, side="right") / a.size
    fb = np.searchsorted(np.sort(b), allv, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


class DegenerateFbm(FbmPath):
    """Fixture path with arbitrary values (bypasses the zero-anchor invariant
    so the degenerate constant-input examples can be exercised)."""

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def constant_fbm(grid: Grid, c: float, hurst: float = 0.5) -> FbmPath:
    return DegenerateFbm(grid=grid, values=np.full(grid.n_points, c),
                         hurst=hurst, seed=0)


def zero_fbm(grid: Grid, hurst: float = 0.5) -> FbmPath:
    return FbmPath(grid=grid, values=np.zeros(grid.n_points), hurst=hurst, seed=0)


@pytest.fixture(scope="session")
def space_grid() -> Grid:
    return Grid.symmetric_grid(8.0, 1024)


@pytest.fixture(scope="session")
def fbm_path(space_grid) -> FbmPath:
    return sample_fbm(space_grid, 0.5, seed=42)


@pytest.fixture(scope="session")
def bm_path():
    return sample_bm(Grid.uniform_grid(0.0, 1.0, 2**12), seed=7)
