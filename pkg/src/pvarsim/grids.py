"""Grids and sampled paths.

A Grid is a strictly increasing set of time or space points; SampledPath
pairs a grid with process values. Both are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

_REL_TOL = 1e-12


def _readonly(a) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Strictly increasing grid of reals, optionally uniform with a known step."""

    points: np.ndarray
    uniform: bool = False
    step: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", _readonly(self.points))
        pts = self.points
        if pts.ndim != 1 or pts.size < 2:
            raise GridError("grid needs at least 2 points")
        d = np.diff(pts)
        if not np.all(d > 0):
            raise GridError("grid points must be strictly increasing")
        if self.uniform:
            if self.step is None:
                object.__setattr__(self, "step", float(d[0]))
            scale = max(abs(pts[0]), abs(pts[-1]), 1.0)
            if np.max(np.abs(d - self.step)) > _REL_TOL * scale:
                raise GridError("uniform flag set but spacing is not constant")

    @classmethod
    def uniform_grid(cls, start: float, stop: float, n_cells: int) -> "Grid":
        if n_cells < 1:
            raise GridError("n_cells must be >= 1")
        pts = np.linspace(start, stop, n_cells + 1)
        return cls(pts, uniform=True, step=(stop - start) / n_cells)

    @classmethod
    def symmetric_grid(cls, half_length: float, n_cells_per_side: int) -> "Grid":
        """Uniform grid on [-L, L] containing 0 as an exact grid point."""
        if half_length <= 0:
            raise GridError("half_length must be positive")
        step = half_length / n_cells_per_side
        idx = np.arange(-n_cells_per_side, n_cells_per_side + 1)
        return cls(idx * step, uniform=True, step=step)

    @property
    def n_points(self) -> int:
        return int(self.points.size)

    @property
    def start(self) -> float:
        return float(self.points[0])

    @property
    def stop(self) -> float:
        return float(self.points[-1])

    def index_of(self, value: float) -> int:
        """Index of an existing grid point; GridError if value is off-grid."""
        pts = self.points
        i = int(np.searchsorted(pts, value))
        scale = max(abs(value), 1.0)
        for j in (i - 1, i, i + 1):
            if 0 <= j < pts.size and abs(pts[j] - value) <= _REL_TOL * scale:
                return j
        raise GridError(f"{value!r} is not a grid point")

    def contains_point(self, value: float) -> bool:
        try:
            self.index_of(value)
            return True
        except GridError:
            return False


@dataclass(frozen=True)
class SampledPath:
    """Values of a scalar process on a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != self.grid.points.shape:
            raise GridError("values length must match the grid")
