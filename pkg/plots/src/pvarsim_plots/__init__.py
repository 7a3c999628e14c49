"""Render pvarsim CSV outputs into figures with machine-readable sidecars.

Two figure kinds: log-log increment charts with confidence bands and fitted
lines, and histogram panel grids of conditional p-variation sums.  Every
figure is accompanied by a sidecar text file holding the statistics that
make it testable without pixel comparison.
"""

from .errors import PlotError, SchemaError
from .render import PlotSpec, RenderResult, render_histograms, render_loglog

__all__ = [
    "PlotError",
    "PlotSpec",
    "RenderResult",
    "SchemaError",
    "render_histograms",
    "render_loglog",
]

__version__ = "0.1.0"
