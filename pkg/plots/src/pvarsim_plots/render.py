"""Figure rendering with testable sidecar statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import PlotError, SchemaError
from .io import (
    FITS_COLUMNS,
    INCREMENTS_COLUMNS,
    PVAR_COLUMNS,
    fmt,
    read_table,
    write_sidecar,
)
from .stats import freedman_diaconis_bins, median_iqr

KINDS = ("loglog_increments", "pvar_histograms")


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSVs, output image path, figure kind."""

    kind: str
    inputs: dict = field(default_factory=dict)
    output_image: str | Path = "figure.png"
    xlabel: str = ""
    ylabel: str = ""
    guide_slope: float | None = 1.0  # loglog reference line; None disables

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}")


@dataclass(frozen=True)
class RenderResult:
    image: Path
    sidecar: Path
    n_series: int


def _sidecar_path(image: Path) -> Path:
    return image.with_suffix(image.suffix + ".stats.txt")


def render_loglog(spec: PlotSpec) -> RenderResult:
    """One series per p with a 95% band, its fitted line, and a guide line.

    The guide line has the configured slope and passes through the log-space
    centroid of the series whose p is closest to 4/3; it is a visual
    reference, not a fit.
    """
    if spec.kind != "loglog_increments":
        raise PlotError("render_loglog needs a loglog_increments spec")
    inc = read_table(spec.inputs["increments"], INCREMENTS_COLUMNS)
    fits = read_table(spec.inputs["fits"], FITS_COLUMNS)
    fit_by_p = {p: i for i, p in enumerate(fits["p"])}

    ps = sorted(set(inc["p"].tolist()))
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    sidecar = [f"kind = {spec.kind}"]
    n_series = 0
    centroid = None
    best_gap = np.inf
    for p in ps:
        sel = (inc["p"] == p) & (inc["mean_abs_incr_pow"] > 0.0)
        if not np.any(sel):
            continue
        order = np.argsort(inc["delta_tau"][sel])
        x = inc["delta_tau"][sel][order]
        y = inc["mean_abs_incr_pow"][sel][order]
        lo = np.maximum(inc["ci_low"][sel][order], np.finfo(float).tiny)
        hi = inc["ci_high"][sel][order]
        label = f"p = {p:g}"
        if p in fit_by_p:
            i = fit_by_p[p]
            slope, intercept, ssr = fits["slope"][i], fits["intercept"][i], fits["ssr"][i]
            label += f"  slope {slope:.4f}, intercept {intercept:.4f}, SSR {ssr:.4f}"
            xf = np.array([x.min(), x.max()])
            ax.plot(xf, 10.0**intercept * xf**slope, lw=1.0, alpha=0.8)
        else:
            slope = intercept = ssr = float("nan")
        ax.fill_between(x, lo, hi, alpha=0.25)
        ax.plot(x, y, "o-", ms=4, label=label)
        n_series += 1
        gap = abs(p - 4.0 / 3.0)
        if gap < best_gap:
            best_gap = gap
            centroid = (float(np.mean(np.log10(x))), float(np.mean(np.log10(y))), p)
        sidecar.append(
            f"series p={fmt(p)} n={x.size} slope={fmt(slope)} "
            f"intercept={fmt(intercept)} ssr={fmt(ssr)}"
        )
    if n_series == 0:
        plt.close(fig)
        raise SchemaError("no positive data series to draw")

    if spec.guide_slope is not None and centroid is not None:
        cx, cy, anchor_p = centroid
        xs = np.array(ax.get_xlim()) if ax.lines else np.array([1e-6, 1e-1])
        xg = np.array([inc["delta_tau"].min(), inc["delta_tau"].max()])
        yg = 10.0 ** (cy + spec.guide_slope * (np.log10(xg) - cx))
        ax.plot(xg, yg, "k--", lw=2.0, alpha=0.7,
                label=f"guide, slope {spec.guide_slope:g}")
        sidecar.append(
            f"guide slope={fmt(spec.guide_slope)} anchor_p={fmt(anchor_p)} "
            f"log10_x={fmt(cx)} log10_y={fmt(cy)}"
        )

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or "time increment")
    ax.set_ylabel(spec.ylabel or "mean |conditional increment|^p")
    ax.legend(fontsize=7, loc="best")
    ax.grid(True, which="both", alpha=0.25)

    image = Path(spec.output_image)
    image.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(image, dpi=140)
    plt.close(fig)
    side = write_sidecar(_sidecar_path(image), sidecar)
    return RenderResult(image=image, sidecar=side, n_series=n_series)


def render_histograms(spec: PlotSpec) -> RenderResult:
    """Histogram panel grid: rows = p, columns = mesh, shared x per row."""
    if spec.kind != "pvar_histograms":
        raise PlotError("render_histograms needs a pvar_histograms spec")
    tab = read_table(spec.inputs["pvar"], PVAR_COLUMNS)
    ps = sorted(set(tab["p"].tolist()))
    meshes = sorted(set(tab["mesh"].tolist()), reverse=True)  # coarse to fine
    n_rows, n_cols = len(ps), len(meshes)
    fig, axes = plt.subplots(
        n_rows, n_cols, figsize=(3.0 * n_cols, 2.4 * n_rows),
        squeeze=False, sharex="row",
    )
    sidecar = [f"kind = {spec.kind}"]
    n_panels = 0
    for r, p in enumerate(ps):
        for c, mesh in enumerate(meshes):
            ax = axes[r][c]
            sel = (tab["p"] == p) & (tab["mesh"] == mesh)
            vals = tab["value"][sel]
            if vals.size == 0:
                ax.set_axis_off()
                continue
            bins = freedman_diaconis_bins(vals)
            ax.hist(vals, bins=bins, color="tab:blue", alpha=0.8)
            ax.set_title(f"p = {p:g}, mesh = {mesh:g}", fontsize=8)
            med, iqr = median_iqr(vals)
            sidecar.append(
                f"panel p={fmt(p)} mesh={fmt(mesh)} count={vals.size} "
                f"median={fmt(med)} iqr={fmt(iqr)} bins={bins}"
            )
            n_panels += 1
    if n_panels == 0:
        plt.close(fig)
        raise SchemaError("no (p, mesh) cells to draw")
    if spec.xlabel:
        for ax in axes[-1]:
            ax.set_xlabel(spec.xlabel, fontsize=8)
    fig.tight_layout()

    image = Path(spec.output_image)
    image.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(image, dpi=140)
    plt.close(fig)
    side = write_sidecar(_sidecar_path(image), sidecar)
    return RenderResult(image=image, sidecar=side, n_series=n_panels)
