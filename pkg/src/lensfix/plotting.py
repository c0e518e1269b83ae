"""SVG figures for scans and caustics.

Figures are built on a bare ``Figure`` (no pyplot state) and written with a
fixed hash salt and no date stamp, so identical inputs give identical files.
"""
from __future__ import annotations

import matplotlib
from matplotlib.figure import Figure
from matplotlib.patches import Patch
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "lensfix"

_SAVE = {"format": "svg", "metadata": {"Date": None}}


def _draw_lines(ax, polylines, **kw):
    for k, line in enumerate(polylines):
        line = np.asarray(line)
        if line.size == 1:
            ax.plot(line.real, line.imag, "o", ms=3, **kw)
        else:
            ax.plot(line.real, line.imag, **kw)
        kw.pop("label", None)


def plot_multiplicity(grid, path) -> None:
    w = grid.window
    counts = np.ma.masked_less(grid.counts, 0)
    fig = Figure(figsize=(6, 4.5))
    ax = fig.add_subplot()
    extent = (
        w.xs[0] - 0.5 * w.dx,
        w.xs[-1] + 0.5 * w.dx,
        w.ys[0] - 0.5 * w.dy,
        w.ys[-1] + 0.5 * w.dy,
    )
    img = ax.imshow(
        counts,
        origin="lower",
        extent=extent,
        cmap="Greys",
        vmin=0,
        vmax=max(grid.max_count, 1),
        interpolation="nearest",
        aspect="auto",
    )
    _draw_lines(ax, grid.caustic_polylines, color="tab:red", lw=0.8, label="caustic")
    ax.set_xlim(extent[0], extent[1])
    ax.set_ylim(extent[2], extent[3])
    ax.set_xlabel("$y_1$")
    ax.set_ylabel("$y_2$")
    ax.set_title("real images per source")
    cb = fig.colorbar(img, ax=ax)
    cb.set_label("images")
    handles, _ = ax.get_legend_handles_labels()
    handles.append(Patch(facecolor="black", label=f"max_count = {grid.max_count}"))
    ax.legend(handles=handles, loc="upper right", fontsize="small")
    fig.savefig(path, **_SAVE)


def plot_caustics(critical, caustics, path) -> None:
    fig = Figure(figsize=(9, 4.5))
    ax1, ax2 = fig.subplots(1, 2)
    _draw_lines(ax1, critical, color="tab:blue", lw=1.0)
    _draw_lines(ax2, caustics, color="tab:red", lw=1.0)
    ax1.set_title("critical curves (lens plane)")
    ax1.set_xlabel("$x_1$")
    ax1.set_ylabel("$x_2$")
    ax2.set_title("caustics (source plane)")
    ax2.set_xlabel("$y_1$")
    ax2.set_ylabel("$y_2$")
    for ax in (ax1, ax2):
        ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
