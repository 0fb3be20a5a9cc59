"""Batch figure rendering from simulator exports.

Three kinds: fidelity-curves (one F(r) line per detection threshold),
mermin-curves (M(r) with the classical bound dashed and the quantum bound
dotted), and cityscape (paired 3D bar charts of Re/Im of a density matrix).
Rendering is deterministic: fixed style, no timestamps, fixed SVG hash salt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import (  # noqa: E402
    SchemaError,
    read_density_matrix,
    read_fidelity_rows,
    read_mermin_rows,
)

plt.rcParams["svg.hashsalt"] = "pinchplots"

KINDS = ("fidelity-curves", "mermin-curves", "cityscape")

_LINE_STYLES = ["-", "--", "-.", ":"]


@dataclass
class PlotJob:
    kind: str
    inputs: tuple
    output: str
    image_format: str = ""  # inferred from output suffix when empty

    def resolved_format(self) -> str:
        if self.image_format:
            return self.image_format
        suffix = str(self.output).rsplit(".", 1)
        return suffix[1].lower() if len(suffix) == 2 else "svg"


def render(job: PlotJob):
    """Render one figure kind to `job.output`; returns the matplotlib figure."""
    if job.kind not in KINDS:
        raise SchemaError(f"unknown figure kind {job.kind!r}; choose from {KINDS}")
    if not job.inputs:
        raise SchemaError("no input files given")
    if job.kind == "fidelity-curves":
        fig = fidelity_figure(job.inputs[0])
    elif job.kind == "mermin-curves":
        fig = mermin_figure(job.inputs[0])
    else:
        fig = cityscape_figure(job.inputs[-1])
    save(fig, job)
    return fig


def save(fig, job: PlotJob):
    fmt = job.resolved_format()
    kwargs = {"format": fmt}
    if fmt == "svg":
        kwargs["metadata"] = {"Date": None}  # keep output byte-stable
    fig.savefig(job.output, **kwargs)
    plt.close(fig)


def fidelity_figure(path):
    curves = read_fidelity_rows(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for k, gamma in enumerate(sorted(curves)):
        pts = curves[gamma]
        rs = [p[0] for p in pts]
        fs = [p[1] for p in pts]
        errs = [0.0 if math.isnan(p[2]) else p[2] for p in pts]
        ax.errorbar(rs, fs, yerr=errs if any(errs) else None,
                    linestyle=_LINE_STYLES[k % len(_LINE_STYLES)],
                    marker="o", markersize=3, capsize=2,
                    label=f"gamma = {gamma:g}")
    ax.set_xlabel("pinching strength r")
    ax.set_ylabel("fidelity F")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return fig


def mermin_figure(path):
    curves, (classical, quantum) = read_mermin_rows(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for k, gamma in enumerate(sorted(curves)):
        pts = curves[gamma]
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                linestyle=_LINE_STYLES[k % len(_LINE_STYLES)],
                marker="s", markersize=3, label=f"gamma = {gamma:g}")
    ax.axhline(classical, linestyle="--", color="black",
               label=f"classical bound {classical:g}")
    ax.axhline(quantum, linestyle=":", color="gray",
               label=f"quantum bound {quantum:g}")
    ax.set_xlabel("pinching strength r")
    ax.set_ylabel("Mermin statistic")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return fig


def cityscape_figure(path):
    rho = read_density_matrix(path)
    dim = rho.shape[0]
    n = max(1, dim.bit_length() - 1)
    labels = [format(k, f"0{n}b").replace("0", "H").replace("1", "V")
              for k in range(dim)]
    fig = plt.figure(figsize=(7.0, 9.0))
    for sub, (part, title) in enumerate(((rho.real, "Re"), (rho.imag, "Im"))):
        ax = fig.add_subplot(2, 1, sub + 1, projection="3d")
        xs, ys = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
        xs = xs.ravel()
        ys = ys.ravel()
        heights = part.ravel()
        ax.bar3d(xs - 0.4, ys - 0.4, np.zeros_like(heights), 0.8, 0.8, heights,
                 shade=True, color="tab:blue" if sub == 0 else "tab:orange")
        ax.set_title(f"{title} part")
        ax.set_zlim(min(-0.05, heights.min()), max(0.55, heights.max()))
        step = max(1, dim // 8)
        ax.set_xticks(np.arange(0, dim, step))
        ax.set_xticklabels(labels[::step], fontsize=6)
        ax.set_yticks(np.arange(0, dim, step))
        ax.set_yticklabels(labels[::step], fontsize=6)
    # tight_layout cannot accommodate 3D axes decorations; fix margins instead
    fig.subplots_adjust(left=0.05, right=0.95, top=0.95, bottom=0.05)
    return fig


__all__ = ["PlotJob", "KINDS", "render", "fidelity_figure", "mermin_figure",
           "cityscape_figure"]
