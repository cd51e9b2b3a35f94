"""Deterministic CSV emission and SVG figure rendering.

CSV cells use 17 significant digits (round-trippable float64) and LF line
endings; reruns with identical inputs produce byte-identical files.  Figures
are rendered with matplotlib's Agg backend into SVG; text is kept as text
elements (not paths) so series labels remain searchable in the output, and
date metadata is stripped so figures are stable across reruns too.
"""

from __future__ import annotations

import os
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "polybarrier"

import matplotlib.pyplot as plt
import numpy as np


def format_float(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence],
              seed: Optional[int] = None) -> None:
    """Write rows of numbers/strings; floats get the 17-digit format."""
    lines = []
    if seed is not None:
        lines.append(f"# seed={seed}")
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, str):
                cells.append(cell)
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(format_float(cell))
        lines.append(",".join(cells))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_series(path, x, series: dict, xlabel: str, ylabel: str,
                title: str = "", logy: bool = True) -> None:
    """One labeled line per entry of ``series``; log y-axis by default.

    Non-positive values are masked on log plots rather than dropped silently
    from the legend.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    x = np.asarray(x, dtype=float)
    for label, ys in series.items():
        ys = np.asarray(ys, dtype=float)
        if logy:
            ys = np.where(ys > 0, ys, np.nan)
        ax.plot(x, ys, marker="o", markersize=3.5, linewidth=1.2, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def plot_fit(path, xs, target_vals, fit_vals, title: str = "") -> None:
    """Target and fitted network on the same axes, residual below."""
    fig, (ax0, ax1) = plt.subplots(
        2, 1, figsize=(6.0, 5.0), sharex=True,
        gridspec_kw={"height_ratios": [3, 1]},
    )
    ax0.plot(xs, target_vals, label="target", linewidth=1.4)
    ax0.plot(xs, fit_vals, label="network", linewidth=1.2, linestyle="--")
    ax0.legend()
    ax0.grid(alpha=0.3)
    if title:
        ax0.set_title(title)
    ax1.plot(xs, np.abs(np.asarray(target_vals) - np.asarray(fit_vals)),
             linewidth=1.0, label="|error|")
    ax1.set_yscale("log")
    ax1.set_xlabel("x")
    ax1.grid(alpha=0.3)
    ax1.legend()
    fig.tight_layout()
    _save(fig, path)


def plot_boundary_profile(path, thetas, values, title: str = "") -> None:
    """|h| along the sampled ellipse boundary as a function of the angle."""
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.plot(thetas, values, linewidth=1.2, label="|phi| on boundary")
    ax.set_xlabel("theta")
    ax.set_ylabel("|phi|")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def ensure_outdir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
