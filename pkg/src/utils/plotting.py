"""
Plotting
Figures for the perturbation sweep and the subset study
"""

from pathlib import Path
from typing import Sequence, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .constants import GRAPH_COLORS

PALETTE = list(GRAPH_COLORS.values())


def plot_sweep(rows: Sequence, path: Union[str, Path]) -> None:
    """Apparent height against distance, one panel per swept parameter"""
    parameters = sorted({row.parameter for row in rows})
    fig, axes = plt.subplots(1, max(1, len(parameters)), figsize=(6 * max(1, len(parameters)), 4.5),
                             squeeze=False)
    fig.patch.set_facecolor('#f8f9fa')
    for ax, parameter in zip(axes[0], parameters):
        values = sorted({row.value for row in rows if row.parameter == parameter})
        for i, value in enumerate(values):
            selected = [r for r in rows if r.parameter == parameter and r.value == value]
            distances = np.array([r.distance for r in selected])
            heights = np.array([r.apparent_height for r in selected])
            ax.plot(distances, heights, 'o-', color=PALETTE[i % len(PALETTE)], linewidth=2,
                    alpha=0.8, label=f"{parameter} = {value:.4g}")
        ax.set_title(f"Apparent height, {parameter} varied", fontsize=12, fontweight='bold')
        ax.set_xlabel("Distance (m)")
        ax.set_ylabel("Apparent height (m)")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_study(rows: Sequence, path: Union[str, Path]) -> None:
    """Fitted height, tilt and height error against the number of objects"""
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
    fig.patch.set_facecolor('#f8f9fa')
    panels = (("height", "Camera height (m)"), ("tilt", "Tilt (deg)"),
              ("height_err_mean", "Mean height error (m)"))
    ns = sorted({row.n for row in rows})
    for ax, (attribute, label) in zip(axes, panels):
        scatter_n = [r.n for r in rows]
        scatter_v = [getattr(r, attribute) for r in rows]
        ax.plot(scatter_n, scatter_v, '.', color=GRAPH_COLORS["info"], alpha=0.4)
        means, stds = [], []
        for n in ns:
            values = np.array([getattr(r, attribute) for r in rows if r.n == n], dtype=float)
            values = values[np.isfinite(values)]
            means.append(values.mean() if values.size else np.nan)
            stds.append(values.std() if values.size else np.nan)
        ax.errorbar(ns, means, yerr=stds, color=GRAPH_COLORS["danger"], linewidth=2, capsize=3)
        ax.set_xlabel("Number of objects")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
