"""Figures for evaluation reports and weight curves, written straight to files."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .core import GROUPS  # noqa: E402
from .evaluation import EvalReport  # noqa: E402
from .temporal import N_BINS, bin_center  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
    "savefig.dpi": 150,
}


def _size(scale: float = 1.0, ratio: float | None = None):
    width = 5.5 * scale
    if ratio is None:
        ratio = (np.sqrt(5.0) - 1.0) / 2.0
    return width, width * ratio


def _series(values):
    return np.array([np.nan if v is None else 100.0 * v for v in values], dtype=float)


def plot_accuracy_by_time(report: EvalReport, path: str | os.PathLike) -> str:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=_size())
        for name, acc in report.accuracy.items():
            ax.plot(report.grid, _series(acc), marker="o", ms=3, lw=1.2, label=name)
        ax.axhline(50.0, color="0.6", lw=0.6, ls="--")
        ax.set_xlabel("game time (min)")
        ax.set_ylabel("accuracy (%)")
        ax.set_xticks(report.grid)
        ax.set_xticklabels([f"{t:g}" + ("+" if k == len(report.grid) - 1 else "")
                            for k, t in enumerate(report.grid)])
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
    return os.fspath(path)


def plot_spatial_curves(spatial_accuracy: dict, weights, path: str | os.PathLike) -> str:
    """Two panels: each spatial model's accuracy (left) and its importance weight (right) per bin."""
    t = np.array([bin_center(k) for k in range(N_BINS)])
    with plt.rc_context(STYLE):
        ncols = 2 if spatial_accuracy else 1
        fig, axes = plt.subplots(1, ncols, figsize=_size(1.6 if ncols == 2 else 1.0, 0.35 if ncols == 2 else None),
                                 squeeze=False)
        axes = axes[0]
        if spatial_accuracy:
            for name in GROUPS:
                axes[0].plot(t, _series(spatial_accuracy[name]), lw=1.1, label=name)
            axes[0].axhline(50.0, color="0.6", lw=0.6, ls="--")
            axes[0].set_ylabel("accuracy (%)")
            axes[0].set_xlabel("game time (min)")
        w = np.asarray(weights, dtype=float)
        ax = axes[-1]
        for i, name in enumerate(GROUPS):
            ax.plot(t, w[:, i], lw=1.1, label=name)
        ax.set_ylim(0.0, 1.0)
        ax.set_ylabel("importance weight")
        ax.set_xlabel("game time (min)")
        ax.legend(ncol=2)
        fig.savefig(path)
        plt.close(fig)
    return os.fspath(path)


def render_report_figures(report: EvalReport, outdir: str | os.PathLike) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    paths = [plot_accuracy_by_time(report, os.path.join(outdir, "accuracy_by_time.png"))]
    if report.weights is not None:
        paths.append(plot_spatial_curves(report.spatial_accuracy, report.weights,
                                         os.path.join(outdir, "spatial_weights.png")))
    return paths
