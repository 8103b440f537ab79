"""Accuracy by game time for whole models and for individual spatial models."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .core import GROUPS, N_GROUPS, FrameTable, group_features
from .ingest import DataError
from .model import Predictor, TsstnModel, decide
from .temporal import N_BINS, bin_center, time_bin

DEFAULT_GRID = tuple(2.5 * k for k in range(9))
TABLE_POINTS = (0.0, 5.0, 10.0, 15.0, 20.0)

Scorer = Union[Predictor, Callable[[FrameTable], np.ndarray]]


def parse_grid(text: str) -> tuple[float, ...]:
    grid = tuple(float(v) for v in text.split(",") if v.strip())
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 0:
        raise ValueError("grid must be a non-empty increasing list of non-negative minutes")
    return grid


def assign_grid(t_min: np.ndarray, grid: Sequence[float]) -> np.ndarray:
    """Grid index per frame, -1 when its time bin matches no grid point.

    A frame belongs to a grid point when both fall in the same time bin; the
    last grid point also takes every frame at or beyond it.
    """
    bins = time_bin(np.asarray(t_min, dtype=np.float64))
    out = np.full(len(bins), -1, dtype=np.int64)
    for k, g in enumerate(grid):
        out[bins == time_bin(g)] = k
    out[np.asarray(t_min) >= grid[-1]] = len(grid) - 1
    return out


@dataclass
class EvalReport:
    grid: tuple[float, ...]
    counts: list[int]
    accuracy: dict[str, list[float | None]]
    spatial_accuracy: dict[str, list[float | None]] = field(default_factory=dict)
    spatial_counts: list[int] = field(default_factory=list)
    weights: list[list[float]] | None = None
    off_grid: int = 0  # frames whose bin matches no grid point

    def header(self) -> list[str]:
        return ["t_min", "frames"] + [f"acc_{name}" for name in self.accuracy]

    def rows(self) -> list[list]:
        return [[t, n] + [self.accuracy[m][k] for m in self.accuracy]
                for k, (t, n) in enumerate(zip(self.grid, self.counts))]

    def to_table(self, delimiter: str = "\t") -> str:
        return _render(self.header(), self.rows(), delimiter)

    def curve_header(self) -> list[str]:
        head = ["bin", "t_center", "frames"] + [f"acc_{g}" for g in self.spatial_accuracy]
        if self.weights is not None:
            head += [f"w_{g}" for g in GROUPS]
        return head

    def curve_rows(self) -> list[list]:
        rows = []
        for k in range(N_BINS):
            row = [k, bin_center(k), self.spatial_counts[k] if self.spatial_counts else 0]
            row += [self.spatial_accuracy[g][k] for g in self.spatial_accuracy]
            if self.weights is not None:
                row += list(self.weights[k])
            rows.append(row)
        return rows

    def summary(self) -> str:
        lines = []
        for name, acc in self.accuracy.items():
            parts = [f"{t:g}m={'n/a' if a is None else f'{100 * a:.1f}%'}"
                     for t, a in zip(self.grid, acc) if t in TABLE_POINTS]
            lines.append(f"{name}: " + ", ".join(parts))
        lines.append(f"frames: {sum(self.counts)} on grid, {self.off_grid} between grid points")
        return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _render(header, rows, delimiter: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _predict(model: Scorer, frames: FrameTable, g, seed: int) -> np.ndarray:
    if isinstance(model, Predictor):
        return np.asarray(model.predict_binary(g, seed), dtype=bool)
    return np.asarray(model(frames), dtype=bool)


def _accuracy(correct: np.ndarray, groups: np.ndarray, n_groups: int):
    counts = np.bincount(groups[groups >= 0], minlength=n_groups)
    hits = np.bincount(groups[groups >= 0], weights=correct[groups >= 0].astype(np.float64), minlength=n_groups)
    acc = [None if c == 0 else float(h / c) for h, c in zip(hits, counts)]
    return acc, counts.tolist()


def spatial_curves(model: TsstnModel, frames: FrameTable, seed: int = 0):
    """Per-bin accuracy of each spatial model's sign on its own, plus frame counts."""
    g = group_features(frames)
    s = model.win_scores(g)
    y = frames.blue_wins
    bins = time_bin(g.t_min)
    curves = {}
    counts: list[int] = []
    for i in range(N_GROUPS):
        pred = decide(s[:, i], seed + i)
        curves[GROUPS[i]], counts = _accuracy(pred == y, bins, N_BINS)
    return curves, counts


def evaluate(models: Mapping[str, Scorer], frames: FrameTable, grid: Sequence[float] = DEFAULT_GRID,
             seed: int = 0) -> EvalReport:
    """Binary accuracy per grid point for each model on the given (test) frames.

    Frames only exist while their match is running, so late grid points are
    scored on the games that lasted that long.
    """
    if len(frames) == 0:
        raise DataError("evaluation needs at least one test frame")
    grid = tuple(float(t) for t in grid)
    g = group_features(frames)
    y = frames.blue_wins
    where = assign_grid(g.t_min, grid)
    accuracy = {}
    counts: list[int] = [0] * len(grid)
    for name, model in models.items():
        accuracy[name], counts = _accuracy(_predict(model, frames, g, seed) == y, where, len(grid))
    report = EvalReport(grid, counts, accuracy, off_grid=int(np.sum(where < 0)))
    tsstn = next((m for m in models.values() if isinstance(m, TsstnModel)), None)
    if tsstn is not None:
        report.spatial_accuracy, report.spatial_counts = spatial_curves(tsstn, frames, seed)
        report.weights = tsstn.temporal.table().tolist()
    return report


def weight_table(model: TsstnModel, frames: FrameTable | None = None, seed: int = 0) -> tuple[list[str], list[list]]:
    """Per-bin importance weights, with spatial accuracy columns when frames are given."""
    w = model.temporal.table()
    head = ["bin", "t_center"] + [f"w_{g}" for g in GROUPS]
    rows = [[k, bin_center(k), *w[k].tolist()] for k in range(N_BINS)]
    if frames is not None and len(frames):
        curves, counts = spatial_curves(model, frames, seed)
        head += ["frames"] + [f"acc_{g}" for g in GROUPS]
        for k, row in enumerate(rows):
            row += [counts[k]] + [curves[gname][k] for gname in GROUPS]
    return head, rows


def render_table(header, rows, delimiter: str = "\t") -> str:
    return _render(header, rows, delimiter)
