"""Time-binned importance weights over the six feature groups."""
from __future__ import annotations

import numpy as np

from .core import GROUPS, N_GROUPS
from .nnkit import Param, softmax, softmax_backward

BIN_WIDTH_MIN = 0.5
N_BINS = 41
LAST_BIN = N_BINS - 1


def time_bin(t_min):
    """Half-minute bin index, with every t >= 20 minutes pooled into bin 40."""
    t = np.asarray(t_min, dtype=np.float64)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("game time must be non-negative")
    bins = np.minimum(np.floor(t / BIN_WIDTH_MIN), LAST_BIN).astype(np.int64)
    return int(bins) if bins.ndim == 0 else bins


def bin_start(k: int) -> float:
    return k * BIN_WIDTH_MIN


def bin_center(k: int) -> float:
    return k * BIN_WIDTH_MIN + BIN_WIDTH_MIN / 2


class TemporalWeights:
    """theta has one row per time bin; each row's softmax is that bin's importance vector."""

    def __init__(self, theta: np.ndarray | None = None):
        if theta is None:
            theta = np.zeros((N_BINS, N_GROUPS))
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (N_BINS, N_GROUPS):
            raise ValueError(f"theta must have shape {(N_BINS, N_GROUPS)}, got {theta.shape}")
        self.theta = Param("temporal.theta", theta)
        self._cache = None

    def params(self):
        return [self.theta]

    def table(self) -> np.ndarray:
        """All importance weights, shape (bins, groups)."""
        return softmax(self.theta.value, axis=1)

    def weights_at(self, t_min) -> np.ndarray:
        return softmax(self.theta.value[time_bin(t_min)])

    def set_bin_weights(self, k: int, weights) -> None:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (N_GROUPS,) or np.any(w <= 0):
            raise ValueError("bin weights must be six positive numbers")
        self.theta.value[k] = np.log(w / w.sum())

    def forward(self, bins: np.ndarray) -> np.ndarray:
        w = softmax(self.theta.value[bins], axis=1)
        self._cache = (bins, w)
        return w

    def backward(self, dw: np.ndarray) -> None:
        if self._cache is None:
            raise RuntimeError("temporal weights: backward called before forward")
        bins, w = self._cache
        self._cache = None
        np.add.at(self.theta.grad, bins, softmax_backward(w, dw, axis=1))

    def check_normalized(self, tol: float = 1e-12) -> None:
        w = self.table()
        if np.any(w < 0) or np.max(np.abs(w.sum(axis=1) - 1.0)) > tol:
            raise AssertionError("importance weights left the probability simplex")

    def curve_rows(self):
        """(bin, t_center, w_0..w_5) rows for tabulating weight curves."""
        w = self.table()
        return [(k, bin_center(k), *w[k].tolist()) for k in range(N_BINS)]


def weight_curve_header() -> list[str]:
    return ["bin", "t_center"] + [f"w_{g}" for g in GROUPS]

