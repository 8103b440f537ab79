"""Mini-batch BCE training shared by the two-stage model and the trainable baselines."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import FrameTable, group_features
from .model import Predictor, to_probability
from .nnkit import Adam, bce_loss
from .spatial import AssembledInputs

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 256
    lr: float = 1e-3
    seed: int = 0
    patience: int = 3

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("epochs, batch_size and patience must be positive")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainReport:
    model: str
    config: dict
    init_val_loss: float
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _loss_acc(model: Predictor, inputs: AssembledInputs, y: np.ndarray) -> tuple[float, float]:
    F = model.score_inputs(inputs)
    loss, _ = bce_loss(to_probability(F), y)
    return float(loss.mean()), float(np.mean((F > 0) == (y == 1)))


def loss_and_grad(model: Predictor, inputs: AssembledInputs, y: np.ndarray,
                  training: bool = False, rng=None) -> float:
    """Mean BCE over the batch; gradients are accumulated into the parameters."""
    F = model.forward(inputs, training, rng)
    loss, dp = bce_loss(to_probability(F), y)
    model.backward(dp * (0.5 / len(y)))
    return float(loss.mean())


def train(model: Predictor, train_frames: FrameTable, val_frames: FrameTable, cfg: TrainConfig) -> TrainReport:
    """Fit all parameters jointly; keeps the parameters of the best validation epoch."""
    if len(train_frames) == 0 or len(val_frames) == 0:
        raise ValueError("training and validation sets must be non-empty")
    x_tr = model.assemble(group_features(train_frames))
    y_tr = train_frames.labels.astype(np.float64)
    x_va = model.assemble(group_features(val_frames))
    y_va = val_frames.labels.astype(np.float64)
    try:
        init_loss = _loss_acc(model, x_va, y_va)[0]
    except FloatingPointError as exc:
        raise TrainingDiverged(f"initial model: {exc}") from exc
    report = TrainReport(model.kind, asdict(cfg), init_loss)
    if not model.trainable:
        return report

    params = model.params()
    opt = Adam(params, lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    best = report.init_val_loss
    best_values = [p.value.copy() for p in params]
    stale = 0
    n = len(y_tr)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            opt.zero_grad()
            try:
                total += loss_and_grad(model, x_tr.take(rows), y_tr[rows], True, rng) * len(rows)
            except FloatingPointError as exc:
                raise TrainingDiverged(f"epoch {epoch}: {exc} (lr={cfg.lr})") from exc
            opt.step()
            model.after_step()
        try:
            _, train_acc = _loss_acc(model, x_tr, y_tr)
            val_loss, val_acc = _loss_acc(model, x_va, y_va)
        except FloatingPointError as exc:
            raise TrainingDiverged(f"epoch {epoch}: {exc} (lr={cfg.lr})") from exc
        if not math.isfinite(val_loss):
            raise TrainingDiverged(f"validation loss became {val_loss} at epoch {epoch} (lr={cfg.lr})")
        report.epochs.append(EpochStats(epoch, total / n, train_acc, val_loss, val_acc))
        log.info("%s epoch %d: train loss %.4f acc %.4f | val loss %.4f acc %.4f",
                 model.kind, epoch, total / n, train_acc, val_loss, val_acc)
        if val_loss < best:
            best, stale = val_loss, 0
            report.best_epoch = epoch
            best_values = [p.value.copy() for p in params]
        else:
            stale += 1
            if stale >= cfg.patience:
                report.stopped_early = True
                break
    for p, v in zip(params, best_values):
        p.value[...] = v
    return report
