"""A small float64 autodiff-by-hand kit: layers cache what backward needs.

Every layer works on batches (leading axis = example). ``forward`` records
its inputs, ``backward`` consumes them, accumulates parameter gradients into
``Param.grad`` and returns the gradient with respect to the layer input.
"""
from __future__ import annotations

import math

import numpy as np

LEAK = 0.01
P_FLOOR = 1e-6


class Param:
    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.ascontiguousarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Param({self.name!r}, shape={self.value.shape})"


class NotForwardedError(RuntimeError):
    pass


def _check_finite(y: np.ndarray, where: str) -> np.ndarray:
    if not np.isfinite(y).all():
        raise FloatingPointError(f"non-finite values in {where} output")
    return y


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return math.sqrt(6.0 / (fan_in + fan_out))


def init_params(shape, scheme: str, rng: np.random.Generator | None = None) -> np.ndarray:
    """Initial values: ``glorot`` for dense weights, ``embedding`` for tables, ``zeros`` otherwise."""
    if scheme == "zeros":
        return np.zeros(shape)
    if scheme == "glorot":
        fan_out, fan_in = shape
        b = glorot_bound(fan_in, fan_out)
        return rng.uniform(-b, b, size=shape)
    if scheme == "embedding":
        return rng.uniform(-0.05, 0.05, size=shape)
    raise ValueError(f"unknown init scheme {scheme!r}")


class Layer:
    def params(self) -> list[Param]:
        return []

    def forward(self, x, training: bool = False, rng=None):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def __call__(self, x, training: bool = False, rng=None):
        return self.forward(x, training, rng)


class Dense(Layer):
    """y = x W^T + b with W of shape (out, in)."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, name: str = "dense"):
        self.n_in, self.n_out = n_in, n_out
        self.W = Param(f"{name}.W", init_params((n_out, n_in), "glorot", rng))
        self.b = Param(f"{name}.b", init_params((n_out,), "zeros"))
        self._x = None

    def params(self):
        return [self.W, self.b]

    def forward(self, x, training=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_in:
            raise ValueError(f"{self.W.name}: expected {self.n_in} inputs, got {x.shape[-1]}")
        self._x = x
        return _check_finite(x @ self.W.value.T + self.b.value, self.W.name)

    def backward(self, dy):
        if self._x is None:
            raise NotForwardedError(f"{self.W.name}: backward called before forward")
        x, self._x = self._x, None
        self.W.grad += dy.T @ x
        self.b.grad += dy.sum(axis=0)
        return dy @ self.W.value


class Embedding(Layer):
    """Row lookup; row 0 is the out-of-vocabulary slot by convention."""

    def __init__(self, vocab: int, dim: int, rng: np.random.Generator, name: str = "emb"):
        self.vocab, self.dim = vocab, dim
        self.table = Param(f"{name}.table", init_params((vocab, dim), "embedding", rng))
        self._idx = None

    def params(self):
        return [self.table]

    def forward(self, idx, training=False, rng=None):
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.vocab):
            raise IndexError(f"{self.table.name}: index outside [0, {self.vocab})")
        self._idx = idx
        return self.table.value[idx]

    def backward(self, dy):
        if self._idx is None:
            raise NotForwardedError(f"{self.table.name}: backward called before forward")
        idx, self._idx = self._idx, None
        np.add.at(self.table.grad, idx.reshape(-1), dy.reshape(-1, self.dim))
        return None


class SlotEmbedding(Layer):
    """One independent table per input slot, output concatenated slot-major.

    Stored as a single (slots * rows, dim) matrix with per-slot row offsets,
    which has exactly the gradients of separate tables.
    """

    def __init__(self, n_slots: int, rows: int, dim: int, rng: np.random.Generator, name: str = "slots"):
        self.n_slots, self.rows, self.dim = n_slots, rows, dim
        self.emb = Embedding(n_slots * rows, dim, rng, name)
        self._offsets = np.arange(n_slots) * rows

    @property
    def out_dim(self) -> int:
        return self.n_slots * self.dim

    def params(self):
        return self.emb.params()

    def forward(self, idx, training=False, rng=None):
        idx = np.asarray(idx, dtype=np.int64)
        if idx.shape[-1] != self.n_slots:
            raise ValueError(f"expected {self.n_slots} slots, got {idx.shape[-1]}")
        if idx.size and (idx.min() < 0 or idx.max() >= self.rows):
            raise IndexError(f"slot index outside [0, {self.rows})")
        out = self.emb.forward(idx + self._offsets)
        return out.reshape(len(idx), self.out_dim)

    def backward(self, dy):
        self.emb.backward(dy.reshape(len(dy), self.n_slots, self.dim))
        return None


class LeakyReLU(Layer):
    def __init__(self, slope: float = LEAK):
        self.slope = slope
        self._x = None

    def forward(self, x, training=False, rng=None):
        self._x = x
        return np.where(x >= 0, x, self.slope * x)

    def backward(self, dy):
        if self._x is None:
            raise NotForwardedError("LeakyReLU: backward called before forward")
        x, self._x = self._x, None
        return np.where(x >= 0, dy, self.slope * dy)


class Tanh(Layer):
    def __init__(self):
        self._y = None

    def forward(self, x, training=False, rng=None):
        self._y = np.tanh(x)
        return self._y

    def backward(self, dy):
        if self._y is None:
            raise NotForwardedError("Tanh: backward called before forward")
        y, self._y = self._y, None
        return dy * (1.0 - y * y)


class Dropout(Layer):
    """Inverted dropout: survivors are scaled by 1/(1-rate) so eval mode is the identity."""

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = rate
        self._mask = None
        self._forwarded = False

    def forward(self, x, training=False, rng=None):
        self._forwarded = True
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dy):
        if not self._forwarded:
            raise NotForwardedError("Dropout: backward called before forward")
        self._forwarded = False
        mask, self._mask = self._mask, None
        return dy if mask is None else dy * mask


class Sequential(Layer):
    def __init__(self, *layers: Layer):
        self.layers = list(layers)

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, x, training=False, rng=None):
        for layer in self.layers:
            x = layer.forward(x, training, rng)
        return x

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy


def leaky_relu(x, slope: float = LEAK):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, x, slope * x)


def tanh_act(x):
    return np.tanh(np.asarray(x, dtype=np.float64))


def dropout(x, rate: float, training: bool, rng=None):
    return Dropout(rate).forward(np.asarray(x, dtype=np.float64), training, rng)


def softmax(theta, axis: int = -1) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    z = np.exp(theta - theta.max(axis=axis, keepdims=True))
    return z / z.sum(axis=axis, keepdims=True)


def softmax_backward(w: np.ndarray, dw: np.ndarray, axis: int = -1) -> np.ndarray:
    """Gradient w.r.t. the logits given the softmax output ``w`` and upstream ``dw``."""
    return w * (dw - (w * dw).sum(axis=axis, keepdims=True))


def bce_loss(p, y):
    """Elementwise binary cross-entropy and dL/dp.

    ``p`` is clamped to [1e-6, 1 - 1e-6] first; the gradient is evaluated at
    the clamped value.
    """
    p = np.clip(np.asarray(p, dtype=np.float64), P_FLOOR, 1.0 - P_FLOOR)
    y = np.asarray(y, dtype=np.float64)
    loss = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    grad = -y / p + (1.0 - y) / (1.0 - p)
    return loss, grad


class Adam:
    def __init__(self, params: list[Param], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]
        self.t = 0

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad.fill(0.0)

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            if self.lr:
                p.value -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def adam_step(state: Adam, params: list[Param] | None = None, grads: list[np.ndarray] | None = None) -> None:
    """Functional spelling of ``Adam.step``; optional ``grads`` overwrite the stored gradients."""
    if params is not None and [id(p) for p in params] != [id(p) for p in state.params]:
        raise ValueError("params do not match the optimizer state")
    if grads is not None:
        for p, g in zip(state.params, grads):
            if g.shape != p.value.shape:
                raise ValueError(f"gradient shape {g.shape} does not match {p.name} {p.value.shape}")
            p.grad[...] = g
    state.step()
