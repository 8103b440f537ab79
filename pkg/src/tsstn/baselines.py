"""Comparison models: gold heuristic, all-feature logistic regression, fully-connected net."""
from __future__ import annotations

import numpy as np

from .core import DEFAULT_HERO_POOL, GroupedFeatures
from .ingest import NormStats
from .model import Predictor
from .nnkit import Dense, Dropout, Embedding, LeakyReLU, Sequential, SlotEmbedding, Tanh
from .spatial import DROPOUT, HERO_DIM, SLOT_DIM, SOLDIER_BUCKETS, TIME_DIM, WILD_CAP, AssembledInputs, HeroPool
from .temporal import N_BINS

WIDE_FC_HIDDEN = (1024, 4096, 512, 64)
DESK_FC_HIDDEN = (128, 256, 64, 16)


class HeuristicModel(Predictor):
    """The team with more gold is predicted to win."""

    kind = "heuristic"
    trainable = False

    def assemble(self, g: GroupedFeatures) -> GroupedFeatures:  # type: ignore[override]
        return g

    def forward(self, inputs, training: bool = False, rng=None) -> np.ndarray:
        return np.sign(np.asarray(inputs.gold_diff, dtype=np.float64))


def heuristic_predict(g: GroupedFeatures, seed: int = 0) -> np.ndarray:
    return HeuristicModel(None, seed=seed).predict_binary(g)  # type: ignore[arg-type]


class FullInputEncoder:
    """All six groups' preprocessed inputs concatenated, each categorical group embedded."""

    def __init__(self, rng: np.random.Generator, hero_vocab: int, name: str):
        self.wild = SlotEmbedding(10, WILD_CAP + 1, SLOT_DIM, rng, f"{name}.wild")
        self.soldier = SlotEmbedding(6, SOLDIER_BUCKETS, SLOT_DIM, rng, f"{name}.soldier")
        self.heroes = HeroPool(hero_vocab, HERO_DIM, rng, f"{name}.heroes")
        self.time = Embedding(N_BINS, TIME_DIM, rng, f"{name}.time")
        self.widths = (4, self.wild.out_dim, self.soldier.out_dim, self.heroes.out_dim, TIME_DIM)
        self.out_dim = sum(self.widths)

    def params(self):
        return self.wild.params() + self.soldier.params() + self.heroes.params() + self.time.params()

    def forward(self, inputs: AssembledInputs) -> np.ndarray:
        return np.concatenate([
            inputs.scalars, inputs.t_norm[:, None],
            self.wild.forward(inputs.wild_idx),
            self.soldier.forward(inputs.soldier_idx),
            self.heroes.forward(inputs.hero_idx),
            self.time.forward(inputs.time_bin),
        ], axis=1)

    def backward(self, dx: np.ndarray) -> None:
        edges = np.cumsum(self.widths)[:-1]
        _, dw, ds, dh, dt = np.split(dx, edges, axis=1)
        self.wild.backward(dw)
        self.soldier.backward(ds)
        self.heroes.backward(dh)
        self.time.backward(dt)


class _EncodedNet(Predictor):
    def params(self):
        return self.encoder.params() + self.net.params()

    def forward(self, inputs, training=False, rng=None):
        return self.net.forward(self.encoder.forward(inputs), training, rng)[:, 0]

    def backward(self, dF):
        self.encoder.backward(self.net.backward(dF[:, None]))


class LogisticAllModel(_EncodedNet):
    kind = "lr"

    def __init__(self, stats: NormStats, hero_vocab: int = DEFAULT_HERO_POOL, seed: int = 0):
        super().__init__(stats, hero_vocab, seed)
        rng = np.random.default_rng(seed)
        self.encoder = FullInputEncoder(rng, hero_vocab, "lr")
        self.net = Sequential(Dense(self.encoder.out_dim, 1, rng, "lr.out"), Tanh())


class FullyConnectedModel(_EncodedNet):
    kind = "fc"

    def __init__(self, stats: NormStats, hero_vocab: int = DEFAULT_HERO_POOL, seed: int = 0,
                 hidden: tuple[int, ...] = DESK_FC_HIDDEN):
        super().__init__(stats, hero_vocab, seed)
        self.hidden = tuple(int(h) for h in hidden)
        rng = np.random.default_rng(seed)
        self.encoder = FullInputEncoder(rng, hero_vocab, "fc")
        layers = []
        n_in = self.encoder.out_dim
        for k, h in enumerate(self.hidden):
            layers += [Dense(n_in, h, rng, f"fc.h{k + 1}"), LeakyReLU(), Dropout(DROPOUT)]
            n_in = h
        layers += [Dense(n_in, 1, rng, "fc.out"), Tanh()]
        self.net = Sequential(*layers)

    def config(self):
        return {**super().config(), "hidden": list(self.hidden)}


def baseline_predict(model: Predictor, g: GroupedFeatures) -> np.ndarray:
    return model.predict_proba(g)
