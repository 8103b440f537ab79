"""Input assembly and the six per-group spatial models.

Every spatial model sees only its own group's features plus game time and
emits a win-score in (-1, 1). Preprocessing is shared with the baselines via
:func:`assemble_inputs`, which turns grouped features into normalized
scalars and integer lookup indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_HERO_POOL, GOLD, GROUPS, HEROES, KILL, OOV_HERO, SOLDIER, TEAM_SIZE, TOWER, WILD, GroupedFeatures
from .ingest import NORM_FEATURES, NormStats, normalize
from .nnkit import Dense, Dropout, Embedding, Layer, LeakyReLU, Sequential, SlotEmbedding, Tanh
from .temporal import N_BINS, time_bin

WILD_CAP = 10
SOLDIER_BUCKETS = 16
SLOT_DIM = 8
HERO_DIM = 16
TIME_DIM = 8
DROPOUT = 0.2
HIDDEN = {WILD: (256, 16), SOLDIER: (256, 16), HEROES: (128, 16)}


@dataclass(frozen=True)
class AssembledInputs:
    scalars: np.ndarray      # (N, 3) normalized gold/kill/tower differences
    t_norm: np.ndarray       # (N,)
    wild_idx: np.ndarray     # (N, 10) clipped objective counts
    soldier_idx: np.ndarray  # (N, 6) distance buckets
    hero_idx: np.ndarray     # (N, 10) vocabulary indices, OOV mapped to 0
    time_bin: np.ndarray     # (N,)

    def __len__(self) -> int:
        return len(self.t_norm)

    def take(self, rows) -> "AssembledInputs":
        return AssembledInputs(*(getattr(self, k)[rows] for k in self.__dataclass_fields__))


def soldier_bucket(x_norm):
    return np.clip(np.floor(np.asarray(x_norm) * SOLDIER_BUCKETS), 0, SOLDIER_BUCKETS - 1).astype(np.int64)


def assemble_inputs(g: GroupedFeatures, stats: NormStats, hero_vocab: int = DEFAULT_HERO_POOL) -> AssembledInputs:
    def norm(x, name):
        return normalize(x, *stats.bounds(name))

    scalars = np.column_stack([norm(g.gold_diff, "gold_diff"),
                               norm(g.kill_diff, "kill_diff"),
                               norm(g.tower_diff, "tower_diff")])
    soldier_names = NORM_FEATURES[3:9]
    soldier = np.column_stack([norm(g.soldier[:, k], name) for k, name in enumerate(soldier_names)])
    heroes = np.asarray(g.heroes, dtype=np.int64)
    heroes = np.where((heroes < 0) | (heroes >= hero_vocab), OOV_HERO, heroes)
    return AssembledInputs(
        scalars=scalars,
        t_norm=norm(g.t_min, "t_min"),
        wild_idx=np.clip(np.asarray(g.wild, dtype=np.int64), 0, WILD_CAP),
        soldier_idx=soldier_bucket(soldier),
        hero_idx=heroes,
        time_bin=time_bin(g.t_min).reshape(-1),
    )


class HeroPool(Layer):
    """Shared hero table; each team's five embeddings are summed, blue then red."""

    def __init__(self, vocab: int, dim: int, rng: np.random.Generator, name: str = "heroes"):
        self.emb = Embedding(vocab, dim, rng, f"{name}.emb")
        self.dim = dim

    @property
    def out_dim(self) -> int:
        return 2 * self.dim

    def params(self):
        return self.emb.params()

    def forward(self, idx, training=False, rng=None):
        idx = np.asarray(idx)
        # fixed summation order makes the pooled vector bit-identical under reordering
        idx = np.concatenate([np.sort(idx[:, :TEAM_SIZE], axis=1), np.sort(idx[:, TEAM_SIZE:], axis=1)], axis=1)
        e = self.emb.forward(idx)
        return np.concatenate([e[:, :TEAM_SIZE].sum(axis=1), e[:, TEAM_SIZE:].sum(axis=1)], axis=1)

    def backward(self, dy):
        n = len(dy)
        de = np.empty((n, 2 * TEAM_SIZE, self.dim))
        de[:, :TEAM_SIZE] = dy[:, None, :self.dim]
        de[:, TEAM_SIZE:] = dy[:, None, self.dim:]
        self.emb.backward(de)
        return None


class ScalarSpatialModel:
    """tanh(a * diff + b * time + c) over one normalized scalar difference."""

    kind = "scalar"

    def __init__(self, group: int, rng: np.random.Generator):
        self.group = group
        self.name = GROUPS[group]
        self.net = Sequential(Dense(2, 1, rng, f"{self.name}.lr"), Tanh())

    def params(self):
        return self.net.params()

    def features(self, inputs: AssembledInputs) -> np.ndarray:
        return np.column_stack([inputs.scalars[:, self.group], inputs.t_norm])

    def forward(self, inputs: AssembledInputs, training=False, rng=None) -> np.ndarray:
        return self.net.forward(self.features(inputs), training, rng)[:, 0]

    def backward(self, ds: np.ndarray) -> None:
        self.net.backward(ds[:, None])


class MlpSpatialModel:
    """Embedded categorical group + time embedding through a two-hidden-layer network."""

    kind = "mlp"

    def __init__(self, group: int, rng: np.random.Generator, hero_vocab: int = DEFAULT_HERO_POOL,
                 hidden: tuple[int, int] | None = None):
        self.group = group
        self.name = GROUPS[group]
        if group == WILD:
            self.encoder: Layer = SlotEmbedding(10, WILD_CAP + 1, SLOT_DIM, rng, f"{self.name}.slots")
            self.field = "wild_idx"
        elif group == SOLDIER:
            self.encoder = SlotEmbedding(6, SOLDIER_BUCKETS, SLOT_DIM, rng, f"{self.name}.slots")
            self.field = "soldier_idx"
        elif group == HEROES:
            self.encoder = HeroPool(hero_vocab, HERO_DIM, rng, self.name)
            self.field = "hero_idx"
        else:
            raise ValueError(f"group {GROUPS[group]} is not categorical")
        self.time_emb = Embedding(N_BINS, TIME_DIM, rng, f"{self.name}.time")
        h1, h2 = hidden or HIDDEN[group]
        self.n_in = self.encoder.out_dim + TIME_DIM
        self.net = Sequential(
            Dense(self.n_in, h1, rng, f"{self.name}.h1"), LeakyReLU(), Dropout(DROPOUT),
            Dense(h1, h2, rng, f"{self.name}.h2"), LeakyReLU(), Dropout(DROPOUT),
            Dense(h2, 1, rng, f"{self.name}.out"), Tanh(),
        )

    def params(self):
        return self.encoder.params() + self.time_emb.params() + self.net.params()

    def input_vector(self, inputs: AssembledInputs) -> np.ndarray:
        """The concatenated embedding vector fed to the first hidden layer."""
        return np.concatenate([self.encoder.forward(getattr(inputs, self.field)),
                               self.time_emb.forward(inputs.time_bin)], axis=1)

    def forward(self, inputs: AssembledInputs, training=False, rng=None) -> np.ndarray:
        return self.net.forward(self.input_vector(inputs), training, rng)[:, 0]

    def backward(self, ds: np.ndarray) -> None:
        dx = self.net.backward(ds[:, None])
        k = self.encoder.out_dim
        self.encoder.backward(dx[:, :k])
        self.time_emb.backward(dx[:, k:])


def assemble_mlp_input(model: MlpSpatialModel, inputs: AssembledInputs) -> np.ndarray:
    return model.input_vector(inputs)


class SpatialStage:
    """The six spatial models in fixed group order."""

    def __init__(self, rng: np.random.Generator, hero_vocab: int = DEFAULT_HERO_POOL):
        self.models = [
            ScalarSpatialModel(GOLD, rng),
            ScalarSpatialModel(KILL, rng),
            ScalarSpatialModel(TOWER, rng),
            MlpSpatialModel(WILD, rng, hero_vocab),
            MlpSpatialModel(SOLDIER, rng, hero_vocab),
            MlpSpatialModel(HEROES, rng, hero_vocab),
        ]

    def params(self):
        return [p for m in self.models for p in m.params()]

    def forward(self, inputs: AssembledInputs, training=False, rng=None) -> np.ndarray:
        return np.column_stack([m.forward(inputs, training, rng) for m in self.models])

    def backward(self, ds: np.ndarray) -> None:
        for i, m in enumerate(self.models):
            m.backward(np.ascontiguousarray(ds[:, i]))
