"""The two-stage model: spatial win-scores combined by time-binned importance weights."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .core import DEFAULT_HERO_POOL, GROUPS, N_GROUPS, GroupedFeatures
from .ingest import NormStats
from .nnkit import Param
from .spatial import AssembledInputs, SpatialStage, assemble_inputs
from .temporal import TemporalWeights

EVAL_CHUNK = 8192


def to_probability(F):
    """Map a combined score in [-1, 1] to P(blue wins)."""
    return (np.asarray(F, dtype=np.float64) + 1.0) / 2.0


def tie_break(n: int, seed: int) -> np.ndarray:
    """Seeded coin flips (True = blue) used whenever a score is exactly zero."""
    return np.random.default_rng(seed).random(n) < 0.5


class Predictor:
    """Shared surface of every trainable win predictor.

    Subclasses provide ``forward``/``backward`` over :class:`AssembledInputs`
    and a parameter list; scoring helpers here batch the forward pass.
    """

    kind = ""
    trainable = True

    def __init__(self, stats: NormStats, hero_vocab: int = DEFAULT_HERO_POOL, seed: int = 0):
        self.stats = stats
        self.hero_vocab = hero_vocab
        self.seed = seed

    def params(self) -> list[Param]:
        return []

    def config(self) -> dict[str, Any]:
        return {"hero_vocab": self.hero_vocab, "seed": self.seed}

    def assemble(self, g: GroupedFeatures) -> AssembledInputs:
        return assemble_inputs(g, self.stats, self.hero_vocab)

    def forward(self, inputs: AssembledInputs, training: bool = False, rng=None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dF: np.ndarray) -> None:
        raise NotImplementedError

    def after_step(self) -> None:
        pass

    def score(self, g: GroupedFeatures) -> np.ndarray:
        """Combined score F in (-1, 1), evaluation mode."""
        return self.score_inputs(self.assemble(g))

    def score_inputs(self, inputs: AssembledInputs) -> np.ndarray:
        out = [self.forward(inputs.take(slice(i, i + EVAL_CHUNK)))
               for i in range(0, len(inputs), EVAL_CHUNK)]
        return np.concatenate(out) if out else np.zeros(0)

    def predict_proba(self, g: GroupedFeatures) -> np.ndarray:
        return to_probability(self.score(g))

    def predict_binary(self, g: GroupedFeatures, seed: int | None = None) -> np.ndarray:
        """True where blue is predicted; exact ties go to a seeded coin."""
        return decide(self.score(g), self.seed if seed is None else seed)


def decide(F: np.ndarray, seed: int) -> np.ndarray:
    F = np.asarray(F)
    out = F > 0
    ties = F == 0
    if ties.any():
        out[ties] = tie_break(len(F), seed)[ties]
    return out


@dataclass(frozen=True)
class GroupAttribution:
    name: str
    win_score: float
    weight: float
    contribution: float


@dataclass(frozen=True)
class Explanation:
    t_min: float
    F: float
    p_blue: float
    groups: tuple[GroupAttribution, ...]
    ranking: tuple[int, ...]
    match_id: str | None = None

    def to_record(self, comment: str | None = None) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "match_id": self.match_id,
            "t_min": self.t_min,
            "p_blue": self.p_blue,
            "F": self.F,
            "groups": [{"name": a.name, "s": a.win_score, "w": a.weight, "c": a.contribution}
                       for a in self.groups],
        }
        if comment is not None:
            rec["comment"] = comment
        return rec


def build_explanation(win_scores, weights, t_min: float, match_id: str | None = None) -> Explanation:
    s = np.asarray(win_scores, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    c = w * s
    F = float(c.sum())
    ranking = tuple(int(i) for i in sorted(range(N_GROUPS), key=lambda i: (-abs(c[i]), i)))
    groups = tuple(GroupAttribution(GROUPS[i], float(s[i]), float(w[i]), float(c[i])) for i in range(N_GROUPS))
    return Explanation(float(t_min), F, float(to_probability(F)), groups, ranking, match_id)


class TsstnModel(Predictor):
    kind = "tsstn"

    def __init__(self, stats: NormStats, hero_vocab: int = DEFAULT_HERO_POOL, seed: int = 0):
        super().__init__(stats, hero_vocab, seed)
        rng = np.random.default_rng(seed)
        self.spatial = SpatialStage(rng, hero_vocab)
        self.temporal = TemporalWeights()
        self._cache = None

    def params(self):
        return self.spatial.params() + self.temporal.params()

    def forward(self, inputs, training=False, rng=None):
        s = self.spatial.forward(inputs, training, rng)
        w = self.temporal.forward(inputs.time_bin)
        self._cache = (s, w)
        return (w * s).sum(axis=1)

    def backward(self, dF):
        if self._cache is None:
            raise RuntimeError("TsstnModel: backward called before forward")
        s, w = self._cache
        self._cache = None
        self.temporal.backward(dF[:, None] * s)
        self.spatial.backward(dF[:, None] * w)

    def after_step(self):
        self.temporal.check_normalized()

    def win_scores(self, g: GroupedFeatures | AssembledInputs) -> np.ndarray:
        inputs = g if isinstance(g, AssembledInputs) else self.assemble(g)
        out = [self.spatial.forward(inputs.take(slice(i, i + EVAL_CHUNK)))
               for i in range(0, len(inputs), EVAL_CHUNK)]
        return np.concatenate(out) if out else np.zeros((0, N_GROUPS))

    def explain(self, g: GroupedFeatures, match_ids=None) -> list[Explanation]:
        inputs = self.assemble(g)
        s = self.win_scores(inputs)
        w = self.temporal.table()[inputs.time_bin]
        ids = [None] * len(g) if match_ids is None else list(match_ids)
        return [build_explanation(s[i], w[i], g.t_min[i], ids[i]) for i in range(len(g))]


def predict(model: TsstnModel, g: GroupedFeatures) -> list[Explanation]:
    return model.explain(g)


PHRASES = {
    "Gold": "gold amount",
    "Kill": "kill-count",
    "Tower": "towers",
    "WildResource": "wild resources",
    "Soldier": "soldier positions",
    "Heroes": "team composition",
}


def _join(items: list[str]) -> str:
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


def explain_text(e: Explanation, top_k: int = 2) -> str:
    """Commentary line naming the favored team and its top-k contributing groups."""
    if e.F == 0:
        return "The game is even: each team has a win probability of 50.0%."
    blue = e.F > 0
    team = "Blue Team" if blue else "Red Team"
    p = e.p_blue if blue else 1.0 - e.p_blue
    top = [e.groups[i] for i in e.ranking[:top_k]]
    sign = 1.0 if blue else -1.0
    pro = [f"{PHRASES[a.name]} ({a.name})" for a in top if sign * a.contribution > 0]
    con = [f"{PHRASES[a.name]} ({a.name})" for a in top if sign * a.contribution < 0]
    text = f"The win probability of the {team} is {100.0 * p:.1f}%"
    if pro:
        text += f", which is due to its advantages in {_join(pro)}"
    if con:
        text += f"{',' if pro else ''} despite its disadvantages in {_join(con)}"
    return text + "."
