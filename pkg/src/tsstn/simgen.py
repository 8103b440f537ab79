"""Synthetic matches with a known latent ground truth.

Each match draws an in-game advantage path A(t) (ending at a + swings) and a
hero-draft advantage h from hidden per-hero strengths plus a pairwise
synergy table. Every observable channel drifts with A(t) at a strength set
by ``signal_weights`` and carries random-walk noise of scale ``noise_scale``;
the label is the sign of the terminal latent advantage plus noise.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_HERO_POOL, FRAME_STEP_MIN, GROUPS, MAX_TOWERS, N_GROUPS, TEAM_SIZE, FrameTable, group_features

MASK64 = (1 << 64) - 1
DEFAULT_SIGNAL = (0.4, 0.15, 0.15, 0.1, 0.1, 0.1)

PATH_SWING = 0.35       # sd of the Brownian swing added to the match-long drift
SIGNAL_GAIN = 3.0
NOISE_VAR_PER_MIN = 0.1
MIN_DURATION, MAX_DURATION = 6.0, 40.0
OVERLORD_START, DARK_TYRANT_START, WILD_START = 8.0, 10.0, 8.0
SOLDIER_BASE = (8900.0, 7300.0, 8700.0)


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def match_seed(seed: int, index: int) -> int:
    """Sub-seed for match ``index``; independent of how matches are scheduled."""
    return splitmix64((splitmix64(seed & MASK64) + index) & MASK64)


def hero_table_seed(seed: int) -> int:
    return splitmix64(splitmix64(seed & MASK64) ^ 0xA5A5A5A5A5A5A5A5)


@dataclass(frozen=True)
class SimConfig:
    n_matches: int = 1000
    seed: int = 0
    mean_duration_min: float = 16.0
    signal_weights: tuple[float, ...] = DEFAULT_SIGNAL
    noise_scale: float = 0.3
    hero_pool: int = DEFAULT_HERO_POOL
    synergy_scale: float = 0.3
    # 0 makes every match last exactly mean_duration_min
    duration_spread: float = 1.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.signal_weights)
        object.__setattr__(self, "signal_weights", w)
        if len(w) != N_GROUPS or any(v < 0 for v in w) or abs(sum(w) - 1.0) > 1e-9:
            raise ValueError("signal_weights must be six non-negative numbers summing to 1")
        if not 8.0 <= self.mean_duration_min <= 30.0:
            raise ValueError("mean_duration_min must lie in [8, 30]")
        if self.n_matches < 0 or self.noise_scale < 0 or self.synergy_scale < 0 or self.duration_spread < 0:
            raise ValueError("counts and scales must be non-negative")
        if self.hero_pool < 2 * TEAM_SIZE + 1:
            raise ValueError("hero_pool too small for two disjoint teams")


def parse_signal(text: str) -> tuple[float, ...]:
    """Parse ``gold=0.4,kill=0.1,...``; unnamed groups get 0."""
    aliases = {g.lower(): i for i, g in enumerate(GROUPS)}
    aliases.update({"wild": 3, "wildresource": 3, "soldiers": 4, "hero": 5})
    out = [0.0] * N_GROUPS
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, value = part.partition("=")
        key = name.strip().lower()
        if key not in aliases or not value:
            raise ValueError(f"bad signal term {part!r}")
        out[aliases[key]] = float(value)
    return tuple(out)


@dataclass
class HeroTables:
    strength: np.ndarray   # (H,), entry 0 = unknown hero
    synergy: np.ndarray    # (H, H) symmetric, zero diagonal
    synergy_scale: float

    def team_value(self, heroes) -> float:
        heroes = np.asarray(heroes)
        pair = self.synergy[np.ix_(heroes, heroes)].sum() / 2.0
        return float(self.strength[heroes].sum() + self.synergy_scale * pair)

    @property
    def advantage_sd(self) -> float:
        return math.sqrt(2 * TEAM_SIZE + 2 * 10 * self.synergy_scale ** 2)

    def to_dict(self) -> dict:
        return {"hero_pool": len(self.strength), "synergy_scale": self.synergy_scale,
                "strength": self.strength.tolist(), "synergy": self.synergy.tolist()}


def hero_tables(cfg: SimConfig) -> HeroTables:
    rng = np.random.default_rng(hero_table_seed(cfg.seed))
    H = cfg.hero_pool
    strength = rng.normal(size=H)
    strength[0] = 0.0
    upper = np.triu(rng.normal(size=(H, H)), 1)
    synergy = upper + upper.T
    synergy[0, :] = synergy[:, 0] = 0.0
    return HeroTables(strength, synergy, cfg.synergy_scale)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def _schedule(t: np.ndarray, start: float, every: float) -> np.ndarray:
    """Boolean mask of frames at which a respawning objective is contested."""
    k = (t - start) / every
    return (t >= start) & (np.abs(k - np.round(k)) < 1e-9)


@dataclass
class _Match:
    columns: tuple
    latent: dict = field(default_factory=dict)


def _simulate_match(cfg: SimConfig, tables: HeroTables, index: int) -> _Match:
    rng = np.random.default_rng(match_seed(cfg.seed, index))
    w = np.asarray(cfg.signal_weights)
    noise = cfg.noise_scale

    heroes = rng.choice(np.arange(1, cfg.hero_pool), size=2 * TEAM_SIZE, replace=False)
    h = (tables.team_value(heroes[:TEAM_SIZE]) - tables.team_value(heroes[TEAM_SIZE:])) / tables.advantage_sd
    a = rng.normal()

    # decisive games end sooner
    if cfg.duration_spread > 0:
        shape = 8.0 / cfg.duration_spread ** 2
        stretch = rng.gamma(shape, 1.0 / shape)
        lead = abs((1.0 - w[5]) * a + w[5] * h)
        duration = cfg.mean_duration_min * stretch * math.exp(-0.25 * (lead - 0.8))
    else:
        rng.gamma(1.0)  # keep the draw sequence aligned across spreads
        duration = cfg.mean_duration_min
    duration = min(max(duration, MIN_DURATION), MAX_DURATION)
    n_steps = int(math.floor(duration / FRAME_STEP_MIN + 0.5))
    t = np.arange(n_steps + 1) * FRAME_STEP_MIN

    swing = np.concatenate([[0.0], np.cumsum(rng.normal(0.0, math.sqrt(1.0 / n_steps), n_steps))])
    A = a * (np.arange(n_steps + 1) / n_steps) + PATH_SWING * swing
    terminal = A[-1] / math.sqrt(1.0 + PATH_SWING ** 2)
    latent = (1.0 - w[5]) * terminal + w[5] * h
    blue_wins = latent + noise * rng.normal() > 0

    def walk():
        steps = rng.normal(0.0, math.sqrt(NOISE_VAR_PER_MIN * FRAME_STEP_MIN), n_steps)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def evidence(g: int, growth=1.0):
        return SIGNAL_GAIN * w[g] * A * growth + noise * walk()

    # gold: sign-preserving integer split around a shared baseline
    base = np.round(1500.0 + 2300.0 * t).astype(np.int64)
    gd_real = 0.05 * base * np.clip(evidence(0), -8.0, 8.0)
    gd = np.round(gd_real).astype(np.int64)
    gd = np.where((gd == 0) & (gd_real != 0), np.sign(gd_real).astype(np.int64), gd)
    red_gold = base - np.floor_divide(gd, 2)
    gold = np.column_stack([red_gold + gd, red_gold])

    # kills: Poisson fights, blue share tilted by the kill channel
    e_kill = evidence(1)
    fights = rng.poisson((0.8 + 0.08 * t[1:]) * FRAME_STEP_MIN)
    blue_k = rng.binomial(fights, _sigmoid(1.5 * e_kill[1:]))
    kills = np.zeros((n_steps + 1, 2), dtype=np.int64)
    kills[1:, 0] = np.cumsum(blue_k)
    kills[1:, 1] = np.cumsum(fights - blue_k)

    # towers remaining; the tower channel decides which side loses one
    e_tower = evidence(2)
    falls = (rng.random(n_steps + 1) < np.minimum(0.4, 0.05 + 0.02 * t)) & (t >= 3.0)
    blue_victim = rng.random(n_steps + 1) < _sigmoid(-2.0 * e_tower)
    lost_b = np.minimum(np.cumsum(falls & blue_victim), MAX_TOWERS)
    lost_r = np.minimum(np.cumsum(falls & ~blue_victim), MAX_TOWERS)
    towers = np.column_stack([MAX_TOWERS - lost_b, MAX_TOWERS - lost_r])

    # neutral objectives: overlord, dark tyrant, tyrant, red buff, blue buff
    e_wild = evidence(3)
    slots = [_schedule(t, OVERLORD_START, 3.0), _schedule(t, DARK_TYRANT_START, 3.0),
             _schedule(t, WILD_START + 0.5, 3.0), _schedule(t, WILD_START, 1.5),
             _schedule(t, WILD_START + 0.5, 1.5)]
    p_blue = _sigmoid(2.0 * e_wild)
    objectives = np.zeros((n_steps + 1, 2, 5), dtype=np.int64)
    for j, due in enumerate(slots):
        taken = due & (rng.random(n_steps + 1) < 0.85)
        to_blue = rng.random(n_steps + 1) < p_blue
        objectives[:, 0, j] = np.cumsum(taken & to_blue)
        objectives[:, 1, j] = np.cumsum(taken & ~to_blue)

    # soldiers push harder late in the game
    growth = 0.3 + t / 10.0
    soldier = np.zeros((n_steps + 1, 2, 3))
    for lane, base_d in enumerate(SOLDIER_BASE):
        push = np.tanh(0.5 * evidence(4, growth))
        soldier[:, 0, lane] = np.round(base_d * (1.0 - 0.3 * push), 1)
        soldier[:, 1, lane] = np.round(base_d * (1.0 + 0.3 * push), 1)

    n = n_steps + 1
    cols = (
        np.full(n, f"s{cfg.seed}-{index:06d}", dtype=object), t, np.full(n, blue_wins), gold, kills,
        towers, objectives, soldier, np.tile(heroes.reshape(1, 2, TEAM_SIZE), (n, 1, 1)),
    )
    return _Match(cols, {"a": a, "hero_advantage": h, "terminal": terminal, "latent": latent,
                         "duration": float(t[-1]), "blue_wins": bool(blue_wins)})


def generate(cfg: SimConfig, with_latent: bool = False):
    """Frames for ``cfg.n_matches`` matches, every half minute from 0 to the end of each game.

    With ``with_latent`` also returns one dict of ground-truth quantities per match.
    """
    tables = hero_tables(cfg)
    matches = [_simulate_match(cfg, tables, i) for i in range(cfg.n_matches)]
    if not matches:
        table = FrameTable.empty()
    else:
        table = FrameTable(*(np.concatenate([m.columns[k] for m in matches]) for k in range(9)))
    if with_latent:
        return table, [m.latent for m in matches]
    return table


def dump_hero_tables(cfg: SimConfig, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(hero_tables(cfg).to_dict(), fh)


@dataclass
class TimePointSummary:
    t_min: float
    frames: int
    blue_win_fraction: float
    means: dict[str, float]
    variances: dict[str, float]


@dataclass
class SimSummary:
    n_frames: int
    n_matches: int
    blue_win_fraction: float
    mean_duration_min: float
    by_time: list[TimePointSummary]


SUMMARY_FEATURES = ("gold_diff", "kill_diff", "tower_diff", "wild_diff", "soldier_diff")


def summarize(frames: FrameTable) -> SimSummary:
    if len(frames) == 0:
        raise ValueError("cannot summarize an empty frame set")
    g = group_features(frames)
    feats = {
        "gold_diff": g.gold_diff,
        "kill_diff": g.kill_diff,
        "tower_diff": g.tower_diff,
        "wild_diff": (g.wild[:, :5].sum(axis=1) - g.wild[:, 5:].sum(axis=1)).astype(np.float64),
        "soldier_diff": (g.soldier[:, :3] - g.soldier[:, 3:]).mean(axis=1),
    }
    ids, first = np.unique(frames.match_id.astype(str), return_index=True)
    per_match_win = frames.blue_wins[first]
    ends = {}
    for m, t in zip(frames.match_id, frames.t_min):
        ends[m] = max(ends.get(m, 0.0), t)
    rows = []
    for t in np.unique(frames.t_min):
        sel = frames.t_min == t
        rows.append(TimePointSummary(
            float(t), int(sel.sum()), float(frames.blue_wins[sel].mean()),
            {k: float(v[sel].mean()) for k, v in feats.items()},
            {k: float(v[sel].var()) for k, v in feats.items()},
        ))
    return SimSummary(len(frames), len(ids), float(per_match_win.mean()),
                      float(np.mean(list(ends.values()))), rows)
