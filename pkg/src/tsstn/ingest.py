"""Frame files, match-level splits and min/max normalization statistics."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import Frame, FrameTable, GroupedFeatures, group_features, validate_frame

log = logging.getLogger(__name__)

NORM_FEATURES = (
    "gold_diff", "kill_diff", "tower_diff",
    "soldier_blue_top", "soldier_blue_middle", "soldier_blue_bottom",
    "soldier_red_top", "soldier_red_middle", "soldier_red_bottom",
    "t_min",
)
NORM_LOW, NORM_HIGH = -1.0, 2.0


class DataError(Exception):
    """Unusable input data (unreadable file, too few matches, empty split)."""


class LoadResult(NamedTuple):
    frames: FrameTable
    skipped: int
    problems: list[str]


def load_frames(path: str | os.PathLike, hero_pool: int | None = None) -> LoadResult:
    """Read a line-delimited frame file; malformed or invalid lines are skipped and counted."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read frame file {os.fspath(path)!r}: {exc}") from exc
    frames: list[Frame] = []
    problems: list[str] = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            frame = parse_frame_line(line)
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"line {lineno}: {exc}")
            continue
        report = validate_frame(frame, hero_pool)
        if report:
            problems.append(f"line {lineno}: " + "; ".join(report.violations))
            continue
        frames.append(frame)
    if problems:
        log.warning("skipped %d malformed line(s) in %s", len(problems), os.fspath(path))
    return LoadResult(FrameTable.from_frames(frames), len(problems), problems)


def parse_frame_line(line: str) -> Frame:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("frame record must be an object")
    return Frame.from_record(rec)


def frame_to_line(frame: Frame) -> str:
    return json.dumps(frame.to_record(), separators=(",", ":"))


def write_frames(path: str | os.PathLike, frames: Iterable[Frame]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for f in frames:
            fh.write(frame_to_line(f))
            fh.write("\n")
            n += 1
    return n


@dataclass(frozen=True)
class SplitSpec:
    test_matches: int
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.test_matches < 1:
            raise ValueError("test_matches must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")


def split_by_match(frames: FrameTable | Sequence[Frame], spec: SplitSpec):
    """Partition frames into (train, val, test) tables by match id.

    Test matches are drawn first; ``val_fraction`` of the remainder goes to
    validation and the rest to training.
    """
    table = frames if isinstance(frames, FrameTable) else FrameTable.from_frames(frames)
    ids = sorted(table.match_ids())
    n = len(ids)
    if n < 3:
        raise DataError(f"need at least 3 distinct matches to split, got {n}")
    n_test = spec.test_matches
    rest = n - n_test
    n_val = max(1, int(round(spec.val_fraction * rest)))
    if rest - n_val < 1:
        raise DataError(f"{n} matches cannot supply {n_test} test matches plus train and validation")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    which = np.empty(n, dtype=np.int8)
    which[order[:n_test]] = 2
    which[order[n_test:n_test + n_val]] = 1
    which[order[n_test + n_val:]] = 0
    lookup = dict(zip(ids, which.tolist()))
    part = np.fromiter((lookup[m] for m in table.match_id), dtype=np.int8, count=len(table))
    return tuple(table.take(np.flatnonzero(part == k)) for k in (0, 1, 2))


@dataclass(frozen=True)
class NormStats:
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    names: tuple[str, ...] = NORM_FEATURES

    def __post_init__(self):
        if not len(self.mins) == len(self.maxs) == len(self.names):
            raise ValueError("NormStats needs one min and max per feature")
        for name, lo, hi in zip(self.names, self.mins, self.maxs):
            if not hi >= lo:
                raise ValueError(f"max < min for {name}")

    def bounds(self, name: str) -> tuple[float, float]:
        k = self.names.index(name)
        return self.mins[k], self.maxs[k]

    def to_dict(self) -> dict:
        return {"names": list(self.names), "mins": list(self.mins), "maxs": list(self.maxs)}

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(tuple(map(float, d["mins"])), tuple(map(float, d["maxs"])), tuple(d["names"]))


def _norm_columns(g: GroupedFeatures) -> np.ndarray:
    return np.column_stack([g.gold_diff, g.kill_diff, g.tower_diff, g.soldier, g.t_min]).astype(np.float64)


def fit_norm_stats(train: FrameTable | Sequence[Frame] | GroupedFeatures) -> NormStats:
    g = train if isinstance(train, GroupedFeatures) else group_features(train)
    if len(g) == 0:
        raise DataError("cannot fit normalization statistics on an empty training set")
    cols = _norm_columns(g)
    return NormStats(tuple(cols.min(axis=0).tolist()), tuple(cols.max(axis=0).tolist()))


def normalize(x, lo: float, hi: float):
    """Min/max scale to [0, 1] (training range), clamped to [-1, 2]; a flat feature maps to 0."""
    x = np.asarray(x, dtype=np.float64)
    if hi == lo:
        return np.zeros_like(x)
    return np.clip((x - lo) / (hi - lo), NORM_LOW, NORM_HIGH)


def normalize_feature(x, stats: NormStats, name: str):
    return normalize(x, *stats.bounds(name))
