"""Domain types, the frame record schema, and frame validation.

Blue is the reference side everywhere: labels, differences and probabilities
are all expressed from the blue team's point of view.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

GROUPS = ("Gold", "Kill", "Tower", "WildResource", "Soldier", "Heroes")
N_GROUPS = len(GROUPS)
GOLD, KILL, TOWER, WILD, SOLDIER, HEROES = range(N_GROUPS)

OBJECTIVES = ("overlords", "dark_tyrants", "tyrants", "red_buffs", "blue_buffs")
LANES = ("top", "middle", "bottom")
MAX_TOWERS = 9
TEAM_SIZE = 5
FRAME_STEP_MIN = 0.5
DEFAULT_HERO_POOL = 120
OOV_HERO = 0


@dataclass(frozen=True)
class TeamState:
    team_gold: int
    kills: int
    towers_total: int
    overlords: int = 0
    dark_tyrants: int = 0
    tyrants: int = 0
    red_buffs: int = 0
    blue_buffs: int = 0
    soldier_dist: tuple[float, float, float] = (0.0, 0.0, 0.0)
    heroes: tuple[int, ...] = (0, 0, 0, 0, 0)
    # stored but not fed to any model
    middle_towers: int | None = None
    crystal_towers: int | None = None
    participation: float | None = None

    @property
    def objectives(self) -> tuple[int, int, int, int, int]:
        return tuple(getattr(self, k) for k in OBJECTIVES)  # type: ignore[return-value]

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "team_gold": self.team_gold,
            "kills": self.kills,
            "towers_total": self.towers_total,
        }
        for k in OBJECTIVES:
            rec[k] = getattr(self, k)
        rec["soldier_dist"] = list(self.soldier_dist)
        rec["heroes"] = list(self.heroes)
        for k in ("middle_towers", "crystal_towers", "participation"):
            v = getattr(self, k)
            if v is not None:
                rec[k] = v
        return rec

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "TeamState":
        return cls(
            team_gold=rec["team_gold"],
            kills=rec["kills"],
            towers_total=rec["towers_total"],
            overlords=rec.get("overlords", 0),
            dark_tyrants=rec.get("dark_tyrants", 0),
            tyrants=rec.get("tyrants", 0),
            red_buffs=rec.get("red_buffs", 0),
            blue_buffs=rec.get("blue_buffs", 0),
            soldier_dist=tuple(rec["soldier_dist"]),
            heroes=tuple(rec["heroes"]),
            middle_towers=rec.get("middle_towers"),
            crystal_towers=rec.get("crystal_towers"),
            participation=rec.get("participation"),
        )


@dataclass(frozen=True)
class Frame:
    match_id: str
    t_min: float
    blue: TeamState
    red: TeamState
    blue_wins: bool

    @property
    def label(self) -> int:
        return int(self.blue_wins)

    def to_record(self) -> dict[str, Any]:
        return {
            "match_id": self.match_id,
            "t_min": self.t_min,
            "blue_wins": self.blue_wins,
            "blue": self.blue.to_record(),
            "red": self.red.to_record(),
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "Frame":
        return cls(
            match_id=str(rec["match_id"]),
            t_min=rec["t_min"],
            blue=TeamState.from_record(rec["blue"]),
            red=TeamState.from_record(rec["red"]),
            blue_wins=rec["blue_wins"],
        )


def swap_teams(f: Frame) -> Frame:
    """The same snapshot seen with the sides exchanged; the label flips."""
    return Frame(f.match_id, f.t_min, f.red, f.blue, not f.blue_wins)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        # truthy when there is something to report
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations


def _is_int(v: Any) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_real(v: Any) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)


def _check_team(side: str, team: TeamState, hero_pool: int | None, out: list[str]) -> None:
    for name in ("team_gold", "kills", *OBJECTIVES):
        v = getattr(team, name)
        if not _is_int(v) or v < 0:
            out.append(f"{side}.{name} must be a non-negative integer, got {v!r}")
    t = team.towers_total
    if not _is_int(t) or not 0 <= t <= MAX_TOWERS:
        out.append(f"{side}.towers_total must be an integer in [0, {MAX_TOWERS}], got {t!r}")
    sd = team.soldier_dist
    if len(sd) != len(LANES):
        out.append(f"{side}.soldier_dist must have {len(LANES)} lanes, got {len(sd)}")
    elif not all(_is_real(d) and math.isfinite(d) and d >= 0 for d in sd):
        out.append(f"{side}.soldier_dist must be non-negative reals, got {list(sd)!r}")
    heroes = team.heroes
    if len(heroes) != TEAM_SIZE:
        out.append(f"{side}.heroes must list exactly {TEAM_SIZE} heroes, got {len(heroes)}")
    bad = [h for h in heroes if not _is_int(h) or h < 0 or (hero_pool is not None and h >= hero_pool)]
    if bad:
        out.append(f"{side}.heroes has out-of-range identifiers {bad!r}")
    known = [h for h in heroes if h != OOV_HERO]
    if len(set(known)) != len(known):
        out.append(f"{side}.heroes has duplicate identifiers {list(heroes)!r}")


def validate_frame(f: Frame, hero_pool: int | None = None) -> ValidationReport:
    """Check every frame invariant and list all violations (never raises).

    Hero identifiers are range-checked against ``hero_pool`` only when it is
    given; repeated unknown (0) slots are allowed.
    """
    out: list[str] = []
    t = f.t_min
    if not _is_real(t) or not math.isfinite(t) or t < 0:
        out.append(f"t_min must be a non-negative real, got {t!r}")
    elif math.fmod(t, FRAME_STEP_MIN) != 0.0:
        out.append(f"t_min={t!r} is not on the {FRAME_STEP_MIN}-minute cadence")
    if not isinstance(f.blue_wins, (bool, np.bool_)):
        out.append(f"blue_wins must be a boolean, got {f.blue_wins!r}")
    _check_team("blue", f.blue, hero_pool, out)
    _check_team("red", f.red, hero_pool, out)
    return ValidationReport(out)


class FrameTable(Sequence[Frame]):
    """Columnar storage for many frames; index 0 of the team axis is blue.

    Indexing yields :class:`Frame` objects, so a table can stand in anywhere
    a sequence of frames is expected while keeping large synthetic sets cheap.
    """

    __slots__ = ("match_id", "t_min", "blue_wins", "team_gold", "kills", "towers",
                 "objectives", "soldier", "heroes")

    def __init__(self, match_id, t_min, blue_wins, team_gold, kills, towers,
                 objectives, soldier, heroes):
        self.match_id = np.asarray(match_id, dtype=object)
        self.t_min = np.asarray(t_min, dtype=np.float64)
        self.blue_wins = np.asarray(blue_wins, dtype=bool)
        self.team_gold = np.asarray(team_gold, dtype=np.int64).reshape(-1, 2)
        self.kills = np.asarray(kills, dtype=np.int64).reshape(-1, 2)
        self.towers = np.asarray(towers, dtype=np.int64).reshape(-1, 2)
        self.objectives = np.asarray(objectives, dtype=np.int64).reshape(-1, 2, len(OBJECTIVES))
        self.soldier = np.asarray(soldier, dtype=np.float64).reshape(-1, 2, len(LANES))
        self.heroes = np.asarray(heroes, dtype=np.int64).reshape(-1, 2, TEAM_SIZE)
        n = len(self.t_min)
        for name in self.__slots__:
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has {len(getattr(self, name))} rows, expected {n}")

    def __len__(self) -> int:
        return len(self.t_min)

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return self._frame(int(idx))
        return self.take(np.arange(len(self))[idx])

    def __iter__(self) -> Iterator[Frame]:
        for i in range(len(self)):
            yield self._frame(i)

    def _team(self, i: int, side: int) -> TeamState:
        obj = [int(v) for v in self.objectives[i, side]]
        return TeamState(
            team_gold=int(self.team_gold[i, side]),
            kills=int(self.kills[i, side]),
            towers_total=int(self.towers[i, side]),
            overlords=obj[0], dark_tyrants=obj[1], tyrants=obj[2],
            red_buffs=obj[3], blue_buffs=obj[4],
            soldier_dist=tuple(float(v) for v in self.soldier[i, side]),
            heroes=tuple(int(v) for v in self.heroes[i, side]),
        )

    def _frame(self, i: int) -> Frame:
        return Frame(
            match_id=str(self.match_id[i]),
            t_min=float(self.t_min[i]),
            blue=self._team(i, 0),
            red=self._team(i, 1),
            blue_wins=bool(self.blue_wins[i]),
        )

    def take(self, rows) -> "FrameTable":
        rows = np.asarray(rows)
        return FrameTable(*(getattr(self, name)[rows] for name in self.__slots__))

    @property
    def labels(self) -> np.ndarray:
        return self.blue_wins.astype(np.int64)

    def swapped(self) -> "FrameTable":
        flip = lambda a: a[:, ::-1].copy()  # noqa: E731
        return FrameTable(self.match_id, self.t_min, ~self.blue_wins, flip(self.team_gold),
                          flip(self.kills), flip(self.towers), flip(self.objectives),
                          flip(self.soldier), flip(self.heroes))

    def match_ids(self) -> list[str]:
        """Distinct match ids in first-appearance order."""
        return list(dict.fromkeys(self.match_id.tolist()))

    @classmethod
    def from_frames(cls, frames: Iterable[Frame]) -> "FrameTable":
        if isinstance(frames, FrameTable):
            return frames
        frames = list(frames)

        def team_cols(t: TeamState):
            return (t.team_gold, t.kills, t.towers_total, t.objectives, t.soldier_dist, t.heroes)

        cols: list[list] = [[] for _ in range(9)]
        for f in frames:
            b, r = team_cols(f.blue), team_cols(f.red)
            cols[0].append(f.match_id)
            cols[1].append(f.t_min)
            cols[2].append(bool(f.blue_wins))
            for k in range(6):
                cols[3 + k].append((b[k], r[k]))
        if not frames:
            return cls.empty()
        return cls(*cols)

    @classmethod
    def empty(cls) -> "FrameTable":
        z = lambda *s: np.zeros((0, *s))  # noqa: E731
        return cls(np.zeros(0, dtype=object), z(), z(), z(2), z(2), z(2),
                   z(2, len(OBJECTIVES)), z(2, len(LANES)), z(2, TEAM_SIZE))

    @classmethod
    def concat(cls, tables: Sequence["FrameTable"]) -> "FrameTable":
        if not tables:
            return cls.empty()
        return cls(*(np.concatenate([getattr(t, name) for t in tables]) for name in cls.__slots__))


@dataclass(frozen=True)
class GroupedFeatures:
    """The six feature-group inputs for a batch of frames (leading axis = frame).

    ``wild`` holds the five objective counts blue-first, ``soldier`` the three
    lane distances blue-first, ``heroes`` the ten identifiers blue-first.
    """

    gold_diff: np.ndarray
    kill_diff: np.ndarray
    tower_diff: np.ndarray
    wild: np.ndarray
    soldier: np.ndarray
    heroes: np.ndarray
    t_min: np.ndarray

    def __len__(self) -> int:
        return len(self.t_min)

    def take(self, rows) -> "GroupedFeatures":
        return GroupedFeatures(*(getattr(self, k)[rows] for k in self.__dataclass_fields__))

    def replace(self, **changes) -> "GroupedFeatures":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return GroupedFeatures(**fields)


def group_features(frames: Frame | Sequence[Frame] | FrameTable) -> GroupedFeatures:
    """Reduce raw team states to the six group inputs (a single frame gives a batch of one)."""
    if isinstance(frames, Frame):
        frames = [frames]
    table = frames if isinstance(frames, FrameTable) else FrameTable.from_frames(frames)
    n = len(table)
    diff = lambda a: (a[:, 0] - a[:, 1]).astype(np.float64)  # noqa: E731
    return GroupedFeatures(
        gold_diff=diff(table.team_gold),
        kill_diff=diff(table.kills),
        tower_diff=diff(table.towers),
        wild=table.objectives.reshape(n, 2 * len(OBJECTIVES)).copy(),
        soldier=table.soldier.reshape(n, 2 * len(LANES)).copy(),
        heroes=table.heroes.reshape(n, 2 * TEAM_SIZE).copy(),
        t_min=table.t_min.copy(),
    )
