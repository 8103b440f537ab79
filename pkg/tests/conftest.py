import numpy as np
import pytest

from tsstn.core import Frame, FrameTable, TeamState
from tsstn.simgen import SimConfig, generate


def team(gold=3000, kills=2, towers=9, heroes=(1, 2, 3, 4, 5), soldier=(1000.0, 2000.0, 1500.0), **kw):
    return TeamState(team_gold=gold, kills=kills, towers_total=towers, soldier_dist=tuple(soldier),
                     heroes=tuple(heroes), **kw)


def frame(t=5.0, blue=None, red=None, blue_wins=True, match_id="m0"):
    return Frame(match_id, t, blue or team(), red or team(heroes=(6, 7, 8, 9, 10)), blue_wins)


def random_frames(n, seed=0, hero_pool=120):
    """Valid frames with independent random fields (no match structure)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        heroes = rng.choice(np.arange(1, hero_pool), size=10, replace=False)
        sides = []
        for side in range(2):
            obj = rng.integers(0, 4, size=5)
            sides.append(TeamState(
                team_gold=int(rng.integers(0, 60000)),
                kills=int(rng.integers(0, 40)),
                towers_total=int(rng.integers(0, 10)),
                overlords=int(obj[0]), dark_tyrants=int(obj[1]), tyrants=int(obj[2]),
                red_buffs=int(obj[3]), blue_buffs=int(obj[4]),
                soldier_dist=tuple(float(v) for v in rng.uniform(0, 12000, size=3)),
                heroes=tuple(int(h) for h in heroes[5 * side:5 * side + 5]),
            ))
        out.append(Frame(f"r{i}", 0.5 * int(rng.integers(0, 50)), sides[0], sides[1], bool(rng.random() < 0.5)))
    return FrameTable.from_frames(out)


@pytest.fixture(scope="session")
def small_sim():
    return generate(SimConfig(n_matches=60, seed=3))


# acceptance results: criterion number -> list of (ok, detail); printed after the run
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}
ACCEPTANCE_TITLES = {
    1: "worked commentary example",
    2: "importance weights stay on the simplex",
    3: "analytic gradients match finite differences",
    4: "recoverability, gold signal",
    5: "recoverability, pregame hero signal",
    6: "baseline ordering",
    7: "independence and interpretability invariants",
    8: "determinism and persistence",
}


def record(n: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(n, []).append((bool(ok), detail))
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in ACCEPTANCE_TITLES.items():
        parts = ACCEPTANCE.get(n)
        if not parts:
            tr.write_line(f"FAIL  {n}. {title}: not run")
            continue
        ok = all(p[0] for p in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {n}. {title}: " + "; ".join(p[1] for p in parts))
