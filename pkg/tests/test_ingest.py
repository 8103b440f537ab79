import json

import pytest

from conftest import frame, random_frames, team
from tsstn.core import FrameTable, group_features
from tsstn.ingest import (DataError, NormStats, SplitSpec, fit_norm_stats, frame_to_line, load_frames,
                          normalize, normalize_feature, split_by_match, write_frames)


def _matches(n, frames_per=3):
    frames = []
    for m in range(n):
        for k in range(frames_per):
            frames.append(frame(t=0.5 * k, match_id=f"g{m:03d}", blue_wins=m % 2 == 0))
    return FrameTable.from_frames(frames)


def test_load_three_valid_lines(tmp_path):
    p = tmp_path / "f.jsonl"
    write_frames(p, random_frames(3))
    res = load_frames(p)
    assert len(res.frames) == 3 and res.skipped == 0


def test_malformed_line_skipped_and_counted(tmp_path, caplog):
    p = tmp_path / "f.jsonl"
    lines = [frame_to_line(f) for f in random_frames(2)]
    lines.insert(1, '{"match_id": "x", "t_min": 1.0')
    p.write_text("\n".join(lines) + "\n")
    res = load_frames(p)
    assert len(res.frames) == 2 and res.skipped == 1
    assert "line 2" in res.problems[0]
    assert "skipped 1" in caplog.text


def test_invalid_frame_line_is_skipped(tmp_path):
    p = tmp_path / "f.jsonl"
    write_frames(p, [frame(t=9.7), frame(t=9.5)])
    res = load_frames(p)
    assert len(res.frames) == 1 and res.skipped == 1 and "cadence" in res.problems[0]


def test_unknown_fields_ignored(tmp_path):
    rec = frame().to_record()
    rec["extra"] = 1
    rec["blue"]["hero_roles"] = ["AD"] * 5
    p = tmp_path / "f.jsonl"
    p.write_text(json.dumps(rec) + "\n")
    assert len(load_frames(p).frames) == 1


def test_empty_file_gives_empty_sequence(tmp_path):
    p = tmp_path / "f.jsonl"
    p.write_text("")
    res = load_frames(p)
    assert len(res.frames) == 0 and res.skipped == 0


def test_unreadable_file_is_fatal(tmp_path):
    with pytest.raises(DataError):
        load_frames(tmp_path / "missing.jsonl")


def test_write_load_round_trip(tmp_path):
    table = random_frames(30, seed=5)
    p = tmp_path / "f.jsonl"
    write_frames(p, table)
    back = load_frames(p).frames
    assert list(back) == list(table)


def test_split_sizes_100_matches():
    train, val, test = split_by_match(_matches(100), SplitSpec(test_matches=10, val_fraction=0.1, seed=4))
    assert [len(x.match_ids()) for x in (train, val, test)] == [81, 9, 10]


def test_split_is_by_match_and_deterministic():
    table = _matches(40)
    a = split_by_match(table, SplitSpec(5, 0.2, seed=1))
    b = split_by_match(table, SplitSpec(5, 0.2, seed=1))
    c = split_by_match(table, SplitSpec(5, 0.2, seed=2))
    ids = [set(x.match_ids()) for x in a]
    assert not (ids[0] & ids[1] or ids[0] & ids[2] or ids[1] & ids[2])
    assert sum(len(x) for x in a) == len(table)
    assert [x.match_ids() for x in a] == [x.match_ids() for x in b]
    assert [len(x.match_ids()) for x in c] == [len(x.match_ids()) for x in a]
    assert [x.match_ids() for x in c] != [x.match_ids() for x in a]


def test_split_needs_three_matches():
    with pytest.raises(DataError):
        split_by_match(_matches(2), SplitSpec(1))
    with pytest.raises(ValueError):
        SplitSpec(1, val_fraction=1.0)


def test_fit_norm_stats_min_max():
    red = (6, 7, 8, 9, 10)
    frames = [frame(blue=team(gold=b), red=team(gold=r, heroes=red), t=t)
              for b, r, t in ((0, 100, 0.0), (500, 500, 10.0), (300, 0, 20.0))]
    st = fit_norm_stats(frames)
    assert st.bounds("gold_diff") == (-100.0, 300.0)
    assert st.bounds("t_min") == (0.0, 20.0)
    assert st.bounds("kill_diff") == (0.0, 0.0)
    with pytest.raises(DataError):
        fit_norm_stats(FrameTable.empty())


def test_normalize_examples():
    assert normalize(3.0, 3.0, 7.0) == 0.0
    assert normalize(7.0, 3.0, 7.0) == 1.0
    assert normalize(3.0 + 0.25 * 4.0, 3.0, 7.0) == 0.25
    assert normalize(100.0, 3.0, 7.0) == 2.0
    assert normalize(-100.0, 3.0, 7.0) == -1.0
    assert normalize(5.0, 5.0, 5.0) == 0.0


def test_norm_stats_round_trip_is_bit_exact():
    table = random_frames(200, seed=6)
    st = fit_norm_stats(table)
    back = NormStats.from_dict(json.loads(json.dumps(st.to_dict())))
    g = group_features(table)
    for name in ("gold_diff", "kill_diff", "tower_diff"):
        a = normalize_feature(getattr(g, name), st, name)
        b = normalize_feature(getattr(g, name), back, name)
        assert a.tobytes() == b.tobytes()
    assert all(hi >= lo for lo, hi in zip(st.mins, st.maxs))


def test_norm_stats_rejects_inverted_range():
    with pytest.raises(ValueError):
        NormStats((1.0,), (0.0,), ("x",))
