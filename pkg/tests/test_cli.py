import json
import subprocess
import sys

import pytest

import fixtures
from tsstn.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["simulate", "--n", "60", "--seed", "2", "--out", str(d / "frames.jsonl")]) == 0
    return d


def _train(d, name, *extra):
    argv = ["train", "--model", "tsstn", "--data", str(d / "frames.jsonl"), "--seed", "7", "--epochs", "1",
            "--out", str(d / name), "--report", str(d / (name + ".json")), *extra]
    return main(argv)


def test_train_twice_gives_identical_artifacts(workdir):
    assert _train(workdir, "a.tsstn") == 0
    assert _train(workdir, "b.tsstn", "--test-out", str(workdir / "test.jsonl")) == 0
    assert (workdir / "a.tsstn").read_bytes() == (workdir / "b.tsstn").read_bytes()
    rep = json.loads((workdir / "a.tsstn.json").read_text())
    assert rep["model"] == "tsstn" and rep["split"]["test"] == 6 and len(rep["epochs"]) == 1


def test_eval_outputs_table_records_and_figures(workdir, capsys):
    main(["train", "--model", "heuristic", "--data", str(workdir / "frames.jsonl"), "--out", str(workdir / "h.tsstn")])
    capsys.readouterr()
    code = main(["eval", "--models", str(workdir / "a.tsstn"), str(workdir / "h.tsstn"),
                 "--data", str(workdir / "test.jsonl"), "--records", str(workdir / "rec.jsonl"),
                 "--figures", str(workdir / "figs")])
    out, err = capsys.readouterr()
    assert code == 0
    assert out.splitlines()[0] == "t_min\tframes\tacc_tsstn\tacc_heuristic"
    assert "tsstn:" in err and "heuristic:" in err
    recs = [json.loads(x) for x in (workdir / "rec.jsonl").read_text().splitlines()]
    assert [r["t_min"] for r in recs] == [2.5 * k for k in range(9)]
    assert (workdir / "figs" / "accuracy_by_time.png").stat().st_size > 0
    assert (workdir / "figs" / "spatial_weights.png").stat().st_size > 0


def test_explain_fixture_mentions_quoted_probability(capsys):
    assert main(["explain", "--model", fixtures.ARTIFACT, "--data", fixtures.FRAMES]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert "77.5" in rec["comment"]
    assert [gr["name"] for gr in rec["groups"]][0] == "Gold"
    assert rec["match_id"] == "fixture" and rec["t_min"] == 15.0


def test_explain_single_frame_line(capsys):
    with open(fixtures.FRAMES) as fh:
        line = fh.readline().strip()
    assert main(["explain", "--model", fixtures.ARTIFACT, "--frame", line, "--top-k", "3"]) == 0
    comment = json.loads(capsys.readouterr().out)["comment"]
    assert "Gold" in comment and "Soldier" in comment and "WildResource" in comment


def test_predict_and_export_weights(workdir, capsys):
    assert main(["predict", "--model", str(workdir / "a.tsstn"), "--data", str(workdir / "test.jsonl")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == sum(1 for _ in open(workdir / "test.jsonl"))
    assert 0 < json.loads(lines[0])["p_blue"] < 1
    assert main(["export-weights", "--model", str(workdir / "a.tsstn"), "--data", str(workdir / "test.jsonl"),
                 "--figures", str(workdir / "wfig")]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0].startswith("bin\tt_center\tw_Gold") and len(rows) == 42
    assert (workdir / "wfig" / "spatial_weights.png").exists()


def test_eval_empty_file_exits_with_data_error(workdir, tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["eval", "--models", str(workdir / "a.tsstn"), "--data", str(empty)]) == 3
    assert "no frames" in capsys.readouterr().err


def test_typed_errors_map_to_exit_codes(workdir, tmp_path, capsys):
    assert main(["explain", "--model", str(tmp_path / "missing"), "--data", fixtures.FRAMES]) == 4
    bad = tmp_path / "bad.tsstn"
    blob = bytearray((workdir / "a.tsstn").read_bytes())
    blob[100] ^= 0xFF
    bad.write_bytes(bytes(blob))
    assert main(["predict", "--model", str(bad), "--data", fixtures.FRAMES]) == 4
    assert "checksum" in capsys.readouterr().err
    assert main(["explain", "--model", fixtures.ARTIFACT, "--frame", "{not json"]) == 3
    assert main(["explain", "--model", fixtures.ARTIFACT]) == 2
    assert main(["simulate", "--n", "3", "--out", str(tmp_path / "x"), "--signal", "gold=2"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["train", "--epochs", "many"]) == 2


def test_too_few_matches_to_split(tmp_path):
    main(["simulate", "--n", "2", "--seed", "1", "--out", str(tmp_path / "two.jsonl")])
    assert main(["train", "--data", str(tmp_path / "two.jsonl"), "--out", str(tmp_path / "m")]) == 3


def test_seed_comes_from_environment(tmp_path):
    env_run = [sys.executable, "-m", "tsstn", "simulate", "--n", "3", "--out"]
    a = subprocess.run(env_run + [str(tmp_path / "a")], env={"TSSTN_SEED": "9", "PATH": ""}, capture_output=True)
    assert a.returncode == 0, a.stderr
    main(["simulate", "--n", "3", "--seed", "9", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    bad = subprocess.run(env_run + [str(tmp_path / "c")], env={"TSSTN_SEED": "nine"}, capture_output=True, text=True)
    assert bad.returncode == 2 and "TSSTN_SEED" in bad.stderr and "Traceback" not in bad.stderr
