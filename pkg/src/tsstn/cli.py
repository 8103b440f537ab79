"""Command-line entry point: simulate, train, eval, predict, explain, export-weights."""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from collections import Counter
from pathlib import Path

from .baselines import DESK_FC_HIDDEN, FullyConnectedModel, HeuristicModel, LogisticAllModel
from .core import DEFAULT_HERO_POOL, FrameTable, group_features, validate_frame
from .evaluation import DEFAULT_GRID, evaluate, parse_grid, render_table, weight_table
from .ingest import DataError, SplitSpec, fit_norm_stats, load_frames, parse_frame_line, split_by_match, write_frames
from .model import TsstnModel, explain_text
from .persistence import ArtifactError, load, save
from .simgen import DEFAULT_SIGNAL, SimConfig, dump_hero_tables, generate, parse_signal, summarize
from .training import TrainConfig, TrainingDiverged, train

log = logging.getLogger("tsstn")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 2, 3, 4
SEED_ENV = "TSSTN_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


@contextlib.contextmanager
def _out(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8") as fh:
        yield fh


def _read_frames(args) -> FrameTable:
    if getattr(args, "frame", None):
        try:
            frame = parse_frame_line(args.frame)
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"bad frame record: {exc}") from exc
        report = validate_frame(frame)
        if report:
            raise DataError("invalid frame: " + "; ".join(report.violations))
        return FrameTable.from_frames([frame])
    if not args.data:
        raise UsageError("give --data FILE or --frame JSON")
    result = load_frames(args.data)
    if result.skipped:
        print(f"warning: skipped {result.skipped} malformed line(s) in {args.data}", file=sys.stderr)
    return result.frames


def cmd_simulate(args) -> int:
    signal = parse_signal(args.signal) if args.signal else DEFAULT_SIGNAL
    try:
        cfg = SimConfig(n_matches=args.n, seed=args.seed, mean_duration_min=args.mean_duration,
                        signal_weights=signal, noise_scale=args.noise, hero_pool=args.hero_pool,
                        synergy_scale=args.synergy_scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    frames = generate(cfg)
    n = write_frames(args.out, frames)
    if args.dump_synergy:
        dump_hero_tables(cfg, args.dump_synergy)
    if len(frames):
        s = summarize(frames)
        print(f"wrote {n} frames from {s.n_matches} matches to {args.out} "
              f"(blue wins {100 * s.blue_win_fraction:.1f}%, mean duration {s.mean_duration_min:.1f} min)",
              file=sys.stderr)
    return EXIT_OK


def _make_model(kind: str, stats, hero_pool: int, seed: int, fc_hidden):
    if kind == "tsstn":
        return TsstnModel(stats, hero_pool, seed)
    if kind == "lr":
        return LogisticAllModel(stats, hero_pool, seed)
    if kind == "fc":
        return FullyConnectedModel(stats, hero_pool, seed, hidden=fc_hidden)
    return HeuristicModel(stats, hero_pool, seed)


def cmd_train(args) -> int:
    frames = _read_frames(args)
    n_matches = len(frames.match_ids())
    test = args.test_matches if args.test_matches is not None else max(1, n_matches // 10)
    train_f, val_f, test_f = split_by_match(frames, SplitSpec(test, args.val_fraction, args.seed))
    stats = fit_norm_stats(train_f)
    hidden = tuple(int(v) for v in args.fc_hidden.split(",")) if args.fc_hidden else DESK_FC_HIDDEN
    model = _make_model(args.model, stats, args.hero_pool, args.seed, hidden)
    try:
        cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
                          seed=args.seed, patience=args.patience)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = train(model, train_f, val_f, cfg)
    save(model, args.out)
    if args.test_out:
        write_frames(args.test_out, test_f)
    rec = report.to_dict()
    rec["split"] = {"train": len(train_f.match_ids()), "val": len(val_f.match_ids()), "test": len(test_f.match_ids())}
    with _out(args.report) as fh:
        json.dump(rec, fh, indent=2)
        fh.write("\n")
    print(f"saved {args.model} model to {args.out}", file=sys.stderr)
    return EXIT_OK


def _model_names(paths: list[str], models) -> list[str]:
    kinds = Counter(m.kind for m in models)
    return [m.kind if kinds[m.kind] == 1 else Path(p).stem for p, m in zip(paths, models)]


def cmd_eval(args) -> int:
    models = [load(p) for p in args.models]
    frames = _read_frames(args)
    if len(frames) == 0:
        raise DataError(f"no frames to evaluate in {args.data}")
    grid = parse_grid(args.grid) if args.grid else DEFAULT_GRID
    report = evaluate(dict(zip(_model_names(args.models, models), models)), frames, grid, seed=args.seed)
    with _out(args.out) as fh:
        fh.write(report.to_table())
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for row in report.rows():
                fh.write(json.dumps(dict(zip(report.header(), row))) + "\n")
    if args.figures:
        from .plotting import render_report_figures

        for p in render_report_figures(report, args.figures):
            print(f"figure: {p}", file=sys.stderr)
    print(report.summary(), file=sys.stderr)
    return EXIT_OK


def _write_predictions(args, with_comment: bool) -> int:
    model = load(args.model)
    frames = _read_frames(args)
    if len(frames) == 0:
        raise DataError("no frames to predict")
    g = group_features(frames)
    with _out(args.out) as fh:
        if isinstance(model, TsstnModel):
            for e in model.explain(g, frames.match_id):
                comment = explain_text(e, args.top_k) if with_comment else None
                fh.write(json.dumps(e.to_record(comment)) + "\n")
        elif with_comment:
            raise ArtifactError(f"explain needs a tsstn model, got {model.kind}")
        else:
            F = model.score(g)
            won = model.predict_binary(g)
            for mid, t, f, b in zip(frames.match_id, frames.t_min, F, won):
                fh.write(json.dumps({"match_id": mid, "t_min": float(t), "p_blue": (float(f) + 1.0) / 2.0,
                                     "F": float(f), "winner": "blue" if b else "red"}) + "\n")
    return EXIT_OK


def cmd_predict(args) -> int:
    return _write_predictions(args, with_comment=False)


def cmd_explain(args) -> int:
    return _write_predictions(args, with_comment=True)


def cmd_export_weights(args) -> int:
    model = load(args.model)
    if not isinstance(model, TsstnModel):
        raise ArtifactError(f"export-weights needs a tsstn model, got {model.kind}")
    frames = _read_frames(args) if args.data else None
    head, rows = weight_table(model, frames, seed=args.seed)
    with _out(args.out) as fh:
        fh.write(render_table(head, rows))
    if args.figures:
        from .plotting import plot_spatial_curves

        os.makedirs(args.figures, exist_ok=True)
        spatial = {}
        if frames is not None and len(frames):
            k0 = head.index("frames") + 1
            spatial = {name[4:]: [r[k0 + i] for r in rows] for i, name in enumerate(head[k0:])}
        path = plot_spatial_curves(spatial, model.temporal.table(), os.path.join(args.figures, "spatial_weights.png"))
        print(f"figure: {path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsstn", description="Interpretable real-time MOBA win prediction.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    s = sub.add_parser("simulate", help="generate synthetic matches")
    s.add_argument("--n", type=int, default=1000, help="number of matches")
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--out", required=True)
    s.add_argument("--signal", help="e.g. gold=0.4,kill=0.1,... (must sum to 1)")
    s.add_argument("--noise", type=float, default=SimConfig.noise_scale)
    s.add_argument("--mean-duration", type=float, default=SimConfig.mean_duration_min)
    s.add_argument("--hero-pool", type=int, default=DEFAULT_HERO_POOL)
    s.add_argument("--synergy-scale", type=float, default=SimConfig.synergy_scale)
    s.add_argument("--dump-synergy", help="write the hidden hero tables as JSON")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("train", help="train a model and write an artifact")
    t.add_argument("--model", choices=("tsstn", "lr", "fc", "heuristic"), default="tsstn")
    t.add_argument("--data", required=True)
    t.add_argument("--seed", type=int, default=seed)
    t.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    t.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    t.add_argument("--lr", type=float, default=TrainConfig.lr)
    t.add_argument("--patience", type=int, default=TrainConfig.patience)
    t.add_argument("--test-matches", type=int, help="held-out matches (default: 10%%)")
    t.add_argument("--val-fraction", type=float, default=0.1)
    t.add_argument("--hero-pool", type=int, default=DEFAULT_HERO_POOL)
    t.add_argument("--fc-hidden", help="comma-separated hidden sizes for --model fc")
    t.add_argument("--out", required=True)
    t.add_argument("--report", help="train report JSON path (default stdout)")
    t.add_argument("--test-out", help="write the held-out test frames here")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="accuracy by game time")
    e.add_argument("--models", nargs="+", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--grid", help="comma-separated minutes (default 0,2.5,...,20)")
    e.add_argument("--seed", type=int, default=seed)
    e.add_argument("--out", help="delimited table path (default stdout)")
    e.add_argument("--records", help="also write one JSON record per grid point")
    e.add_argument("--figures", help="directory for rendered figures")
    e.set_defaults(func=cmd_eval)

    for name, func, help_ in (("predict", cmd_predict, "win probabilities"),
                              ("explain", cmd_explain, "win probabilities with group attributions and comments")):
        q = sub.add_parser(name, help=help_)
        q.add_argument("--model", required=True)
        src = q.add_mutually_exclusive_group(required=True)
        src.add_argument("--data")
        src.add_argument("--frame", help="a single frame record as JSON")
        q.add_argument("--top-k", type=int, default=2)
        q.add_argument("--out")
        q.set_defaults(func=func)

    w = sub.add_parser("export-weights", help="importance-weight and spatial-accuracy curves")
    w.add_argument("--model", required=True)
    w.add_argument("--data", help="frames for spatial-model accuracy columns")
    w.add_argument("--seed", type=int, default=seed)
    w.add_argument("--out")
    w.add_argument("--figures", help="directory for the rendered figure")
    w.set_defaults(func=cmd_export_weights)
    return p


def main(argv=None) -> int:
    try:
        parser = build_parser()
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already printed usage (or help)
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArtifactError, TrainingDiverged) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream closed the pipe (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
