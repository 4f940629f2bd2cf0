"""Command-line entry points.

Exit codes: 0 success, 1 usage, 2 data/format error, 3 training error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
import threading

from .corpus import read_profiles_json
from .activity import record_timeline, ActivityEvent, write_timeline_csv
from .errors import DataError, TrainingError
from .features import feature_matrix
from .forest import LabeledSet, cross_validate
from .ingest import live_frames, replay as replay_frames, synth_stream, segment_frame_counts, write_csv
from .registry import TrainerConfig, load_snapshot, save_snapshot
from .service import SessionEngine, serve as serve_protocol
from .training import registry_from_csv


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that for data errors
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="harstream", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic stream CSV")
    p.add_argument("--profiles", required=True, help="JSON array of pattern profiles")
    p.add_argument("--seconds", type=float, required=True, help="duration per profile segment")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a snapshot from a labeled corpus CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="evaluate a snapshot against a labeled corpus CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--snapshot", required=True)
    p.add_argument("--folds", type=int, default=4)

    p = sub.add_parser("replay", help="run the pipeline over a recorded CSV, printing events")
    p.add_argument("--file", required=True)
    p.add_argument("--realtime", action="store_true")
    p.add_argument("--snapshot", required=True)

    p = sub.add_parser("serve", help="serve the live protocol for a session")
    p.add_argument("--listen", required=True, help="host:port to bind")
    p.add_argument("--snapshot", required=True)
    p.add_argument(
        "--source",
        required=True,
        help="replay:FILE | replay-realtime:FILE | synth:PROFILES:SECONDS:SEED | live:HOST:PORT",
    )

    p = sub.add_parser("timeline", help="fold an event log into a minute-resolution CSV")
    p.add_argument("--events", required=True, help="captured NDJSON protocol messages")
    p.add_argument("--out", required=True)
    p.add_argument("--date", default=None, help="ISO date stamped on the rows")
    return parser


def _cmd_synth(args) -> int:
    profiles = read_profiles_json(args.profiles)
    segments = [(p, args.seconds) for p in profiles]
    frames = synth_stream(segments, seed=args.seed)
    labels: list[str] = []
    for profile, count in zip(profiles, segment_frame_counts(segments)):
        labels.extend([profile.name] * count)
    n = write_csv(args.out, frames, pattern_labels=labels)
    print(f"wrote {n} frames over {len(profiles)} patterns to {args.out}")
    return 0


def _cmd_train(args) -> int:
    registry = registry_from_csv(args.data)
    configs = TrainerConfig.with_seed(args.seed)
    snapshot = registry.retrain(configs)
    save_snapshot(snapshot, args.out)
    print(
        f"trained snapshot v{snapshot.version}: {len(snapshot.pattern_names)} patterns"
        f" ({', '.join(snapshot.pattern_names)})"
    )
    if snapshot.activity_forest is not None:
        print(f"activity forest over: {', '.join(snapshot.activity_forest.label_names)}")
    if args.folds:
        data = _labeled_set_from_registry(registry)
        accs, mean = cross_validate(data, folds=args.folds, cfg=configs.unit_forest)
        for i, acc in enumerate(accs):
            print(f"fold {i}: accuracy {acc:.4f}")
        print(f"mean unit-pattern accuracy: {mean:.4f}")
    print(f"snapshot written to {args.out}")
    return 0


def _labeled_set_from_registry(registry) -> LabeledSet:
    names = registry.pattern_names
    fvs = []
    labels = []
    for name in names:
        samples = registry.samples(name)
        fvs.extend(samples)
        labels.extend([name] * len(samples))
    return LabeledSet.from_labels(feature_matrix(fvs), labels, label_names=names)


def _cmd_eval(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    registry = registry_from_csv(args.data, window_cfg=snapshot.window)
    data = _labeled_set_from_registry(registry)
    correct = 0
    for row, y in zip(data.X, data.y):
        label, _ = snapshot.unit_forest.predict(row)
        if label == data.label_names[y]:
            correct += 1
    print(f"snapshot accuracy on {len(data.y)} windows: {correct / len(data.y):.4f}")
    accs, mean = cross_validate(data, folds=args.folds, cfg=snapshot.unit_forest.config)
    for i, acc in enumerate(accs):
        print(f"fold {i}: accuracy {acc:.4f}")
    print(f"mean {args.folds}-fold accuracy: {mean:.4f}")
    return 0


def _run_engine_to_stdout(engine: SessionEngine) -> None:
    sub = engine.subscribe()
    thread = threading.Thread(target=engine.run, daemon=True)
    thread.start()
    for msg in sub.messages():
        print(json.dumps(msg), flush=True)
    thread.join()


def _cmd_replay(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    frames = replay_frames(args.file, rate_hz=snapshot.window.rate_hz, realtime=args.realtime)
    engine = SessionEngine(snapshot, frames)
    _run_engine_to_stdout(engine)
    return 0


def _parse_source(spec: str, snapshot):
    kind, _, rest = spec.partition(":")
    if kind in ("replay", "replay-realtime"):
        if not rest:
            raise _UsageError("replay source needs a file path")
        return replay_frames(rest, rate_hz=snapshot.window.rate_hz, realtime=kind == "replay-realtime")
    if kind == "synth":
        try:
            profiles_path, seconds, seed = rest.rsplit(":", 2)
            profiles = read_profiles_json(profiles_path)
            return synth_stream([(p, float(seconds)) for p in profiles], seed=int(seed))
        except ValueError as exc:
            raise _UsageError(f"bad synth source spec: {exc}") from None
    if kind == "live":
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise _UsageError("live source needs host:port")
        return live_frames(host, int(port))
    raise _UsageError(f"unknown source kind {kind!r}")


def _cmd_serve(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    frames = _parse_source(args.source, snapshot)
    engine = SessionEngine(snapshot, frames)
    server = serve_protocol(args.listen, engine)
    print(f"serving on {args.listen}; session {engine.id}", flush=True)
    try:
        engine.run()
    finally:
        server.shutdown()
    return 0


def _cmd_timeline(args) -> int:
    events = []
    with open(args.events, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: {exc}") from exc
            if msg.get("kind") == "activity_event":
                events.append(
                    ActivityEvent(
                        t0_ms=int(msg["t0_ms"]),
                        t1_ms=int(msg["t1_ms"]),
                        label=str(msg["label"]),
                        confidence=float(msg["conf"]),
                    )
                )
    entries = record_timeline(events)
    date = args.date or datetime.date.today().isoformat()
    write_timeline_csv(args.out, entries, date)
    print(f"wrote {len(entries)} timeline minutes to {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "replay": _cmd_replay,
    "serve": _cmd_serve,
    "timeline": _cmd_timeline,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
