"""Session orchestration and the newline-delimited JSON wire protocol.

One pipeline thread per session walks frames through the recognizer and
activity layers, publishing protocol messages to every subscriber through
bounded queues; operator commands arrive through a single-writer queue and
are applied between windows, so the state machines only ever see one
caller. A slow subscriber is disconnected (with a final overflow error)
rather than allowed to stall the pipeline.

Each subscriber sees a strictly increasing, gap-free seq; subscribers that
attach at the same point in the stream receive identical messages.
"""

from __future__ import annotations

import itertools
import json
import queue
import socketserver
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator

from .activity import bow, classify_activity
from .errors import DataError, HarstreamError
from .features import extract_features, windows
from .ingest import ImuFrame
from .novelty import EventKind, Mode, NoveltyState, cancel_collection, resolve_candidate
from .recognizer import VoteBuffer, classify_window
from .registry import ModelSnapshot, PatternRegistry, TrainerConfig

SUBSCRIBER_QUEUE_LIMIT = 1024
FRAME_WIRE_INTERVAL_MS = 200  # at most 5 frame messages per second

_session_ids = itertools.count(1)


class Subscriber:
    """One outbound message stream with its own seq counter and bounded queue."""

    def __init__(self, limit: int = SUBSCRIBER_QUEUE_LIMIT):
        self.queue: queue.Queue = queue.Queue(maxsize=limit)
        self._seq = 0
        self.alive = True

    def push(self, payload: dict) -> None:
        if not self.alive:
            return
        self._seq += 1
        msg = {"kind": payload["kind"], "seq": self._seq}
        msg.update({k: v for k, v in payload.items() if k != "kind"})
        try:
            self.queue.put_nowait(msg)
        except queue.Full:
            self.alive = False
            self._drain_and_close()

    def _drain_and_close(self) -> None:
        try:
            while True:
                self.queue.get_nowait()
        except queue.Empty:
            pass
        self._seq += 1
        self.queue.put_nowait({"kind": "error", "seq": self._seq, "message": "overflow"})
        self.queue.put_nowait(None)

    def close(self) -> None:
        if self.alive:
            self.alive = False
            try:
                self.queue.put_nowait(None)
            except queue.Full:
                pass

    def messages(self) -> Iterator[dict]:
        """Drain messages until the stream closes."""
        while True:
            msg = self.queue.get()
            if msg is None:
                return
            yield msg


@dataclass
class _PendingCandidate:
    candidate_id: str


class SessionEngine:
    """Runs the recognition loop for one source against one snapshot."""

    def __init__(
        self,
        snapshot: ModelSnapshot,
        frames: Iterable[ImuFrame],
        registry: PatternRegistry | None = None,
        trainer: TrainerConfig | None = None,
        seq_len: int = 120,
    ):
        if snapshot is None:
            raise DataError("a session needs a loaded snapshot")
        self.id = f"session-{next(_session_ids)}"
        self.snapshot = snapshot
        self.frames = frames
        self.registry = registry
        self.trainer = trainer or TrainerConfig()
        self.seq_len = seq_len
        self.novelty_state = NoveltyState()
        self.run_state = "running"
        self._subscribers: list[Subscriber] = []
        self._lock = threading.Lock()
        self._commands: queue.Queue = queue.Queue()
        self._candidate_seq = itertools.count(1)
        self._pending: _PendingCandidate | None = None
        self._vote_buffer = VoteBuffer(snapshot.vote)
        self._block: list[str] = []
        self._block_t0 = 0
        self._last_frame_wire_t = None
        self._collected_names: tuple[str, str] | None = None

    # -- subscriptions ----------------------------------------------------

    def subscribe(self, limit: int = SUBSCRIBER_QUEUE_LIMIT) -> Subscriber:
        sub = Subscriber(limit=limit)
        with self._lock:
            sub.push(self._registry_update_payload())
            sub.push(
                {
                    "kind": "session_state",
                    "session": self.id,
                    "run_state": self.run_state,
                    "novelty_mode": self.novelty_state.mode.value,
                }
            )
            if self.run_state == "stopped":
                sub.close()  # late joiner on a finished session: preamble then EOF
            else:
                self._subscribers.append(sub)
        return sub

    def _publish(self, payload: dict) -> None:
        with self._lock:
            dead = []
            for sub in self._subscribers:
                sub.push(payload)
                if not sub.alive:
                    dead.append(sub)
            for sub in dead:
                self._subscribers.remove(sub)

    def _registry_update_payload(self) -> dict:
        if self.registry is not None:
            patterns = self.registry.pattern_names
            activities = self.registry.activity_names
            version = self.registry.version
        else:
            patterns = self.snapshot.pattern_names
            activities = self.snapshot.activity_names
            version = self.snapshot.version
        return {
            "kind": "registry_update",
            "version": version,
            "patterns": patterns,
            "activities": activities,
        }

    # -- commands ----------------------------------------------------------

    def submit(self, command: dict) -> None:
        """Queue an operator command; the pipeline thread acks it in order."""
        self._commands.put(command)

    def _ack(self, cid, extra: dict | None = None) -> None:
        msg = {"kind": "command_ack", "cid": cid, "ok": True}
        if extra:
            msg.update(extra)
        self._publish(msg)

    def _nack(self, cid, message: str) -> None:
        self._publish({"kind": "error", "cid": cid, "message": message})

    def _apply_command(self, command: dict) -> None:
        cid = command.get("cid")
        op = command.get("op")
        try:
            if op == "pause":
                self.run_state = "paused"
            elif op == "resume":
                self.run_state = "running"
            elif op == "stop":
                self.run_state = "stopped"
            elif op == "save_pattern":
                self.novelty_state = resolve_candidate(
                    self.novelty_state,
                    "save",
                    name=command.get("name"),
                    activity=command.get("activity"),
                )
                self._collected_names = (command["name"], command["activity"])
                self._pending = None
            elif op == "ignore_pattern":
                self.novelty_state = resolve_candidate(self.novelty_state, "ignore")
                self._pending = None
            elif op == "not_of_interest":
                self.novelty_state = resolve_candidate(self.novelty_state, "not_of_interest")
                self._pending = None
            elif op == "cancel_collection":
                self.novelty_state, _ = cancel_collection(self.novelty_state)
                self._collected_names = None
            elif op == "retrain":
                self._retrain(cid)
                return
            else:
                raise ValueError(f"unknown command {op!r}")
        except HarstreamError as exc:
            self._nack(cid, str(exc))
            return
        except ValueError as exc:
            self._nack(cid, str(exc))
            return
        self._ack(cid)

    def _retrain(self, cid) -> None:
        if self.registry is None:
            self._nack(cid, "session has no registry to retrain from")
            return
        try:
            new_snapshot = self.registry.retrain(self.trainer, previous=self.snapshot)
        except HarstreamError as exc:
            self._nack(cid, str(exc))
            return
        # Atomic swap between windows; the vote buffer restarts because the
        # label set may have changed.
        self.snapshot = new_snapshot
        self._vote_buffer = VoteBuffer(new_snapshot.vote)
        self._ack(cid)
        self._publish(self._registry_update_payload())

    def _drain_commands(self, block: bool = False) -> None:
        while True:
            try:
                command = self._commands.get(timeout=0.05) if block else self._commands.get_nowait()
            except queue.Empty:
                return
            self._apply_command(command)
            if block and self.run_state == "running":
                return

    # -- pipeline ----------------------------------------------------------

    def run(self) -> None:
        """Consume the frame source to exhaustion (or until stopped)."""
        try:
            for window in windows(self._frame_feed(), self.snapshot.window):
                if self.run_state == "stopped":
                    break
                fv = extract_features(window)
                event, self.novelty_state, nov_event = classify_window(
                    fv,
                    self.snapshot.unit_forest,
                    self.snapshot.gmm,
                    self.novelty_state,
                    self.snapshot.novelty,
                    self._vote_buffer,
                )
                self._publish(
                    {
                        "kind": "unit_event",
                        "t_ms": event.t_ms,
                        "raw": event.raw_label,
                        "voted": event.voted_label,
                        "conf": event.confidence,
                    }
                )
                if nov_event is not None:
                    self._handle_novelty_event(nov_event)
                if self._pending is not None and self.novelty_state.mode not in (
                    Mode.CANDIDATE_PENDING,
                    Mode.COLLECTING,
                ):
                    # The candidate evaporated before the user answered.
                    self._pending = None
                self._feed_activity_block(event)
        finally:
            self.run_state = "stopped"
            with self._lock:
                for sub in self._subscribers:
                    sub.close()
                self._subscribers.clear()

    def _frame_feed(self) -> Iterator[ImuFrame]:
        for frame in self.frames:
            self._drain_commands()
            while self.run_state == "paused":
                self._drain_commands(block=True)
            if self.run_state == "stopped":
                return
            self._maybe_publish_frame(frame)
            yield frame

    def _maybe_publish_frame(self, frame: ImuFrame) -> None:
        if (
            self._last_frame_wire_t is not None
            and frame.t_ms - self._last_frame_wire_t < FRAME_WIRE_INTERVAL_MS
        ):
            return
        self._last_frame_wire_t = frame.t_ms
        self._publish(
            {
                "kind": "frame",
                "t": frame.t_ms,
                "acc": list(frame.acc),
                "gyro": list(frame.gyro),
                "orient": list(frame.orient),
            }
        )

    def _handle_novelty_event(self, nov_event) -> None:
        if nov_event.kind is EventKind.NOVELTY_DETECTED:
            if self._pending is None:
                self._pending = _PendingCandidate(f"cand-{next(self._candidate_seq)}")
                self._publish(
                    {"kind": "novelty_prompt", "candidate_id": self._pending.candidate_id}
                )
        elif nov_event.kind is EventKind.COLLECTION_PROGRESS:
            self._publish(
                {"kind": "progress", "collected": nov_event.collected, "target": nov_event.target}
            )
        elif nov_event.kind is EventKind.COLLECTION_COMPLETE:
            self._publish(
                {"kind": "progress", "collected": nov_event.collected, "target": nov_event.target}
            )
            self._store_collection(nov_event)
        # cancellation needs no message beyond its ack

    def _store_collection(self, nov_event) -> None:
        if self.registry is None or self._collected_names is None:
            return
        name, activity = self._collected_names
        self._collected_names = None
        try:
            self.registry.add_pattern(
                name,
                activity,
                list(nov_event.buffered),
                collect_target=self.snapshot.novelty.collect_target,
            )
        except HarstreamError as exc:
            self._publish({"kind": "error", "message": str(exc)})
            return
        self._publish(self._registry_update_payload())

    def _feed_activity_block(self, event) -> None:
        if self.snapshot.activity_forest is None:
            return
        if not self._block:
            self._block_t0 = event.t_ms
        self._block.append(event.voted_label if event.voted_label is not None else event.raw_label)
        if len(self._block) < self.seq_len:
            return
        h = bow(
            self._block,
            self.snapshot.unit_forest.label_names,
            window_start_t_ms=self._block_t0,
            window_end_t_ms=event.t_ms + self.snapshot.window.window_ms,
        )
        self._block = []
        try:
            act = classify_activity(h, self.snapshot.activity_forest)
        except ValueError as exc:
            self._publish({"kind": "error", "message": str(exc)})
            return
        self._publish(
            {
                "kind": "activity_event",
                "t0_ms": act.t0_ms,
                "t1_ms": act.t1_ms,
                "label": act.label,
                "conf": act.confidence,
            }
        )


def start_session(
    snapshot: ModelSnapshot,
    frames: Iterable[ImuFrame],
    registry: PatternRegistry | None = None,
    trainer: TrainerConfig | None = None,
) -> tuple[SessionEngine, threading.Thread]:
    """Start the pipeline on its own thread; returns (engine, thread)."""
    engine = SessionEngine(snapshot, frames, registry=registry, trainer=trainer)
    thread = threading.Thread(target=engine.run, name=engine.id, daemon=True)
    thread.start()
    return engine, thread


# ---------------------------------------------------------------------------
# socket layer


class _ClientHandler(socketserver.StreamRequestHandler):
    def handle(self):
        engine: SessionEngine = self.server.engine  # type: ignore[attr-defined]
        sub = engine.subscribe()

        def pump():
            try:
                for msg in sub.messages():
                    line = json.dumps(msg) + "\n"
                    self.wfile.write(line.encode("utf-8"))
                    self.wfile.flush()
            except OSError:
                sub.close()

        writer = threading.Thread(target=pump, daemon=True)
        writer.start()
        try:
            for raw in self.rfile:
                line = raw.decode("utf-8").strip()
                if not line:
                    continue
                try:
                    command = json.loads(line)
                except json.JSONDecodeError:
                    continue
                if isinstance(command, dict) and command.get("kind") == "command":
                    engine.submit(command)
        except OSError:
            pass
        finally:
            sub.close()


class ProtocolServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr: tuple[str, int], engine: SessionEngine):
        super().__init__(addr, _ClientHandler)
        self.engine = engine


def serve(listen: str, engine: SessionEngine) -> ProtocolServer:
    """Bind the protocol server on host:port and serve on a background thread."""
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"listen address must be host:port, got {listen!r}")
    server = ProtocolServer((host, int(port)), engine)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
