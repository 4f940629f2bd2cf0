#!/usr/bin/env python3
"""A live session end to end: train, serve the wire protocol, watch events.

The engine runs one pipeline thread per session and publishes
newline-delimited JSON messages; operator commands travel back on the same
connection. This is exactly what the console frontend consumes.
"""

import json
import socket
import tempfile
import threading
from pathlib import Path

from harstream.corpus import activity_script, labeled_frames
from harstream.ingest import replay, write_csv
from harstream.registry import TrainerConfig
from harstream.service import SessionEngine, serve
from harstream.training import registry_from_csv

tmp = Path(tempfile.mkdtemp())

# 1. Synthesize a labeled training corpus: two blocks per activity.
plan = [("PLAY_BASKETBALL", 2), ("GUITAR_PRACTICE", 2), ("LIVE_CONCERT", 2)]
frames, patterns, activities = labeled_frames(activity_script(plan, seed=1), seed=1)
corpus = tmp / "corpus.csv"
write_csv(corpus, frames, pattern_labels=patterns, activity_labels=activities)
print(f"synthesized {len(frames)} labeled frames -> {corpus}")

# 2. Train the snapshot (mixture + both forests + calibrated thresholds).
registry = registry_from_csv(corpus)
snapshot = registry.retrain(TrainerConfig.with_seed(0))
print(f"snapshot: {len(snapshot.pattern_names)} patterns, "
      f"activities {snapshot.activity_forest.label_names}")

# 3. Serve a replay session and connect as a protocol client.
stream_csv = tmp / "stream.csv"
f2, p2, a2 = labeled_frames(activity_script([("PLAY_BASKETBALL", 1)], seed=2), seed=2)
write_csv(stream_csv, f2)

engine = SessionEngine(snapshot, replay(stream_csv))
server = serve("127.0.0.1:0", engine)
port = server.server_address[1]
print(f"\nprotocol server on 127.0.0.1:{port}")

pipeline = threading.Thread(target=engine.run, daemon=True)
pipeline.start()

shown = {"frame": 0, "unit_event": 0}
with socket.create_connection(("127.0.0.1", port), timeout=10) as conn:
    fh = conn.makefile("rw", encoding="utf-8")
    # send a command mid-stream and watch for its ack
    fh.write(json.dumps({"kind": "command", "cid": "demo-1", "op": "pause"}) + "\n")
    fh.write(json.dumps({"kind": "command", "cid": "demo-2", "op": "resume"}) + "\n")
    fh.flush()
    for line in fh:
        msg = json.loads(line)
        kind = msg["kind"]
        if kind in shown and shown[kind] < 3:
            shown[kind] += 1
            print(f"  {line.strip()[:110]}")
        elif kind in ("command_ack", "activity_event", "registry_update"):
            print(f"  {line.strip()[:110]}")
        if kind == "activity_event":
            break

server.shutdown()
server.server_close()
print("\nthe console frontend (frontend/) renders this same feed interactively")
