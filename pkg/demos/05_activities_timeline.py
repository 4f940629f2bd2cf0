#!/usr/bin/env python3
"""From unit-pattern sequences to activities and a minute-resolution timeline.

Every 120 smoothed unit-pattern labels become a bag-of-words histogram --
order inside the block does not matter -- and a second forest names the
activity. Activity events then fold into one entry per minute of the day.
"""

import tempfile
from pathlib import Path

import numpy as np

from harstream.activity import bow, classify_activity, record_timeline, write_timeline_csv
from harstream.corpus import ACTIVITY_MIX, UNIT_PATTERNS
from harstream.forest import ForestConfig, LabeledSet, fit_forest

rng = np.random.default_rng(3)
vocab = list(UNIT_PATTERNS)
index = {n: i for i, n in enumerate(vocab)}

print("activities and their pattern mixes:")
for activity, mix in ACTIVITY_MIX.items():
    parts = ", ".join(f"{name} {share:.0%}" for name, share in mix)
    print(f"  {activity}: {parts}")

# Train the activity forest on jittered histogram samples per activity.
X, labels = [], []
for activity, mix in ACTIVITY_MIX.items():
    for _ in range(20):
        shares = np.array([w for _, w in mix]) * rng.uniform(0.8, 1.2, len(mix))
        shares /= shares.sum()
        counts = np.zeros(len(vocab))
        for (name, _), share in zip(mix, shares):
            counts[index[name]] += round(float(share) * 120)
        counts[index[mix[0][0]]] += 120 - counts.sum()
        X.append(counts)
        labels.append(activity)
forest = fit_forest(LabeledSet.from_labels(np.stack(X), labels), ForestConfig(seed=2))
print(f"\nactivity forest trained on {len(labels)} histograms")

# A basketball-flavored minute: running-heavy with shooting and dribbling.
sequence = (
    ["running"] * 55 + ["walking"] * 25 + ["shooting"] * 22 + ["dribbling"] * 18
)
rng.shuffle(sequence)  # order is irrelevant to the histogram
h = bow(sequence, vocab, window_start_t_ms=0, window_end_t_ms=61_500)
event = classify_activity(h, forest)
print(f"shuffled 120-label block -> {event.label} (confidence {event.confidence:.2f})")

# Stack a few blocks into a timeline.
blocks = [
    ("PLAY_BASKETBALL", ["running"] * 60 + ["shooting"] * 40 + ["dribbling"] * 20),
    ("GUITAR_PRACTICE", ["guitar_sitting"] * 80 + ["idle_sitting"] * 40),
    ("GUITAR_PRACTICE", ["guitar_sitting"] * 70 + ["idle_sitting"] * 50),
]
events = []
for i, (_, seq) in enumerate(blocks):
    h = bow(seq, vocab, window_start_t_ms=i * 61_500, window_end_t_ms=(i + 1) * 61_500)
    events.append(classify_activity(h, forest))

entries = record_timeline(events)
print("\nminute-resolution timeline:")
for e in entries:
    print(f"  minute {e.minute}: {e.activity} ({e.confidence:.2f})")

out = Path(tempfile.mkdtemp()) / "timeline.csv"
write_timeline_csv(out, entries, date="2026-08-09")
print(f"\nexported to {out}")
