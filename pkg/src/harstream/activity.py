"""Activity layer: bag-of-words histograms over unit-pattern sequences.

Fixed-length label sequences are reduced to per-pattern occurrence counts
(order does not matter), classified by a forest, and folded into a
minute-resolution timeline.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .forest import RandomForest
from .recognizer import UnitPatternEvent

SEQ_LEN = 120
MS_PER_MINUTE = 60_000


@dataclass(frozen=True)
class BowHistogram:
    """Occurrence counts over the pattern vocabulary for one label block."""

    counts: tuple[int, ...]
    vocabulary: tuple[str, ...]
    seq_len: int
    window_start_t_ms: int
    window_end_t_ms: int

    def __post_init__(self):
        if len(self.counts) != len(self.vocabulary):
            raise ValueError("one count per vocabulary entry required")
        if sum(self.counts) != self.seq_len:
            raise ValueError(f"counts sum to {sum(self.counts)}, expected {self.seq_len}")


@dataclass(frozen=True)
class ActivityEvent:
    t0_ms: int
    t1_ms: int
    label: str
    confidence: float


@dataclass(frozen=True)
class TimelineEntry:
    minute: int
    activity: str
    confidence: float


def bow(
    labels: Sequence[str],
    vocabulary: Sequence[str],
    window_start_t_ms: int = 0,
    window_end_t_ms: int = 0,
) -> BowHistogram:
    """Count pattern occurrences over the vocabulary order."""
    index = {name: i for i, name in enumerate(vocabulary)}
    counts = [0] * len(vocabulary)
    for lab in labels:
        if lab not in index:
            raise ValueError(f"label {lab!r} is not in the vocabulary")
        counts[index[lab]] += 1
    return BowHistogram(
        counts=tuple(counts),
        vocabulary=tuple(vocabulary),
        seq_len=len(labels),
        window_start_t_ms=window_start_t_ms,
        window_end_t_ms=window_end_t_ms,
    )


def classify_activity(h: BowHistogram, activity_forest: RandomForest) -> ActivityEvent:
    """Forest prediction over the count vector; confidence is the winning vote fraction."""
    if len(h.counts) != activity_forest.n_features:
        raise ValueError(
            f"histogram has {len(h.counts)} counts but the forest expects {activity_forest.n_features}"
        )
    label, probs = activity_forest.predict(np.asarray(h.counts, dtype=float))
    return ActivityEvent(
        t0_ms=h.window_start_t_ms,
        t1_ms=h.window_end_t_ms,
        label=label,
        confidence=float(probs.max()),
    )


def run_activity_pipeline(
    events: Iterable[UnitPatternEvent],
    activity_forest: RandomForest,
    vocabulary: Sequence[str],
    seq_len: int = SEQ_LEN,
    window_ms: int = 2000,
) -> Iterator[ActivityEvent]:
    """Consume unit events in disjoint blocks of seq_len and classify each block.

    Smoothed labels feed the histogram; warm-up events that have no vote yet
    fall back to their raw label so block boundaries stay aligned to window
    indices. A partial trailing block yields nothing.
    """
    block: list[str] = []
    t0 = 0
    last_t = 0
    for ev in events:
        if not block:
            t0 = ev.t_ms
        block.append(ev.voted_label if ev.voted_label is not None else ev.raw_label)
        last_t = ev.t_ms
        if len(block) == seq_len:
            h = bow(block, vocabulary, window_start_t_ms=t0, window_end_t_ms=last_t + window_ms)
            yield classify_activity(h, activity_forest)
            block = []


def record_timeline(events: Iterable[ActivityEvent]) -> list[TimelineEntry]:
    """Quantize event spans to minutes; overlaps resolve to the higher confidence."""
    by_minute: dict[int, TimelineEntry] = {}
    for ev in events:
        first = ev.t0_ms // MS_PER_MINUTE
        last = max(first, (ev.t1_ms + MS_PER_MINUTE - 1) // MS_PER_MINUTE - 1)
        for minute in range(first, last + 1):
            existing = by_minute.get(minute)
            if existing is None or ev.confidence > existing.confidence:
                by_minute[minute] = TimelineEntry(minute, ev.label, ev.confidence)
    return [by_minute[m] for m in sorted(by_minute)]


def write_timeline_csv(path, entries: Sequence[TimelineEntry], date: str) -> None:
    """Export the day strip as date,minute,activity,confidence rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "minute", "activity", "confidence"])
        for e in entries:
            writer.writerow([date, e.minute, e.activity, repr(float(e.confidence))])
