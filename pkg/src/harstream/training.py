"""Offline corpus ingestion: labeled CSVs -> populated registry.

Accepts either the canonical frame CSV (with pattern and optionally
activity label columns) or the feature-dump CSV. Frame labels become
window labels by majority within the window; activity-labeled windows are
grouped into disjoint 120-window blocks whose ground-truth pattern counts
train the activity forest. A sidecar manifest (<data>.manifest.json) may
add pattern-to-activity associations.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError
from .features import (
    FeatureVector,
    Window,
    WindowConfig,
    extract_features,
    read_feature_csv,
)
from .ingest import ImuFrame, read_labeled_csv
from .registry import PatternRegistry


def _majority(labels: Sequence[str | None]) -> str | None:
    present = [lab for lab in labels if lab]
    if not present:
        return None
    counts = Counter(present)
    top = max(counts.values())
    for lab in present:  # first label reaching the top count wins
        if counts[lab] == top:
            return lab
    return None


def labeled_feature_windows(
    frames: Sequence[ImuFrame],
    patterns: Sequence[str | None],
    activities: Sequence[str | None] | None,
    cfg: WindowConfig = WindowConfig(),
) -> Iterator[tuple[FeatureVector, str | None, str | None]]:
    """Window the frames and carry each window's majority labels along."""
    n = len(frames)
    count = max(0, (n - cfg.window_len) // cfg.step + 1)
    for i in range(count):
        lo = i * cfg.step
        hi = lo + cfg.window_len
        samples = np.stack([f.channels() for f in frames[lo:hi]])
        fv = extract_features(Window(start_t_ms=frames[lo].t_ms, samples=samples))
        pat = _majority(patterns[lo:hi])
        act = _majority(activities[lo:hi]) if activities is not None else None
        yield fv, pat, act


def block_histograms(
    window_patterns: Sequence[str | None],
    window_activities: Sequence[str | None],
    vocabulary: Sequence[str],
    seq_len: int = 120,
) -> list[tuple[str, np.ndarray]]:
    """Ground-truth pattern counts per disjoint activity-labeled block."""
    index = {name: i for i, name in enumerate(vocabulary)}
    out: list[tuple[str, np.ndarray]] = []
    for start in range(0, len(window_patterns) - seq_len + 1, seq_len):
        block_p = window_patterns[start : start + seq_len]
        block_a = window_activities[start : start + seq_len]
        activity = _majority(block_a)
        if activity is None:
            continue
        counts = np.zeros(len(vocabulary))
        for lab in block_p:
            if lab in index:
                counts[index[lab]] += 1
        out.append((activity, counts))
    return out


def _read_manifest(data_path) -> dict[str, list[str]]:
    path = str(data_path) + ".manifest.json"
    if not os.path.exists(path):
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid manifest {path}: {exc}") from exc
    assoc = doc.get("pattern_activities", {})
    if not isinstance(assoc, dict):
        raise DataError(f"manifest {path}: pattern_activities must be an object")
    return {str(k): [str(a) for a in v] for k, v in assoc.items()}


def registry_from_csv(
    data_path, window_cfg: WindowConfig = WindowConfig(), seq_len: int = 120
) -> PatternRegistry:
    """Build a registry from a labeled corpus file (frame or feature CSV)."""
    with open(data_path, encoding="utf-8") as fh:
        first = fh.readline().split(",")[0].strip()
    if first == "window_start_t_ms":
        fvs, labels = read_feature_csv(data_path)
        triples = [(fv, lab, None) for fv, lab in zip(fvs, labels)]
    else:
        frames, patterns, activities = read_labeled_csv(data_path)
        has_activities = any(a for a in activities)
        triples = list(
            labeled_feature_windows(
                frames, patterns, activities if has_activities else None, window_cfg
            )
        )
    manifest = _read_manifest(data_path)
    by_pattern: dict[str, list[FeatureVector]] = {}
    associations: dict[str, list[str]] = {}
    for fv, pat, act in triples:
        if pat is None:
            continue
        by_pattern.setdefault(pat, []).append(fv)
        if act:
            associations.setdefault(pat, [])
            if act not in associations[pat]:
                associations[pat].append(act)
    if not by_pattern:
        raise DataError(f"{data_path} has no pattern-labeled rows to train on")
    registry = PatternRegistry()
    for name, samples in by_pattern.items():
        acts = associations.get(name, []) + [
            a for a in manifest.get(name, []) if a not in associations.get(name, [])
        ]
        registry.add_pattern_bulk(name, acts, samples)
    window_patterns = [pat for _, pat, _ in triples]
    window_activities = [act for _, _, act in triples]
    if any(a for a in window_activities):
        hist = block_histograms(
            window_patterns, window_activities, registry.pattern_names, seq_len=seq_len
        )
        by_activity: dict[str, list[np.ndarray]] = {}
        for activity, counts in hist:
            by_activity.setdefault(activity, []).append(counts)
        for activity, counts_list in by_activity.items():
            registry.add_activity_histograms(activity, counts_list)
    return registry
