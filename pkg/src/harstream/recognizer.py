"""Unit-pattern layer: density scoring, forest classification and vote smoothing.

Every window is scored against the mixture (driving the novelty machine on
the 27-dim projection) and independently classified by the forest on the
full 36 features. Raw labels are smoothed by a majority vote over the last
few windows before they feed the activity layer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .errors import StateError
from .features import FeatureVector, WindowConfig, extract_features, project_density, windows
from .forest import RandomForest
from .gmm import GmmModel
from .ingest import ImuFrame
from .novelty import Mode, NoveltyConfig, NoveltyEvent, NoveltyState, collect_step, step


@dataclass(frozen=True)
class UnitPatternEvent:
    t_ms: int
    raw_label: str
    voted_label: str | None
    confidence: float  # the forest's winning vote fraction


@dataclass(frozen=True)
class VoteConfig:
    capacity: int = 3
    disjoint: bool = False  # emit one vote per block instead of per step

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")


def majority_vote(labels: Sequence[str]) -> str:
    """Most frequent label; ties go to the most recent among the tied labels."""
    if not labels:
        raise ValueError("majority_vote needs at least one label")
    counts: dict[str, int] = {}
    last_seen: dict[str, int] = {}
    for i, lab in enumerate(labels):
        counts[lab] = counts.get(lab, 0) + 1
        last_seen[lab] = i
    return max(counts, key=lambda lab: (counts[lab], last_seen[lab]))


class VoteBuffer:
    """Sliding buffer of the last `capacity` raw labels."""

    def __init__(self, cfg: VoteConfig = VoteConfig()):
        self.cfg = cfg
        self.entries: deque[str] = deque(maxlen=cfg.capacity)
        self._since_emit = 0

    def add(self, label: str) -> str | None:
        """Record a raw label; returns the smoothed label when one is due."""
        self.entries.append(label)
        self._since_emit += 1
        if len(self.entries) < self.cfg.capacity:
            return None
        if self.cfg.disjoint:
            if self._since_emit < self.cfg.capacity:
                return None
            self._since_emit = 0
        return majority_vote(list(self.entries))


def classify_window(
    fv: FeatureVector,
    unit_forest: RandomForest,
    gmm_model: GmmModel,
    novelty_state: NoveltyState,
    novelty_cfg: NoveltyConfig,
    vote_buffer: VoteBuffer,
) -> tuple[UnitPatternEvent, NoveltyState, NoveltyEvent | None]:
    """Process one window through both model families.

    The density score advances the novelty machine (or the active collection)
    while the forest labels the window regardless, so candidate windows still
    carry a raw label for display.
    """
    if unit_forest is None or gmm_model is None:
        raise StateError("models are not trained")
    if novelty_state.mode is Mode.COLLECTING:
        new_state, nov_event = collect_step(novelty_state, fv, novelty_cfg)
    else:
        score = gmm_model.log_pdf(project_density(fv))
        new_state, nov_event = step(novelty_state, score, fv, novelty_cfg)
    raw_label, probs = unit_forest.predict(fv.values)
    voted = vote_buffer.add(raw_label)
    event = UnitPatternEvent(
        t_ms=fv.window_start_t_ms,
        raw_label=raw_label,
        voted_label=voted,
        confidence=float(probs.max()),
    )
    return event, new_state, nov_event


def run_unit_pipeline(
    frames: Iterable[ImuFrame],
    unit_forest: RandomForest,
    gmm_model: GmmModel,
    novelty_cfg: NoveltyConfig,
    window_cfg: WindowConfig = WindowConfig(),
    vote_cfg: VoteConfig = VoteConfig(),
    on_novelty: Callable[[NoveltyEvent, NoveltyState], None] | None = None,
) -> Iterator[UnitPatternEvent]:
    """Frames -> windows -> features -> one event per window step.

    Novelty events are reported through on_novelty; headless runs leave the
    candidate prompt unanswered, which keeps the machine stepping.
    """
    state = NoveltyState()
    votes = VoteBuffer(vote_cfg)
    for w in windows(frames, window_cfg):
        fv = extract_features(w)
        event, state, nov_event = classify_window(
            fv, unit_forest, gmm_model, state, novelty_cfg, votes
        )
        if nov_event is not None and on_novelty is not None:
            on_novelty(nov_event, state)
        yield event
