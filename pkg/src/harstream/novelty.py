"""Dual-threshold novelty detection over window density scores.

Scores at or above theta_match count toward recognizing a known pattern;
scores below theta_new count toward a new one. A run of consecutive_n
sub-theta_new windows raises a candidate, buffering the triggering windows
as the first real examples; a confirmed candidate then collects windows
until collect_target samples are gathered. Scores in the band between the
two thresholds are neutral: they reset both runs and drop any partial
buffer.

The machine is functional: step/collect_step/resolve_candidate return a new
state plus an optional event, never mutating their input.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import StateError
from .features import FeatureVector, project_density
from .gmm import GmmModel


class Mode(enum.Enum):
    KNOWN = "known"
    UNCERTAIN = "uncertain"
    CANDIDATE_PENDING = "candidate_pending"
    COLLECTING = "collecting"


class EventKind(enum.Enum):
    NOVELTY_DETECTED = "novelty_detected"
    COLLECTION_PROGRESS = "collection_progress"
    COLLECTION_COMPLETE = "collection_complete"
    COLLECTION_CANCELLED = "collection_cancelled"


@dataclass(frozen=True)
class NoveltyConfig:
    theta_match: float
    theta_new: float
    consecutive_n: int = 3
    collect_target: int = 120

    def __post_init__(self):
        if not self.theta_new < self.theta_match:
            raise ValueError(f"theta_new ({self.theta_new}) must be below theta_match ({self.theta_match})")
        if self.consecutive_n < 1:
            raise ValueError("consecutive_n must be >= 1")
        if self.collect_target < 2:
            raise ValueError("collect_target must be >= 2")


@dataclass(frozen=True)
class NoveltyEvent:
    kind: EventKind
    collected: int = 0
    target: int = 0
    buffered: tuple[FeatureVector, ...] = ()


@dataclass(frozen=True)
class SuppressedRegion:
    """Feature-space ball the user marked not-of-interest; candidates whose
    buffer centroid falls inside stay silent for the rest of the session."""

    centroid: tuple[float, ...]
    radius: float


@dataclass(frozen=True)
class NoveltyState:
    mode: Mode = Mode.UNCERTAIN
    low_run: int = 0
    high_run: int = 0
    candidate_buffer: tuple[FeatureVector, ...] = ()
    suppressed: tuple[SuppressedRegion, ...] = ()
    pending_name: str | None = None
    pending_activity: str | None = None

    def check_invariants(self, cfg: NoveltyConfig) -> None:
        assert not (self.low_run > 0 and self.high_run > 0)
        assert len(self.candidate_buffer) <= cfg.collect_target
        if self.candidate_buffer:
            # The buffer persists only while a candidate is forming (an active
            # low run) or after it was raised/confirmed.
            assert self.low_run > 0 or self.mode in (Mode.CANDIDATE_PENDING, Mode.COLLECTING)


def _buffer_centroid(buffer: Sequence[FeatureVector]) -> np.ndarray:
    return np.mean([project_density(fv) for fv in buffer], axis=0)


def _is_suppressed(state: NoveltyState, buffer: Sequence[FeatureVector]) -> bool:
    if not state.suppressed:
        return False
    c = _buffer_centroid(buffer)
    for region in state.suppressed:
        if np.linalg.norm(c - np.asarray(region.centroid)) <= region.radius:
            return True
    return False


def step(
    state: NoveltyState, score: float, fv: FeatureVector, cfg: NoveltyConfig
) -> tuple[NoveltyState, NoveltyEvent | None]:
    """Advance the machine by one window outside of collection.

    Returns the new state and, when a fresh run of consecutive_n sub-theta_new
    windows completes, a NOVELTY_DETECTED event.
    """
    if state.mode is Mode.COLLECTING:
        raise StateError("step is not valid while collecting; use collect_step")
    if score >= cfg.theta_match:
        high_run = state.high_run + 1
        if high_run >= cfg.consecutive_n:
            return replace(state, mode=Mode.KNOWN, high_run=high_run, low_run=0, candidate_buffer=()), None
        buffer = state.candidate_buffer if state.mode is Mode.CANDIDATE_PENDING else ()
        return replace(state, high_run=high_run, low_run=0, candidate_buffer=buffer), None
    if score < cfg.theta_new:
        low_run = state.low_run + 1
        buffer = state.candidate_buffer
        if len(buffer) < cfg.collect_target:
            buffer = buffer + (fv,)
        if low_run == cfg.consecutive_n:
            if _is_suppressed(state, buffer):
                # Silent reset: keep checking, never prompt for this region again.
                return replace(state, low_run=0, high_run=0, candidate_buffer=()), None
            new_state = replace(
                state, mode=Mode.CANDIDATE_PENDING, low_run=low_run, high_run=0, candidate_buffer=buffer
            )
            return new_state, NoveltyEvent(EventKind.NOVELTY_DETECTED)
        return replace(state, low_run=low_run, high_run=0, candidate_buffer=buffer), None
    # Neutral band: neither matches nor triggers.
    return replace(state, mode=Mode.UNCERTAIN, low_run=0, high_run=0, candidate_buffer=()), None


def resolve_candidate(
    state: NoveltyState,
    decision: str,
    name: str | None = None,
    activity: str | None = None,
) -> NoveltyState:
    """Apply the user's answer to an open candidate prompt.

    decision is one of "save" (requires name and activity; keeps the buffer
    as the first collected samples), "ignore", or "not_of_interest" (installs
    a suppression region around the buffer centroid).
    """
    if state.mode is not Mode.CANDIDATE_PENDING:
        raise StateError(f"no candidate to resolve in mode {state.mode.value}")
    if decision == "save":
        if not name or not activity:
            raise ValueError("save requires a pattern name and an activity name")
        return replace(
            state,
            mode=Mode.COLLECTING,
            low_run=0,
            high_run=0,
            pending_name=name,
            pending_activity=activity,
        )
    if decision == "ignore":
        return replace(state, mode=Mode.UNCERTAIN, low_run=0, high_run=0, candidate_buffer=())
    if decision == "not_of_interest":
        region = _make_suppression(state.candidate_buffer)
        return replace(
            state,
            mode=Mode.UNCERTAIN,
            low_run=0,
            high_run=0,
            candidate_buffer=(),
            suppressed=state.suppressed + (region,),
        )
    raise ValueError(f"unknown decision {decision!r}")


def _make_suppression(buffer: Sequence[FeatureVector]) -> SuppressedRegion:
    points = np.stack([project_density(fv) for fv in buffer])
    centroid = points.mean(axis=0)
    if len(points) < 2:
        radius = 0.0
    else:
        d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
        radius = float(np.median(d[np.triu_indices(len(points), k=1)]))
    return SuppressedRegion(centroid=tuple(float(v) for v in centroid), radius=radius)


def collect_step(
    state: NoveltyState, fv: FeatureVector, cfg: NoveltyConfig
) -> tuple[NoveltyState, NoveltyEvent]:
    """Add one window to an active collection.

    Emits COLLECTION_PROGRESS until collect_target samples are buffered, then
    COLLECTION_COMPLETE carrying exactly that many vectors; the machine drops
    back to UNCERTAIN (storing and retraining are the caller's job).
    """
    if state.mode is not Mode.COLLECTING:
        raise StateError(f"collect_step requires collecting mode, not {state.mode.value}")
    target = cfg.collect_target
    buffer = state.candidate_buffer
    if len(buffer) < target:
        buffer = buffer + (fv,)
    if len(buffer) >= target:
        done = replace(
            state,
            mode=Mode.UNCERTAIN,
            candidate_buffer=(),
            pending_name=None,
            pending_activity=None,
        )
        return done, NoveltyEvent(
            EventKind.COLLECTION_COMPLETE, collected=target, target=target, buffered=buffer[:target]
        )
    return (
        replace(state, candidate_buffer=buffer),
        NoveltyEvent(EventKind.COLLECTION_PROGRESS, collected=len(buffer), target=target),
    )


def cancel_collection(state: NoveltyState) -> tuple[NoveltyState, NoveltyEvent]:
    if state.mode is not Mode.COLLECTING:
        raise StateError(f"nothing to cancel in mode {state.mode.value}")
    cleared = replace(
        state, mode=Mode.UNCERTAIN, candidate_buffer=(), pending_name=None, pending_activity=None
    )
    return cleared, NoveltyEvent(EventKind.COLLECTION_CANCELLED)


def calibrate_thresholds(
    model: GmmModel,
    training_scores: dict[str, Sequence[float]],
    match_quantile: float = 0.05,
    new_quantile: float = 0.001,
    consecutive_n: int = 3,
    collect_target: int = 120,
) -> NoveltyConfig:
    """Pick the two thresholds from quantiles of the training-data scores.

    theta_match is the match_quantile quantile of all pooled log-density
    scores and theta_new the new_quantile quantile; if the data are too
    degenerate to separate them, theta_new is forced one log unit below.
    """
    if not training_scores:
        raise ValueError("need scores for at least one pattern")
    for name, scores in training_scores.items():
        if len(scores) < 20:
            raise ValueError(f"pattern {name!r} has {len(scores)} scores; need at least 20")
    pooled = np.concatenate([np.asarray(s, dtype=float) for s in training_scores.values()])
    theta_match = float(np.quantile(pooled, match_quantile))
    theta_new = float(np.quantile(pooled, new_quantile))
    if not theta_new < theta_match:
        theta_new = theta_match - 1.0
    return NoveltyConfig(
        theta_match=theta_match,
        theta_new=theta_new,
        consecutive_n=consecutive_n,
        collect_target=collect_target,
    )
