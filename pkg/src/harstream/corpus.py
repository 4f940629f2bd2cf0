"""Synthetic starter corpus: nine unit-pattern profiles and three activities.

Stands in for a wearer at desk scale. Each pattern gets a distinct
sinusoid-plus-noise profile so windowed statistics separate cleanly;
activities are fixed mixtures of their constituent patterns laid out in
60-second blocks.
"""

from __future__ import annotations

import json
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError
from .ingest import RATE_HZ, ImuFrame, PatternProfile, synth_stream

UNIT_PATTERNS = (
    "shooting",
    "walking",
    "running",
    "dribbling",
    "guitar_sitting",
    "guitar_standing",
    "guitar_foot_on_chair",
    "idle_sitting",
    "idle_standing",
)

# Activity -> (pattern, mixing weight). Weights are the nominal share of a
# 120-window block spent in each pattern.
ACTIVITY_MIX: dict[str, tuple[tuple[str, float], ...]] = {
    "LIVE_CONCERT": (
        ("guitar_standing", 0.40),
        ("guitar_foot_on_chair", 0.20),
        ("guitar_sitting", 0.20),
        ("running", 0.10),
        ("walking", 0.10),
    ),
    "GUITAR_PRACTICE": (
        ("guitar_sitting", 0.60),
        ("idle_sitting", 0.40),
    ),
    "PLAY_BASKETBALL": (
        ("running", 0.35),
        ("walking", 0.25),
        ("shooting", 0.20),
        ("dribbling", 0.20),
    ),
}

ACTIVITIES = tuple(ACTIVITY_MIX)

NOISE_SIGMA = 0.15


def _profile(index: int, name: str, noise_sigma: float = NOISE_SIGMA) -> PatternProfile:
    # Distinct per-pattern levels, swings and rates; the per-channel ramps keep
    # the nine channels from being copies of each other.
    channels = np.arange(9)
    baseline = 2.0 * index + 0.25 * channels
    amplitude = (0.6 + 0.35 * index) * (1.0 + 0.1 * channels)
    frequency = np.full(9, 0.5 + 0.5 * (index % 8))
    return PatternProfile(
        name=name,
        baseline=tuple(float(v) for v in baseline),
        amplitude=tuple(float(v) for v in amplitude),
        frequency=tuple(float(v) for v in frequency),
        noise_sigma=noise_sigma,
    )


def basic_profiles(noise_sigma: float = NOISE_SIGMA) -> dict[str, PatternProfile]:
    """The nine starter unit-pattern profiles keyed by name."""
    return {name: _profile(i, name, noise_sigma) for i, name in enumerate(UNIT_PATTERNS)}


def novel_profile(name: str = "boxing", noise_sigma: float = NOISE_SIGMA) -> PatternProfile:
    """A pattern far outside the starter set, for novelty experiments."""
    channels = np.arange(9)
    return PatternProfile(
        name=name,
        baseline=tuple(float(v) for v in 60.0 + 0.5 * channels),
        amplitude=tuple(float(v) for v in np.full(9, 1.5)),
        frequency=tuple(float(v) for v in np.full(9, 2.5)),
        noise_sigma=noise_sigma,
    )


def write_profiles_json(path, profiles: Sequence[PatternProfile]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([p.to_dict() for p in profiles], fh, indent=2)
        fh.write("\n")


def read_profiles_json(path) -> list[PatternProfile]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid profiles file: {exc}") from exc
    if not isinstance(data, list):
        raise DataError("profiles file must contain a JSON array")
    return [PatternProfile.from_dict(obj) for obj in data]


def pattern_stream_for_windows(
    profile: PatternProfile,
    n_windows: int,
    seed: int,
    window_len: int = 40,
    step: int = 10,
) -> Iterator[ImuFrame]:
    """A single-pattern stream exactly long enough for n_windows full windows."""
    frames = window_len + (n_windows - 1) * step
    return synth_stream([(profile, frames / RATE_HZ)], seed=seed)


def activity_block_segments(
    activity: str,
    rng: np.random.Generator,
    block_frames: int = 1200,
    jitter: float = 0.15,
    profiles: dict[str, PatternProfile] | None = None,
) -> list[tuple[PatternProfile, float]]:
    """One block's worth of segments drawn from the activity's pattern mix.

    Shares are jittered per block (and renormalized to exactly block_frames)
    so no two blocks have identical histograms.
    """
    if activity not in ACTIVITY_MIX:
        raise ValueError(f"unknown activity {activity!r}")
    profiles = profiles or basic_profiles()
    mix = ACTIVITY_MIX[activity]
    shares = np.array([w for _, w in mix])
    shares = shares * (1.0 + jitter * (rng.random(len(mix)) * 2.0 - 1.0))
    shares = shares / shares.sum()
    counts = np.floor(shares * block_frames).astype(int)
    counts[-1] += block_frames - counts.sum()
    order = rng.permutation(len(mix))
    segments = []
    for i in order:
        name = mix[i][0]
        if counts[i] > 0:
            segments.append((profiles[name], counts[i] / RATE_HZ))
    return segments


def activity_script(
    plan: Sequence[tuple[str, int]],
    seed: int,
    block_frames: int = 1200,
    pad_frames: int = 30,
    profiles: dict[str, PatternProfile] | None = None,
) -> list[tuple[PatternProfile, float, str]]:
    """Expand (activity, n_blocks) entries into labeled synth segments.

    The trailing pad repeats the last pattern so the final block still fills
    a full window's worth of samples.
    """
    profiles = profiles or basic_profiles()
    rng = np.random.default_rng(seed)
    script: list[tuple[PatternProfile, float, str]] = []
    for activity, n_blocks in plan:
        for _ in range(n_blocks):
            for profile, duration in activity_block_segments(
                activity, rng, block_frames=block_frames, profiles=profiles
            ):
                script.append((profile, duration, activity))
    if pad_frames > 0 and script:
        last_profile, _, last_activity = script[-1]
        script.append((last_profile, pad_frames / RATE_HZ, last_activity))
    return script


def labeled_frames(
    script: Sequence[tuple[PatternProfile, float, str]], seed: int
) -> tuple[list[ImuFrame], list[str], list[str]]:
    """Materialize a script into frames plus per-frame pattern/activity labels."""
    segments = [(profile, duration) for profile, duration, _ in script]
    frames = list(synth_stream(segments, seed=seed))
    patterns: list[str] = []
    activities: list[str] = []
    for (profile, duration, activity) in script:
        count = int(round(duration * RATE_HZ))
        patterns.extend([profile.name] * count)
        activities.extend([activity] * count)
    assert len(frames) == len(patterns)
    return frames, patterns, activities
