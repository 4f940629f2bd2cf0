"""IMU frame sources: CSV replay, synthetic generation, and a live socket reader.

Every source yields the same frame type at a nominal 20 Hz, so the rest of
the pipeline never cares where the samples came from.
"""

from __future__ import annotations

import json
import math
import socket
import time
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataError

RATE_HZ = 20.0
FRAME_INTERVAL_MS = 50

CHANNEL_NAMES = (
    "acc_x", "acc_y", "acc_z",
    "gyro_x", "gyro_y", "gyro_z",
    "roll", "pitch", "yaw",
)
CSV_COLUMNS = ("t_ms",) + CHANNEL_NAMES
LABEL_COLUMNS = ("pattern", "activity")


@dataclass(frozen=True)
class ImuFrame:
    """One 9-channel sample: acceleration (g), angular rate (deg/s), orientation (rad)."""

    t_ms: int
    acc: tuple[float, float, float]
    gyro: tuple[float, float, float]
    orient: tuple[float, float, float]

    def __post_init__(self):
        if self.t_ms < 0:
            raise DataError(f"negative timestamp {self.t_ms}")
        for v in (*self.acc, *self.gyro, *self.orient):
            if not math.isfinite(v):
                raise DataError(f"non-finite channel value in frame at t={self.t_ms}ms")

    def channels(self) -> np.ndarray:
        """All 9 channel values in canonical order."""
        return np.array(self.acc + self.gyro + self.orient, dtype=float)


@dataclass(frozen=True)
class PatternProfile:
    """Sinusoid-plus-noise generator settings standing in for a wearer performing one unit pattern.

    Each channel c produces baseline[c] + amplitude[c] * sin(2*pi*frequency[c]*t)
    plus Gaussian noise with shared standard deviation noise_sigma.
    """

    name: str
    baseline: tuple[float, ...]
    amplitude: tuple[float, ...]
    frequency: tuple[float, ...]
    noise_sigma: float = 0.0

    def __post_init__(self):
        for fname in ("baseline", "amplitude", "frequency"):
            vals = getattr(self, fname)
            if len(vals) != len(CHANNEL_NAMES):
                raise ValueError(f"{fname} must have {len(CHANNEL_NAMES)} entries, got {len(vals)}")
        if any(f < 0 for f in self.frequency):
            raise ValueError("frequencies must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "baseline": list(self.baseline),
            "amplitude": list(self.amplitude),
            "frequency": list(self.frequency),
            "noise_sigma": self.noise_sigma,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PatternProfile":
        try:
            return cls(
                name=str(obj["name"]),
                baseline=tuple(float(v) for v in obj["baseline"]),
                amplitude=tuple(float(v) for v in obj["amplitude"]),
                frequency=tuple(float(v) for v in obj["frequency"]),
                noise_sigma=float(obj.get("noise_sigma", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid pattern profile: {exc}") from exc


def parse_csv_record(
    line: str, schema: Sequence[str] = CSV_COLUMNS
) -> tuple[ImuFrame, str | None, str | None]:
    """Parse one data row of the canonical CSV.

    Returns the frame plus the optional trailing pattern/activity labels
    (None when the columns are absent or empty).
    """
    parts = [p.strip() for p in line.rstrip("\r\n").split(",")]
    base = len(schema)
    if not base <= len(parts) <= base + len(LABEL_COLUMNS):
        raise DataError(
            f"expected {base} to {base + len(LABEL_COLUMNS)} columns, got {len(parts)}"
        )
    try:
        t_ms = int(parts[0])
    except ValueError:
        raise DataError(f"column 0: {parts[0]!r} is not an integer timestamp") from None
    values = []
    for i, tok in enumerate(parts[1:base], start=1):
        try:
            values.append(float(tok))
        except ValueError:
            raise DataError(f"column {i}: {tok!r} is not a number") from None
    frame = ImuFrame(t_ms, tuple(values[0:3]), tuple(values[3:6]), tuple(values[6:9]))
    pattern = parts[base] or None if len(parts) > base else None
    activity = parts[base + 1] or None if len(parts) > base + 1 else None
    return frame, pattern, activity


def _fmt(v: float) -> str:
    # repr gives the shortest decimal string that parses back to the same float,
    # so write + replay round-trips exactly.
    return repr(float(v))


def write_csv(
    path,
    frames: Iterable[ImuFrame],
    pattern_labels: Sequence[str | None] | None = None,
    activity_labels: Sequence[str | None] | None = None,
) -> int:
    """Write frames (with optional per-frame labels) in the canonical CSV layout.

    Returns the number of rows written.
    """
    header = list(CSV_COLUMNS)
    if pattern_labels is not None:
        header.append("pattern")
    if activity_labels is not None:
        if pattern_labels is None:
            raise ValueError("activity labels require pattern labels")
        header.append("activity")
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i, frame in enumerate(frames):
            row = [str(frame.t_ms)] + [_fmt(v) for v in frame.channels()]
            if pattern_labels is not None:
                row.append(pattern_labels[i] or "")
            if activity_labels is not None:
                row.append(activity_labels[i] or "")
            fh.write(",".join(row) + "\n")
            n += 1
    return n


def replay(path, rate_hz: float = RATE_HZ, realtime: bool = False) -> Iterator[ImuFrame]:
    """Yield frames from a canonical CSV in file order.

    With realtime=True, emission is paced at 1/rate_hz seconds per frame
    (the configured rate, not the recorded timestamp deltas).
    """
    if rate_hz <= 0:
        raise ValueError(f"rate_hz must be > 0, got {rate_hz}")
    interval = 1.0 / rate_hz
    start = None
    prev_t = -1
    emitted = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if lineno == 1 and line.split(",")[0].strip() == "t_ms":
                continue
            try:
                frame, _, _ = parse_csv_record(line)
            except DataError as exc:
                raise DataError(f"row {lineno}: {exc}") from exc
            if frame.t_ms < prev_t:
                raise DataError(f"row {lineno}: timestamp {frame.t_ms} decreases below {prev_t}")
            prev_t = frame.t_ms
            if realtime:
                if start is None:
                    start = time.monotonic()
                delay = start + emitted * interval - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
            emitted += 1
            yield frame


def read_labeled_csv(path) -> tuple[list[ImuFrame], list[str | None], list[str | None]]:
    """Read a canonical CSV eagerly, keeping the label columns."""
    frames: list[ImuFrame] = []
    patterns: list[str | None] = []
    activities: list[str | None] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if lineno == 1 and line.split(",")[0].strip() == "t_ms":
                continue
            try:
                frame, pat, act = parse_csv_record(line)
            except DataError as exc:
                raise DataError(f"row {lineno}: {exc}") from exc
            frames.append(frame)
            patterns.append(pat)
            activities.append(act)
    return frames, patterns, activities


def segment_frame_counts(segments: Sequence[tuple[PatternProfile, float]]) -> list[int]:
    """Frame count per segment at the nominal rate; callers use this to label frames."""
    return [int(round(duration_s * RATE_HZ)) for _, duration_s in segments]


def synth_stream(
    segments: Sequence[tuple[PatternProfile, float]], seed: int
) -> Iterator[ImuFrame]:
    """Generate frames for a sequence of (profile, duration_s) segments.

    Segments concatenate with continuous timestamps (50 ms apart); the whole
    stream is a deterministic function of the seed.
    """
    rng = np.random.default_rng(seed)
    index = 0
    for (profile, duration_s), count in zip(segments, segment_frame_counts(segments)):
        if duration_s <= 0:
            raise ValueError(f"segment duration must be > 0, got {duration_s}")
        t_ms = (index + np.arange(count)) * FRAME_INTERVAL_MS
        t_s = t_ms / 1000.0
        base = np.asarray(profile.baseline, dtype=float)
        amp = np.asarray(profile.amplitude, dtype=float)
        freq = np.asarray(profile.frequency, dtype=float)
        clean = base[None, :] + amp[None, :] * np.sin(2.0 * np.pi * freq[None, :] * t_s[:, None])
        data = clean + rng.normal(0.0, profile.noise_sigma, size=(count, 9))
        for i in range(count):
            row = [float(v) for v in data[i]]
            yield ImuFrame(
                int(t_ms[i]),
                (row[0], row[1], row[2]),
                (row[3], row[4], row[5]),
                (row[6], row[7], row[8]),
            )
        index += count


def frame_to_live_json(frame: ImuFrame) -> str:
    """Serialize a frame to the newline-delimited live-socket schema."""
    return json.dumps(
        {
            "t": frame.t_ms,
            "acc": list(frame.acc),
            "gyro": list(frame.gyro),
            "orient": list(frame.orient),
        }
    )


def frame_from_live_json(line: str) -> ImuFrame:
    try:
        obj = json.loads(line)
        return ImuFrame(
            int(obj["t"]),
            tuple(float(v) for v in obj["acc"]),
            tuple(float(v) for v in obj["gyro"]),
            tuple(float(v) for v in obj["orient"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"invalid live frame: {exc}") from exc


def live_frames(host: str, port: int, timeout: float | None = None) -> Iterator[ImuFrame]:
    """Connect to a live source emitting newline-delimited JSON frames."""
    with socket.create_connection((host, port), timeout=timeout) as sock:
        with sock.makefile("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield frame_from_live_json(line)
