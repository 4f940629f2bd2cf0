"""Sliding-window assembly and windowed statistical features.

A window of 40 samples (2 s at 20 Hz) advancing by 10 samples gives 75%
overlap. Each window yields 36 features: mean, median, variance and
mean-crossing count for each of the 9 channels, in canonical channel order.
The density model downstream uses the 27-dimensional projection that drops
the crossing counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataError
from .ingest import CHANNEL_NAMES, ImuFrame

N_CHANNELS = len(CHANNEL_NAMES)
STAT_NAMES = ("mean", "median", "variance", "mean_crossings")
N_FEATURES = N_CHANNELS * len(STAT_NAMES)
N_FEATURES_DENSITY = N_CHANNELS * 3

FEATURE_NAMES = tuple(f"{ch}_{st}" for ch in CHANNEL_NAMES for st in STAT_NAMES)


@dataclass(frozen=True)
class WindowConfig:
    window_len: int = 40
    step: int = 10
    rate_hz: float = 20.0

    def __post_init__(self):
        if not 0 < self.step <= self.window_len:
            raise ValueError(f"need 0 < step <= window_len, got step={self.step} window_len={self.window_len}")
        if self.rate_hz <= 0:
            raise ValueError(f"rate_hz must be > 0, got {self.rate_hz}")

    @property
    def window_ms(self) -> int:
        return int(round(self.window_len / self.rate_hz * 1000))

    @property
    def step_ms(self) -> int:
        return int(round(self.step / self.rate_hz * 1000))


@dataclass(frozen=True)
class Window:
    """A full window: window_len x 9 samples starting at start_t_ms."""

    start_t_ms: int
    samples: np.ndarray


@dataclass(frozen=True)
class FeatureVector:
    """36 windowed statistics in canonical order plus the window's start time."""

    values: np.ndarray
    window_start_t_ms: int


def windows(frames: Iterable[ImuFrame], cfg: WindowConfig = WindowConfig()) -> Iterator[Window]:
    """Assemble overlapping full windows; trailing partial windows are dropped.

    Window i covers samples [i*step, i*step + window_len), so n frames yield
    max(0, (n - window_len)//step + 1) windows.
    """
    buf: list[ImuFrame] = []
    seen = 0
    for frame in frames:
        buf.append(frame)
        if len(buf) > cfg.window_len:
            buf.pop(0)
        seen += 1
        if seen >= cfg.window_len and (seen - cfg.window_len) % cfg.step == 0:
            samples = np.stack([f.channels() for f in buf])
            yield Window(start_t_ms=buf[0].t_ms, samples=samples)


def mean_crossings(x: Sequence[float] | np.ndarray, mu: float) -> int:
    """Count adjacent sample pairs that lie strictly on opposite sides of mu.

    Samples exactly equal to mu do not count and break a crossing.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("mean_crossings needs a non-empty signal")
    s = x - mu
    return int(np.count_nonzero(s[:-1] * s[1:] < 0))


def extract_features(w: Window) -> FeatureVector:
    """Compute the 36 statistics of one window.

    Per channel: arithmetic mean, median (midpoint of the two central order
    statistics for even length), population variance, and the crossing count
    against that channel's own mean.
    """
    samples = np.asarray(w.samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != N_CHANNELS:
        raise ValueError(f"window samples must be (n, {N_CHANNELS}), got {samples.shape}")
    if not np.all(np.isfinite(samples)):
        i, c = np.argwhere(~np.isfinite(samples))[0]
        raise DataError(f"non-finite sample at index {i}, channel {CHANNEL_NAMES[c]}")
    means = samples.mean(axis=0)
    medians = np.median(samples, axis=0)
    variances = samples.var(axis=0)
    centered = samples - means[None, :]
    crossings = np.count_nonzero(centered[:-1] * centered[1:] < 0, axis=0)
    values = np.empty(N_FEATURES, dtype=float)
    values[0::4] = means
    values[1::4] = medians
    values[2::4] = variances
    values[3::4] = crossings
    return FeatureVector(values=values, window_start_t_ms=w.start_t_ms)


def project_density(fv: FeatureVector | np.ndarray) -> np.ndarray:
    """The 27-dim projection used by the density model: mean, median and
    variance per channel, with the crossing counts removed."""
    values = fv.values if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
    if values.shape[-1] == N_FEATURES_DENSITY:
        return np.array(values, dtype=float)
    if values.shape[-1] != N_FEATURES:
        raise ValueError(f"expected {N_FEATURES} features, got {values.shape[-1]}")
    return values.reshape(*values.shape[:-1], N_CHANNELS, len(STAT_NAMES))[..., :3].reshape(
        *values.shape[:-1], N_FEATURES_DENSITY
    )


def feature_matrix(fvs: Sequence[FeatureVector]) -> np.ndarray:
    """Stack feature vectors into an (n, 36) matrix."""
    return np.stack([fv.values for fv in fvs]) if fvs else np.empty((0, N_FEATURES))


def write_feature_csv(path, fvs: Sequence[FeatureVector], pattern_labels: Sequence[str | None] | None = None) -> None:
    """Feature dump for offline training: window_start_t_ms, f0..f35[, pattern]."""
    header = ["window_start_t_ms"] + [f"f{i}" for i in range(N_FEATURES)]
    if pattern_labels is not None:
        header.append("pattern")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i, fv in enumerate(fvs):
            row = [str(fv.window_start_t_ms)] + [repr(float(v)) for v in fv.values]
            if pattern_labels is not None:
                row.append(pattern_labels[i] or "")
            fh.write(",".join(row) + "\n")


def read_feature_csv(path) -> tuple[list[FeatureVector], list[str | None]]:
    fvs: list[FeatureVector] = []
    labels: list[str | None] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if lineno == 1 and line.split(",")[0].strip() == "window_start_t_ms":
                continue
            parts = [p.strip() for p in line.rstrip("\r\n").split(",")]
            if len(parts) not in (1 + N_FEATURES, 2 + N_FEATURES):
                raise DataError(f"row {lineno}: expected {1 + N_FEATURES} or {2 + N_FEATURES} columns, got {len(parts)}")
            try:
                t = int(parts[0])
                values = np.array([float(p) for p in parts[1 : 1 + N_FEATURES]])
            except ValueError as exc:
                raise DataError(f"row {lineno}: {exc}") from None
            fvs.append(FeatureVector(values=values, window_start_t_ms=t))
            labels.append(parts[1 + N_FEATURES] or None if len(parts) > 1 + N_FEATURES else None)
    return fvs, labels
