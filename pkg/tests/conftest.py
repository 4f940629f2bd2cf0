import numpy as np
import pytest

from harstream.corpus import basic_profiles, pattern_stream_for_windows
from harstream.features import extract_features, windows
from harstream.forest import ForestConfig
from harstream.gmm import EmConfig
from harstream.registry import PatternRegistry, TrainerConfig

FAST_TRAINER = TrainerConfig(
    em=EmConfig(seed=0, restarts=1),
    unit_forest=ForestConfig(n_trees=12, seed=0),
    activity_forest=ForestConfig(n_trees=12, seed=1),
)

BASE_PATTERNS = ("shooting", "walking", "running")


@pytest.fixture(scope="session")
def base_pattern_samples():
    """Feature windows per starter pattern, computed once per test session."""
    profiles = basic_profiles()
    out = {}
    for i, name in enumerate(BASE_PATTERNS):
        stream = pattern_stream_for_windows(profiles[name], 40, seed=100 + i)
        out[name] = [extract_features(w) for w in windows(stream)]
    return out


@pytest.fixture
def base_registry(base_pattern_samples):
    registry = PatternRegistry()
    for name, samples in base_pattern_samples.items():
        registry.add_pattern_bulk(name, ["BASE"], samples)
    return registry


@pytest.fixture
def base_snapshot(base_registry):
    return base_registry.retrain(FAST_TRAINER)
