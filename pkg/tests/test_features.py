import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harstream.errors import DataError
from harstream.features import (
    N_FEATURES,
    N_FEATURES_DENSITY,
    FeatureVector,
    Window,
    WindowConfig,
    extract_features,
    mean_crossings,
    project_density,
    read_feature_csv,
    windows,
    write_feature_csv,
)
from harstream.ingest import ImuFrame


def frames_of(values):
    """One frame per row of an (n, 9) array."""
    out = []
    for i, row in enumerate(np.asarray(values, dtype=float)):
        out.append(ImuFrame(50 * i, tuple(row[0:3]), tuple(row[3:6]), tuple(row[6:9])))
    return out


def brute_force_features(samples):
    """Straight-line re-implementation of the four statistics, used as the oracle."""
    samples = np.asarray(samples, dtype=float)
    out = []
    for c in range(9):
        col = [float(v) for v in samples[:, c]]
        n = len(col)
        mean = sum(col) / n
        ordered = sorted(col)
        if n % 2 == 1:
            median = ordered[n // 2]
        else:
            median = (ordered[n // 2 - 1] + ordered[n // 2]) / 2.0
        variance = sum((v - mean) ** 2 for v in col) / n
        crossings = 0
        for i in range(n - 1):
            if (col[i] - mean) * (col[i + 1] - mean) < 0:
                crossings += 1
        out.extend([mean, median, variance, crossings])
    return np.array(out)


class TestWindows:
    def test_exactly_one_window(self):
        ws = list(windows(frames_of(np.zeros((40, 9)))))
        assert len(ws) == 1
        assert ws[0].start_t_ms == 0
        assert ws[0].samples.shape == (40, 9)

    def test_fifty_frames_two_windows(self):
        values = np.arange(50)[:, None] * np.ones((1, 9))
        ws = list(windows(frames_of(values)))
        assert len(ws) == 2
        assert ws[0].samples[0, 0] == 0
        assert ws[1].samples[0, 0] == 10
        assert ws[0].start_t_ms == 0
        assert ws[1].start_t_ms == 500

    def test_below_window_length(self):
        assert list(windows(frames_of(np.zeros((39, 9))))) == []

    @pytest.mark.parametrize("n", [0, 1, 39, 40, 41, 49, 50, 100, 137])
    def test_window_count_formula(self, n):
        cfg = WindowConfig()
        expected = max(0, (n - cfg.window_len) // cfg.step + 1)
        assert len(list(windows(frames_of(np.zeros((n, 9))), cfg))) == expected

    def test_config_validation(self):
        with pytest.raises(ValueError):
            WindowConfig(window_len=10, step=11)
        with pytest.raises(ValueError):
            WindowConfig(step=0)


class TestMeanCrossings:
    def test_alternating(self):
        assert mean_crossings([0, 1, 0, 1], 0.5) == 3

    def test_constant_signal(self):
        assert mean_crossings([2.0, 2.0, 2.0], 2.0) == 0

    def test_single_crossing(self):
        assert mean_crossings([-1.0, 1.0], 0.0) == 1

    def test_touching_mean_breaks_crossing(self):
        # the middle sample sits exactly on the mean: products are 0, not < 0
        assert mean_crossings([-1.0, 0.0, 1.0], 0.0) == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_crossings([], 0.0)

    @given(
        st.lists(st.floats(-100, 100), min_size=1, max_size=60),
        st.floats(-50, 50),
    )
    def test_matches_pairwise_oracle(self, xs, mu):
        expected = sum(
            1 for i in range(len(xs) - 1) if (xs[i] - mu) * (xs[i + 1] - mu) < 0
        )
        assert mean_crossings(xs, mu) == expected


class TestExtractFeatures:
    def test_constant_window(self):
        w = Window(0, np.full((40, 9), 3.5))
        fv = extract_features(w)
        per_channel = fv.values.reshape(9, 4)
        assert np.allclose(per_channel[:, 0], 3.5)
        assert np.allclose(per_channel[:, 1], 3.5)
        assert np.allclose(per_channel[:, 2], 0.0)
        assert np.allclose(per_channel[:, 3], 0.0)

    def test_known_channel_statistics(self):
        # channel samples [1,2,3,4]: mean 2.5, median 2.5, population variance
        # ((1.5^2 + 0.5^2) * 2) / 4 = 1.25, one strict crossing at the middle
        samples = np.tile(np.array([1.0, 2.0, 3.0, 4.0])[:, None], (1, 9))
        fv = extract_features(Window(0, samples))
        assert np.allclose(fv.values.reshape(9, 4)[0], [2.5, 2.5, 1.25, 1.0])

    def test_output_length_is_36(self):
        rng = np.random.default_rng(0)
        fv = extract_features(Window(0, rng.standard_normal((40, 9))))
        assert fv.values.shape == (N_FEATURES,)

    def test_non_finite_sample_identified(self):
        samples = np.zeros((40, 9))
        samples[17, 4] = np.nan
        with pytest.raises(DataError, match="index 17.*gyro_y"):
            extract_features(Window(0, samples))

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(1234)
        for _ in range(50):
            samples = rng.standard_normal((40, 9)) * rng.uniform(0.1, 50)
            fv = extract_features(Window(0, samples))
            assert np.allclose(fv.values, brute_force_features(samples), atol=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(5)
        samples = rng.standard_normal((40, 9))
        base = extract_features(Window(0, samples)).values.reshape(9, 4)
        shifted = extract_features(Window(0, samples + 7.25)).values.reshape(9, 4)
        assert np.allclose(shifted[:, 0], base[:, 0] + 7.25)
        assert np.allclose(shifted[:, 1], base[:, 1] + 7.25)
        assert np.allclose(shifted[:, 2], base[:, 2], atol=1e-9)
        assert np.array_equal(shifted[:, 3], base[:, 3])

    def test_scale_covariance(self):
        rng = np.random.default_rng(6)
        samples = rng.standard_normal((40, 9))
        s = 3.0
        base = extract_features(Window(0, samples)).values.reshape(9, 4)
        scaled = extract_features(Window(0, samples * s)).values.reshape(9, 4)
        assert np.allclose(scaled[:, 2], base[:, 2] * s * s, atol=1e-9)
        assert np.array_equal(scaled[:, 3], base[:, 3])


class TestProjectDensity:
    def test_length_27(self):
        rng = np.random.default_rng(2)
        fv = extract_features(Window(0, rng.standard_normal((40, 9))))
        assert project_density(fv).shape == (N_FEATURES_DENSITY,)

    def test_constant_window_triples(self):
        fv = extract_features(Window(0, np.full((40, 9), 2.0)))
        assert np.allclose(project_density(fv).reshape(9, 3), [[2.0, 2.0, 0.0]] * 9)

    def test_idempotent_on_27(self):
        rng = np.random.default_rng(3)
        fv = extract_features(Window(0, rng.standard_normal((40, 9))))
        once = project_density(fv)
        assert np.array_equal(project_density(once), once)

    def test_drops_exactly_the_crossings(self):
        rng = np.random.default_rng(4)
        fv = extract_features(Window(0, rng.standard_normal((40, 9))))
        projected = project_density(fv).reshape(9, 3)
        full = fv.values.reshape(9, 4)
        assert np.array_equal(projected, full[:, :3])


class TestFeatureCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        fvs = [
            extract_features(Window(500 * i, rng.standard_normal((40, 9))))
            for i in range(5)
        ]
        labels = ["walking", "running", None, "walking", "idle_sitting"]
        path = tmp_path / "features.csv"
        write_feature_csv(path, fvs, pattern_labels=labels)
        back, back_labels = read_feature_csv(path)
        assert back_labels == labels
        for fv, b in zip(fvs, back):
            assert b.window_start_t_ms == fv.window_start_t_ms
            assert np.array_equal(b.values, fv.values)
