import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import kstest

from src.metrics.quality import SNR_CAP_DB
from src.models.neural.training import TrainConfig
from src.pwcdemo.experiment import (
    DEFAULT_WIDTHS, PwcConfig, add_noise, build_pwc_training_set, gaussian_filter_bank, generate_pwc,
    run_pwc_experiment, window_features
)


class TestConfig:
    def test_defaults(self):
        cfg = PwcConfig()
        assert cfg.n_features == 88
        assert cfg.num_steps == 10
        assert cfg.eval_slice == slice(50, 250)

    def test_widths_must_increase(self):
        with pytest.raises(ValidationError):
            PwcConfig(widths=[1.0, 0.5])
        with pytest.raises(ValidationError):
            PwcConfig(widths=[0.0, 1.0])

    def test_eval_interval_must_fit(self):
        with pytest.raises(ValidationError):
            PwcConfig(length=100, eval_length=95)


class TestSignals:
    def test_short_signal_has_two_breaks(self):
        signal = generate_pwc(PwcConfig(length=60, eval_length=40), seed=3)
        assert signal.shape == (60,)
        assert np.count_nonzero(np.diff(signal)) == 2
        assert signal.min() >= 0.0 and signal.max() <= 1.0

    def test_seeded(self):
        cfg = PwcConfig()
        np.testing.assert_array_equal(generate_pwc(cfg, 1), generate_pwc(cfg, 1))
        assert not np.array_equal(generate_pwc(cfg, 1), generate_pwc(cfg, 2))

    def test_segment_values_uniform(self):
        cfg = PwcConfig(length=30 * 10_000)
        signal = generate_pwc(cfg, seed=0)
        starts = np.concatenate([[0], np.flatnonzero(np.diff(signal)) + 1])
        assert len(starts) == cfg.num_steps + 1
        assert kstest(signal[starts], "uniform").pvalue > 0.01

    def test_noise_level(self):
        noisy = add_noise(np.zeros(20000), 0.06, seed=0)
        assert np.std(noisy) == pytest.approx(0.06, rel=0.05)


class TestFilterBank:
    def test_constant_preserved(self):
        filtered = gaussian_filter_bank(np.full(100, 0.4), DEFAULT_WIDTHS)
        assert filtered.shape == (8, 100)
        np.testing.assert_allclose(filtered, 0.4)

    def test_impulse_sums_to_one(self):
        impulse = np.zeros(201)
        impulse[100] = 1.0
        for row in gaussian_filter_bank(impulse, DEFAULT_WIDTHS):
            assert row.sum() == pytest.approx(1.0)

    def test_wider_kernels_remove_more_noise(self):
        noise = np.random.default_rng(0).standard_normal(5000)
        variances = gaussian_filter_bank(noise, DEFAULT_WIDTHS)[:, 100:-100].var(axis=1)
        assert all(b < a for a, b in zip(variances, variances[1:]))


def test_window_features_layout():
    filtered = np.arange(3 * 20, dtype=float).reshape(3, 20)
    features = window_features(filtered, 2)
    assert features.shape == (16, 15)
    np.testing.assert_array_equal(features[0, :5], filtered[0, 0:5])
    np.testing.assert_array_equal(features[4, 5:10], filtered[1, 4:9])


def test_training_set():
    cfg = PwcConfig(seed=2)
    data = build_pwc_training_set(cfg)
    assert len(data) == cfg.length - 2 * cfg.window_half_width
    assert data.n_inputs == 88
    np.testing.assert_array_equal(data.targets[:, 0], generate_pwc(cfg)[5:-5])
    assert np.all(data.example_weights == 1.0)


def test_experiment_report():
    report = run_pwc_experiment(PwcConfig(seed=0), PwcConfig(seed=1), hidden=4,
                                train_config=TrainConfig(max_epochs=5, seed=0))
    expected_rows = ["noisy"] + [f"G(p={p:g})" for p in DEFAULT_WIDTHS] + ["best filtered", "fused"]
    assert list(report.table.index) == expected_rows
    assert report.snr_of("best filtered") == report.table.iloc[1:9, 0].max()
    np.testing.assert_array_equal(report.fused[:5], report.noisy[:5])
    assert report.fusion_gain == pytest.approx(report.snr_of("fused") - report.snr_of("best filtered"))


def test_mismatched_banks_rejected():
    with pytest.raises(ValueError):
        run_pwc_experiment(PwcConfig(), PwcConfig(widths=[1.0, 2.0]))


def test_noiseless_signal_favours_narrowest_kernel():
    cfg = PwcConfig(noise_std=0.0, seed=2)
    report = run_pwc_experiment(PwcConfig(noise_std=0.0, seed=1), cfg, hidden=3,
                                train_config=TrainConfig(max_epochs=3, seed=0))
    filtered = [report.snr_of(f"G(p={p:g})") for p in cfg.widths]
    assert report.snr_of("best filtered") == filtered[0]
    assert filtered == sorted(filtered, reverse=True)
    assert report.snr_of("noisy") == SNR_CAP_DB
    np.testing.assert_array_equal(report.noisy, report.clean)
