import numpy as np
import pandas as pd
import pytest

from src.data_pipeline.processing.patch_features import FusionConfig
from src.experiments.repro import (
    FUSED, BoostExperiment, ExperimentConfig, fbp_stack_builder, make_slices, run_radius_study
)
from src.models.neural.training import TrainConfig
from src.reconstruction.fbp import FilterBank


@pytest.fixture
def cfg():
    return ExperimentConfig(image_size=32, pixel_size=0.2, num_views=30, blank_count=1e4,
                            train_slices=2, test_slices=1, hidden=[3], seed=5, threads=1)


@pytest.fixture
def fusion():
    return FusionConfig(radii=[1, 1, 1], output_radius=1, stride=2, seed=5)


def test_slices_are_seeded_and_disjoint(cfg):
    train_a, test_a = make_slices(cfg)
    train_b, test_b = make_slices(cfg)
    assert [s.seed for s in train_a] == [s.seed for s in train_b]
    np.testing.assert_array_equal(test_a[0].counts.counts, test_b[0].counts.counts)
    seeds = [s.seed for s in train_a + test_a]
    assert len(set(seeds)) == 3
    assert test_a[0].reference.shape == (32, 32)


def test_evaluate_needs_training(cfg, fusion):
    experiment = BoostExperiment(cfg, fusion, fbp_stack_builder(cfg, FilterBank.default()))
    with pytest.raises(RuntimeError):
        experiment.evaluate([])


def test_fbp_boost_run(cfg, fusion, tmp_path):
    bank = FilterBank.default()
    experiment = BoostExperiment(cfg, fusion, fbp_stack_builder(cfg, bank),
                                 TrainConfig(max_epochs=3, seed=0)).run()
    assert experiment.net.layer_sizes == [15, 3, 5]
    assert len(experiment.tables) == 1

    results = experiment.get_results_dataframe()
    assert list(results.columns) == [p.label for p in bank] + [FUSED]
    assert results.index.names == ["slice", "metric"]
    assert "Training-Risk" in results.index.get_level_values("metric")

    gains = experiment.gains()
    assert list(gains.columns) == ["snr_gain", "ssim_gain"]
    assert np.all(np.isfinite(gains.values))

    summary = experiment.print_summary()
    assert summary.loc["SNR (uniform)", FUSED] == results[FUSED].xs("SNR (uniform)", level="metric").median()

    path = tmp_path / "out" / "results.csv"
    experiment.export_results(str(path))
    assert len(pd.read_csv(path)) == len(results)


def test_radius_study_rows(cfg):
    table = run_radius_study(cfg, radii=(0, 1), output_radius=0, train_config=TrainConfig(max_epochs=2, seed=0))
    assert list(table.index) == [0, 1]
    assert list(table["inputs"]) == [3, 15]
    assert np.all(np.isfinite(table["snr_fused"]))
