"""
Boost Reproductions
===================
Synthetic version of the thigh-section protocol: random-tissue phantoms are
scanned at low dose, reconstructed several ways, a fusion network is trained
on the training slices and evaluated on held-out slices.

Every slice draws its phantom and its photon noise from seeds derived from the
experiment seed, so a run is fully determined by its configuration.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.config import settings
from src.core.random import spawn_seeds
from src.data_pipeline.processing.patch_features import FusionConfig, build_training_set, example_weight_map
from src.fusion.fuse import fuse
from src.fusion.pipeline import DEFAULT_PWLS_SNAPSHOTS, fbp_stack, pwls_stack
from src.metrics.masking import object_mask
from src.metrics.quality import HuWindow, quality_table
from src.models.neural.network import NeuralNet
from src.models.neural.training import TrainConfig, TrainResult, train
from src.reconstruction.fbp import FilterBank
from src.reconstruction.pwls import PwlsParams
from src.scanmodel.noise import simulate_counts
from src.scanmodel.phantom import random_tissue_phantom, rasterize_phantom
from src.scanmodel.projector import radon_forward
from src.scanmodel.types import CountsData, Image, ScanGeometry, hu_to_attenuation

logger = logging.getLogger(__name__)

FUSED = "fusion"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    image_size: int = Field(default_factory=lambda: settings.IMAGE_SIZE, ge=16)
    pixel_size: float = Field(default_factory=lambda: settings.PIXEL_SIZE, gt=0)
    num_views: int = Field(default_factory=lambda: settings.NUM_VIEWS, ge=1)
    blank_count: float = Field(default_factory=lambda: settings.LOW_DOSE_BLANK_COUNT, gt=0)
    mu_water: float = Field(default_factory=lambda: settings.MU_WATER, gt=0)
    train_slices: int = Field(default=12, ge=1)
    test_slices: int = Field(default=3, ge=1)
    hidden: List[int] = Field(default_factory=lambda: [40])
    seed: int = Field(default=0, ge=0)
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1)

    @property
    def geometry(self) -> ScanGeometry:
        return ScanGeometry.covering(self.image_size, self.pixel_size, self.num_views, self.blank_count)

    @property
    def fov_radius(self) -> float:
        return self.image_size * self.pixel_size / 2.0


@dataclass
class ScanSlice:
    """Reference (HU) and its simulated low-dose scan"""
    seed: int
    reference: Image
    counts: CountsData


def make_slices(cfg: ExperimentConfig) -> Tuple[List[ScanSlice], List[ScanSlice]]:
    """Training and test slices with disjoint phantom and noise seeds"""
    total = cfg.train_slices + cfg.test_slices
    seeds = spawn_seeds(cfg.seed, 2 * total)
    geometry = cfg.geometry
    slices = []
    for phantom_seed, noise_seed in zip(seeds[:total], seeds[total:]):
        phantom = random_tissue_phantom(cfg.fov_radius, phantom_seed, pixel_size=cfg.pixel_size)
        reference = rasterize_phantom(phantom, cfg.image_size, cfg.image_size, cfg.pixel_size)
        sino = radon_forward(hu_to_attenuation(reference, cfg.mu_water), geometry)
        slices.append(ScanSlice(phantom_seed, reference, simulate_counts(sino, noise_seed)))
    logger.info(f"Simulated {total} slices ({cfg.image_size}^2, {cfg.num_views} views, "
                f"blank {cfg.blank_count:g})")
    return slices[:cfg.train_slices], slices[cfg.train_slices:]


StackBuilder = Callable[[ScanSlice], Tuple[List[Image], List[str]]]


class BoostExperiment:
    """Train a fusion network on training slices and compare it with its input versions on test slices"""

    def __init__(self, cfg: ExperimentConfig, fusion: FusionConfig, stack_builder: StackBuilder,
                 train_config: Optional[TrainConfig] = None, window: Optional[HuWindow] = None):
        self.cfg = cfg
        self.fusion = fusion
        self.stack_builder = stack_builder
        self.train_config = train_config or TrainConfig(seed=cfg.seed)
        self.window = window or HuWindow()
        self.net: Optional[NeuralNet] = None
        self.training: Optional[TrainResult] = None
        self.tables: Dict[int, pd.DataFrame] = {}
        logger.info(f"BoostExperiment initialized: radii {fusion.radii}, output radius {fusion.output_radius}")

    def train(self, slices: Sequence[ScanSlice]) -> NeuralNet:
        pairs = [(self.stack_builder(s)[0], s.reference) for s in slices]
        data = build_training_set(pairs, self.fusion, threads=self.cfg.threads)
        sizes = [self.fusion.n_inputs, *self.cfg.hidden, self.fusion.n_outputs]
        self.training = train(NeuralNet.initialize(sizes, self.train_config.seed), data, self.train_config)
        self.net = self.training.net
        return self.net

    def evaluate(self, slices: Sequence[ScanSlice]) -> Dict[int, pd.DataFrame]:
        if self.net is None:
            raise RuntimeError("Network not trained; call train() first")
        for s in slices:
            stack, names = self.stack_builder(s)
            fused = fuse(stack, self.net, self.fusion, self.cfg.threads)
            estimates = dict(zip(names, stack))
            estimates[FUSED] = fused
            weights = example_weight_map(s.reference, self.fusion, stack)
            self.tables[s.seed] = quality_table(s.reference, estimates, object_mask(s.reference),
                                                self.window, weights)
            logger.info(f"Slice {s.seed}: fusion SNR {self.tables[s.seed].loc['SNR (uniform)', FUSED]:.2f} dB")
        return self.tables

    def run(self) -> 'BoostExperiment':
        train_slices, test_slices = make_slices(self.cfg)
        self.train(train_slices)
        self.evaluate(test_slices)
        return self

    def get_results_dataframe(self) -> pd.DataFrame:
        """One row per (test slice, metric); columns are the versions plus the fusion"""
        frames = {seed: table for seed, table in self.tables.items()}
        return pd.concat(frames, names=["slice", "metric"])

    def gains(self) -> pd.DataFrame:
        """Per slice: fused value minus the best input version, for SNR (uniform) and SSIM"""
        rows = []
        for seed, table in self.tables.items():
            versions = table.drop(columns=[FUSED])
            rows.append({
                "slice": seed,
                "snr_gain": table.loc["SNR (uniform)", FUSED] - versions.loc["SNR (uniform)"].max(),
                "ssim_gain": table.loc["SSIM", FUSED] - versions.loc["SSIM"].max(),
            })
        return pd.DataFrame(rows).set_index("slice")

    def median_table(self) -> pd.DataFrame:
        return self.get_results_dataframe().groupby(level="metric", sort=False).median()

    def print_summary(self) -> pd.DataFrame:
        summary = self.median_table()
        logger.info("\n" + "=" * 80)
        logger.info("FUSION QUALITY (median over test slices)")
        logger.info("=" * 80)
        logger.info("\n" + summary.to_string(float_format=lambda v: f"{v:.4f}"))
        gains = self.gains()
        logger.info(f"Median SNR gain over best version: {gains['snr_gain'].median():+.3f} dB, "
                    f"SSIM gain: {gains['ssim_gain'].median():+.4f}")
        return summary

    def export_results(self, output_path: str) -> pd.DataFrame:
        try:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            results = self.get_results_dataframe()
            results.to_csv(output_path)
            logger.info(f"Results exported: {output_path}")
            return results
        except Exception as e:
            logger.error(f"Error exporting results: {e}")
            raise


def fbp_stack_builder(cfg: ExperimentConfig, bank: FilterBank) -> StackBuilder:
    def build(s: ScanSlice):
        stack = fbp_stack(s.counts, bank, cfg.image_size, cfg.image_size, cfg.pixel_size, cfg.mu_water)
        return stack, [f.label for f in bank]
    return build


def pwls_stack_builder(cfg: ExperimentConfig, snapshots: Sequence[int], params: PwlsParams) -> StackBuilder:
    def build(s: ScanSlice):
        stack, _ = pwls_stack(s.counts, snapshots, params, cfg.image_size, cfg.image_size,
                              cfg.pixel_size, cfg.mu_water)
        return stack, [f"pwls_it{it}" for it in snapshots]
    return build


def run_fbp_boost_experiment(cfg: Optional[ExperimentConfig] = None, bank: Optional[FilterBank] = None,
                             fusion: Optional[FusionConfig] = None,
                             train_config: Optional[TrainConfig] = None) -> BoostExperiment:
    cfg = cfg or ExperimentConfig()
    bank = bank or FilterBank.default()
    fusion = fusion or FusionConfig.fbp_default(seed=cfg.seed)
    return BoostExperiment(cfg, fusion, fbp_stack_builder(cfg, bank), train_config).run()


def run_pwls_boost_experiment(cfg: Optional[ExperimentConfig] = None,
                              snapshots: Sequence[int] = DEFAULT_PWLS_SNAPSHOTS,
                              params: Optional[PwlsParams] = None, fusion: Optional[FusionConfig] = None,
                              train_config: Optional[TrainConfig] = None) -> BoostExperiment:
    cfg = cfg or ExperimentConfig(hidden=[30])
    params = params or PwlsParams()
    fusion = fusion or FusionConfig.pwls_default(seed=cfg.seed)
    return BoostExperiment(cfg, fusion, pwls_stack_builder(cfg, snapshots, params), train_config).run()


def run_radius_study(cfg: Optional[ExperimentConfig] = None, radii: Sequence[int] = (0, 1, 2, 3, 4),
                     bank: Optional[FilterBank] = None, output_radius: int = 3,
                     train_config: Optional[TrainConfig] = None) -> pd.DataFrame:
    """
    Median test SNR/SSIM of the FBP boost as the input neighbourhood radius
    grows. Slices and reconstructions are shared across radii.
    """
    cfg = cfg or ExperimentConfig()
    bank = bank or FilterBank.default()
    train_slices, test_slices = make_slices(cfg)

    cache: Dict[int, Tuple[List[Image], List[str]]] = {}
    base = fbp_stack_builder(cfg, bank)

    def cached(s: ScanSlice):
        if s.seed not in cache:
            cache[s.seed] = base(s)
        return cache[s.seed]

    rows = []
    for r in radii:
        fusion = FusionConfig(radii=[r] * len(bank), output_radius=output_radius, seed=cfg.seed)
        experiment = BoostExperiment(cfg, fusion, cached, train_config)
        experiment.train(train_slices)
        experiment.evaluate(test_slices)
        median = experiment.median_table()
        best_version = median.drop(columns=[FUSED]).loc["SNR (uniform)"].max()
        rows.append({
            "radius": r,
            "inputs": fusion.n_inputs,
            "snr_fused": median.loc["SNR (uniform)", FUSED],
            "snr_best_version": best_version,
            "ssim_fused": median.loc["SSIM", FUSED],
        })
        logger.info(f"Radius {r}: fused SNR {rows[-1]['snr_fused']:.2f} dB (best version {best_version:.2f} dB)")
    return pd.DataFrame(rows).set_index("radius")
