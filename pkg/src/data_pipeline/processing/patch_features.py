"""
Patch Features for Local Fusion
===============================
Disk-shaped neighbourhoods sampled from every image version are stacked into
one feature vector per location; the reference image supplies the target
disk and the example weight.

Example weights:
- 0 when the feature variance is below `variance_prune` x the largest variance
  (air); such examples are dropped from the training set
- 0 when the accumulated reference gradient exceeds `gradient_cap` x its
  maximum (strong edges); such examples are kept
- otherwise accumulated gradient / maximum accumulated gradient
"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.exceptions import DatasetEmptyError, DimensionMismatchError, InputDataError, OutOfBoundsError
from src.core.random import make_rng
from src.models.neural.network import TrainingSet, normalize_fit
from src.scanmodel.types import Image

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _disk(radius: int) -> np.ndarray:
    offsets = [(dx, dy)
               for dy in range(-radius, radius + 1)
               for dx in range(-radius, radius + 1)
               if dx * dx + dy * dy <= radius * radius]
    array = np.array(offsets, dtype=np.int64).reshape(-1, 2)
    array.setflags(write=False)
    return array


class DiskOffsets:
    """(dx, dy) offsets with dx^2 + dy^2 <= r^2, ordered by dy then dx"""

    def __init__(self, radius: int):
        if radius < 0:
            raise InputDataError(f"Disk radius must be >= 0, got {radius}")
        self.radius = int(radius)
        self.offsets = _disk(self.radius)

    @property
    def dx(self) -> np.ndarray:
        return self.offsets[:, 0]

    @property
    def dy(self) -> np.ndarray:
        return self.offsets[:, 1]

    def __len__(self) -> int:
        return len(self.offsets)

    def __repr__(self) -> str:
        return f"DiskOffsets(radius={self.radius}, count={len(self)})"


def disk_count(radius: int) -> int:
    return len(DiskOffsets(radius))


class FusionConfig(BaseModel):
    """Neighbourhood radii per version, output radius, training grid and pruning rules"""

    model_config = ConfigDict(frozen=True)

    radii: List[int]
    output_radius: int = Field(default=3, ge=0)
    stride: int = Field(default=3, ge=1)
    variance_prune: float = Field(default=1e-6, gt=0, lt=1)
    gradient_cap: float = Field(default=0.02, gt=0, lt=1)
    gradient_radius: Optional[int] = Field(default=None, ge=0,
                                           description="Footprint of the accumulated gradient; "
                                                       "defaults to the output radius")
    max_examples: int = Field(default=30000, ge=1)
    seed: int = Field(default=0, ge=0)

    @field_validator("radii")
    @classmethod
    def check_radii(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("At least one image version is required")
        if any(r < 0 for r in v):
            raise ValueError(f"Radii must be >= 0, got {v}")
        return v

    @property
    def n_inputs(self) -> int:
        return sum(disk_count(r) for r in self.radii)

    @property
    def n_outputs(self) -> int:
        return disk_count(self.output_radius)

    @property
    def footprint_radius(self) -> int:
        return self.output_radius if self.gradient_radius is None else self.gradient_radius

    @property
    def margin(self) -> int:
        return max(self.radii + [self.output_radius, self.footprint_radius])

    @classmethod
    def fbp_default(cls, **overrides) -> 'FusionConfig':
        """Three versions, radius 3 everywhere (87 inputs, 29 outputs)"""
        return cls(**{"radii": [3, 3, 3], "output_radius": 3, **overrides})

    @classmethod
    def pwls_default(cls, **overrides) -> 'FusionConfig':
        """Radii 4/1/4 (103 inputs), single-pixel output"""
        return cls(**{"radii": [4, 1, 4], "output_radius": 0, **overrides})


def check_stack(stack: Sequence[Image], radii: Sequence[int]) -> Tuple[int, int]:
    if len(stack) != len(radii):
        raise DimensionMismatchError(f"{len(stack)} images but {len(radii)} radii")
    shape = stack[0].shape
    for image in stack[1:]:
        if image.shape != shape:
            raise DimensionMismatchError(f"Stack images differ in shape: {shape} vs {image.shape}")
    return shape


def extract_disk(image: Image, q: Tuple[int, int], r: int) -> np.ndarray:
    """Values at q + offsets; q = (row, col) must be at least r from every border"""
    row, col = q
    if not (r <= row < image.height - r and r <= col < image.width - r):
        raise OutOfBoundsError(f"Disk of radius {r} at {q} leaves the {image.shape} image")
    disk = DiskOffsets(r)
    return image.data[row + disk.dy, col + disk.dx]


def build_features(stack: Sequence[Image], q: Tuple[int, int], radii: Sequence[int]) -> np.ndarray:
    """Concatenated disks, in stack order"""
    check_stack(stack, radii)
    return np.concatenate([extract_disk(image, q, r) for image, r in zip(stack, radii)])


def gather_disks(data: np.ndarray, rows: np.ndarray, cols: np.ndarray, radius: int,
                 clamp: bool = False) -> np.ndarray:
    """(len(rows), count(radius)) disk samples; `clamp` replicates edge pixels"""
    disk = DiskOffsets(radius)
    R = rows[:, None] + disk.dy[None, :]
    C = cols[:, None] + disk.dx[None, :]
    if clamp:
        R = np.clip(R, 0, data.shape[0] - 1)
        C = np.clip(C, 0, data.shape[1] - 1)
    return data[R, C]


def gather_features(stack: Sequence[Image], rows: np.ndarray, cols: np.ndarray,
                    radii: Sequence[int], clamp: bool = False) -> np.ndarray:
    return np.concatenate([gather_disks(image.data, rows, cols, r, clamp)
                           for image, r in zip(stack, radii)], axis=1)


def gradient_magnitude(image: Image) -> np.ndarray:
    """Central-difference gradient magnitude (one-sided at the borders)"""
    gy, gx = np.gradient(image.data)
    return np.hypot(gx, gy)


def accumulated_gradient(reference: Image, q: Tuple[int, int], radius: int) -> float:
    """Sum of reference gradient magnitudes over the disk footprint at q"""
    return float(extract_disk(Image(gradient_magnitude(reference)), q, radius).sum())


def compute_example_weight(features: np.ndarray, patch_gradient: float, max_variance: float,
                           max_gradient: float, variance_prune: float = 1e-6,
                           gradient_cap: float = 0.02) -> float:
    """rho for one example given the dataset-level maxima"""
    weights = example_weights(np.atleast_1d(np.var(np.asarray(features, dtype=np.float64))),
                              np.array([patch_gradient], dtype=np.float64),
                              max_variance, max_gradient, variance_prune, gradient_cap)
    return float(weights[0])


def example_weights(variances: np.ndarray, gradients: np.ndarray, max_variance: float,
                    max_gradient: float, variance_prune: float, gradient_cap: float) -> np.ndarray:
    if max_variance <= 0 or max_gradient <= 0:
        return np.zeros_like(gradients)
    rho = gradients / max_gradient
    rho[variances < variance_prune * max_variance] = 0.0
    rho[gradients > gradient_cap * max_gradient] = 0.0
    return rho


def training_grid(height: int, width: int, margin: int, stride: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row-major grid of candidate locations at least `margin` from every border"""
    rows = np.arange(margin, height - margin, stride)
    cols = np.arange(margin, width - margin, stride)
    R, C = np.meshgrid(rows, cols, indexing="ij")
    return R.ravel(), C.ravel()


def _pair_candidates(stack: Sequence[Image], reference: Image, cfg: FusionConfig):
    shape = check_stack(stack, cfg.radii)
    if reference.shape != shape:
        raise DimensionMismatchError(f"Reference shape {reference.shape} differs from stack {shape}")

    rows, cols = training_grid(shape[0], shape[1], cfg.margin, cfg.stride)
    features = gather_features(stack, rows, cols, cfg.radii)
    targets = gather_disks(reference.data, rows, cols, cfg.output_radius)
    gradients = gather_disks(gradient_magnitude(reference), rows, cols, cfg.footprint_radius).sum(axis=1)
    return features, targets, features.var(axis=1), gradients, np.stack([rows, cols], axis=1)


def example_weight_map(reference: Image, cfg: FusionConfig,
                       stack: Optional[Sequence[Image]] = None) -> Image:
    """
    Per-pixel example weight over the whole image (borders by edge
    replication). Without a stack only the gradient rules apply.
    """
    rows, cols = np.indices(reference.shape)
    rows, cols = rows.ravel(), cols.ravel()
    gradients = gather_disks(gradient_magnitude(reference), rows, cols, cfg.footprint_radius,
                             clamp=True).sum(axis=1)
    if stack is not None:
        check_stack(stack, cfg.radii)
        variances = gather_features(stack, rows, cols, cfg.radii, clamp=True).var(axis=1)
    else:
        variances = np.ones_like(gradients)
    weights = example_weights(variances, gradients, float(variances.max()), float(gradients.max()),
                              cfg.variance_prune, cfg.gradient_cap)
    return reference.with_data(weights.reshape(reference.shape))


class FusionDatasetBuilder:
    """
    Assemble a TrainingSet from (image stack, reference) pairs.

    Candidates are taken on the stride grid of every pair, weighted with the
    dataset-level maxima, air examples dropped, capped to `max_examples`
    by a seeded uniform subsample, and normalisation constants fitted on the
    retained features.
    """

    def __init__(self, cfg: FusionConfig, threads: int = 1):
        self.cfg = cfg
        self.threads = max(1, int(threads))
        self.stats = {}

    def build(self, pairs: Sequence[Tuple[Sequence[Image], Image]]) -> TrainingSet:
        cfg = self.cfg
        if not pairs:
            raise DatasetEmptyError("No training pairs given")

        parts = Parallel(n_jobs=self.threads, prefer="threads")(
            delayed(_pair_candidates)(stack, reference, cfg) for stack, reference in pairs
        )
        features = np.concatenate([p[0] for p in parts])
        targets = np.concatenate([p[1] for p in parts])
        variances = np.concatenate([p[2] for p in parts])
        gradients = np.concatenate([p[3] for p in parts])
        locations = np.concatenate([
            np.column_stack([np.full(len(p[4]), i), p[4]]) for i, p in enumerate(parts)
        ])

        max_variance = float(variances.max())
        keep = variances >= cfg.variance_prune * max_variance if max_variance > 0 \
            else np.zeros(len(variances), dtype=bool)
        rho = example_weights(variances, gradients, max_variance, float(gradients.max()),
                              cfg.variance_prune, cfg.gradient_cap)

        self.stats = {
            "candidates": int(len(rho)),
            "variance_pruned": int(np.sum(~keep)),
            "edge_zeroed": int(np.sum(keep & (rho == 0))),
        }

        index = np.flatnonzero(keep)
        if not np.any(rho[index] > 0):
            raise DatasetEmptyError(f"All {len(rho)} candidate examples were pruned")
        if len(index) > cfg.max_examples:
            rng = make_rng(cfg.seed, 2)
            index = np.sort(rng.choice(index, size=cfg.max_examples, replace=False))
            if not np.any(rho[index] > 0):
                raise DatasetEmptyError("Subsample retained no example with positive weight")

        shift, scale = normalize_fit(features[index])
        self.stats["retained"] = int(len(index))
        logger.info(f"Training set: {self.stats['candidates']} candidates, "
                    f"{self.stats['variance_pruned']} air-pruned, {self.stats['edge_zeroed']} edge-zeroed, "
                    f"{len(index)} retained ({cfg.n_inputs} inputs -> {cfg.n_outputs} outputs)")

        data = TrainingSet(features[index], targets[index], rho[index], shift, scale)
        data.locations = locations[index]
        return data


def build_training_set(pairs: Sequence[Tuple[Sequence[Image], Image]], cfg: FusionConfig,
                       threads: int = 1) -> TrainingSet:
    return FusionDatasetBuilder(cfg, threads).build(pairs)
