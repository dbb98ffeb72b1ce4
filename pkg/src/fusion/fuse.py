"""
Local fusion of an image stack with a trained network.

Every pixel q contributes the network's output disk around q; each output
pixel is the average of all contributions that land on it. Inputs near the
border are taken with edge replication, outputs falling outside the image are
discarded.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from src.config import settings
from src.core.exceptions import DimensionMismatchError
from src.data_pipeline.processing.patch_features import (
    DiskOffsets, FusionConfig, check_stack, gather_features
)
from src.models.neural.network import NeuralNet, predict
from src.scanmodel.types import Image

logger = logging.getLogger(__name__)

# Rows per work unit; fixed so the summation order never depends on the thread count
CHUNK_ROWS = 16


def check_compatible(net: NeuralNet, cfg: FusionConfig) -> None:
    if net.n_inputs != cfg.n_inputs or net.n_outputs != cfg.n_outputs:
        raise DimensionMismatchError(
            f"Network is {net.n_inputs}->{net.n_outputs} but the fusion config needs "
            f"{cfg.n_inputs}->{cfg.n_outputs} (radii {cfg.radii}, output radius {cfg.output_radius})"
        )


def _scatter(values: np.ndarray, rows: np.ndarray, cols: np.ndarray, output_radius: int, shape):
    """Sum and count images of output disks centred at (rows, cols)"""
    disk = DiskOffsets(output_radius)
    R = rows[:, None] + disk.dy[None, :]
    C = cols[:, None] + disk.dx[None, :]
    inside = (R >= 0) & (R < shape[0]) & (C >= 0) & (C < shape[1])
    flat = (R * shape[1] + C)[inside]
    size = shape[0] * shape[1]
    total = np.bincount(flat, weights=values[inside], minlength=size)
    count = np.bincount(flat, minlength=size).astype(np.float64)
    return total, count


def fusion_coverage(height: int, width: int, output_radius: int) -> np.ndarray:
    """Number of output-disk contributions every pixel receives"""
    rows, cols = np.indices((height, width))
    disk_size = len(DiskOffsets(output_radius))
    _, count = _scatter(np.ones((height * width, disk_size)), rows.ravel(), cols.ravel(),
                        output_radius, (height, width))
    return count.reshape(height, width)


def _fuse_chunk(stack: Sequence[Image], net: NeuralNet, cfg: FusionConfig, row_start: int, row_stop: int):
    height, width = stack[0].shape
    rows, cols = np.indices((row_stop - row_start, width))
    rows = rows.ravel() + row_start
    cols = cols.ravel()
    features = gather_features(stack, rows, cols, cfg.radii, clamp=True)
    outputs = predict(net, features)
    return _scatter(outputs, rows, cols, cfg.output_radius, (height, width))


def fuse(stack: Sequence[Image], net: NeuralNet, cfg: FusionConfig, threads: Optional[int] = None) -> Image:
    """Fused image on the grid of stack[0]; bitwise identical for any thread count"""
    check_compatible(net, cfg)
    height, width = check_stack(stack, cfg.radii)
    threads = max(1, int(threads or settings.THREADS))

    starts = range(0, height, CHUNK_ROWS)
    parts = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_fuse_chunk)(stack, net, cfg, start, min(start + CHUNK_ROWS, height)) for start in starts
    )

    total = np.zeros(height * width)
    count = np.zeros(height * width)
    for part_total, part_count in parts:
        total += part_total
        count += part_count

    fused = (total / count).reshape(height, width)
    logger.debug(f"Fused {len(stack)} versions into a {height}x{width} image")
    return Image(fused, stack[0].pixel_size)
