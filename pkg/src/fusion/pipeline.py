"""
End-to-end boosts: reconstruct several versions from one set of counts, then
fuse them. Reconstructions run in attenuation units and are reported in HU,
the intensity space the fusion networks are trained in.
"""

import logging
from typing import List, Optional, Sequence, Tuple

from src.config import settings
from src.core.exceptions import DimensionMismatchError, InputDataError
from src.reconstruction.fbp import FilterBank, fbp_sweep
from src.reconstruction.pwls import PwlsParams, PwlsResult, fbp_initial_image, pwls_reconstruct
from src.scanmodel.noise import counts_to_sinogram
from src.scanmodel.types import CountsData, Image, attenuation_to_hu
from src.models.neural.network import NeuralNet
from src.data_pipeline.processing.patch_features import FusionConfig
from .fuse import check_compatible, fuse

logger = logging.getLogger(__name__)

# Snapshot iterations fused by the PWLS boost
DEFAULT_PWLS_SNAPSHOTS = (20, 60, 80)


def fbp_stack(counts: CountsData, bank: FilterBank, width: int, height: int, pixel_size: float,
              mu_water: Optional[float] = None) -> List[Image]:
    """One HU image per filter of the bank, all from the same sinogram"""
    mu_water = mu_water or settings.MU_WATER
    images = fbp_sweep(counts_to_sinogram(counts), bank, width, height, pixel_size)
    return [_to_hu(image, mu_water) for image in images]


def pwls_stack(counts: CountsData, iterations: Sequence[int], params: PwlsParams, width: int, height: int,
               pixel_size: float, mu_water: Optional[float] = None) -> Tuple[List[Image], PwlsResult]:
    """HU images of the requested PWLS iterations (0 = FBP initial image) and the full run"""
    mu_water = mu_water or settings.MU_WATER
    needed = max(iterations)
    if needed > params.max_iters:
        raise InputDataError(f"Iteration {needed} requested but max_iters is {params.max_iters}")
    init = fbp_initial_image(counts, width, height, pixel_size)
    result = pwls_reconstruct(counts, init, params)
    return [_to_hu(image, mu_water) for image in result.select(iterations)], result


def _to_hu(image: Image, mu_water: float) -> Image:
    converted = attenuation_to_hu(image, mu_water)
    converted.extra = dict(image.extra)
    return converted


def end_to_end_fbp_boost(counts: CountsData, bank: FilterBank, net: NeuralNet, cfg: FusionConfig,
                         width: int, height: int, pixel_size: float,
                         mu_water: Optional[float] = None, threads: Optional[int] = None) -> Image:
    check_compatible(net, cfg)
    if len(bank) != len(cfg.radii):
        raise DimensionMismatchError(f"Bank has {len(bank)} filters, config has {len(cfg.radii)} radii")
    stack = fbp_stack(counts, bank, width, height, pixel_size, mu_water)
    return fuse(stack, net, cfg, threads)


def end_to_end_pwls_boost(counts: CountsData, snapshots: Sequence[int], net: NeuralNet, cfg: FusionConfig,
                          width: int, height: int, pixel_size: float, params: Optional[PwlsParams] = None,
                          mu_water: Optional[float] = None, threads: Optional[int] = None) -> Image:
    check_compatible(net, cfg)
    if len(snapshots) != len(cfg.radii):
        raise DimensionMismatchError(f"{len(snapshots)} snapshots, config has {len(cfg.radii)} radii")
    stack, _ = pwls_stack(counts, snapshots, params or PwlsParams(), width, height, pixel_size, mu_water)
    return fuse(stack, net, cfg, threads)
