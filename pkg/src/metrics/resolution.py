"""
Local impulse response (LIR) resolution measurement.

A single-pixel spike is added to the object, both versions are reconstructed,
and the difference is sampled x16 per axis from its bilinear interpolant. The
FWHM is the number of upsampled pixels above half of the maximum divided by
256, i.e. an area in original pixels.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.ndimage import map_coordinates

from src.config import settings
from src.core.exceptions import DegenerateResponseError, OutOfBoundsError
from src.core.random import make_rng
from src.reconstruction.fbp import FilterParams, fbp_reconstruct
from src.scanmodel.projector import radon_forward
from src.scanmodel.types import Image, ScanGeometry
from .masking import ObjectMask

logger = logging.getLogger(__name__)

Reconstructor = Callable[[Image], Image]

SPIKE_AMPLITUDE = 1000.0
UPSAMPLE = 16
PATCH_HALF_WIDTH = 10


def response_fwhm(lir: np.ndarray, upsample: int = UPSAMPLE) -> float:
    """
    Area above half maximum of the bilinear interpolant of the response, in
    original pixels. The interpolant is sampled `upsample` times per axis at
    offsets (2k+1)/(2*upsample) - 1/2 around every pixel centre; its maximum
    sits on a pixel centre, so the half-maximum level is taken from the pixels.
    """
    lir = np.asarray(lir, dtype=np.float64)
    peak = float(lir.max())
    if peak <= 0:
        raise DegenerateResponseError(f"Impulse response has no positive peak (max {peak:g})")
    rows, cols = ((np.arange(n * upsample) + 0.5) / upsample - 0.5 for n in lir.shape)
    grid = np.meshgrid(rows, cols, indexing="ij")
    fine = map_coordinates(lir, grid, order=1, mode="nearest")
    return float(np.count_nonzero(fine > 0.5 * peak)) / upsample ** 2


def _local_fwhm(reconstructor: Reconstructor, reference: Image, baseline: Image, q: Tuple[int, int],
           amplitude: float, half_width: int) -> float:
    row, col = q
    if not (0 <= row < reference.height and 0 <= col < reference.width):
        raise OutOfBoundsError(f"Impulse location {q} outside the {reference.shape} image")
    spiked = reference.data.copy()
    spiked[row, col] += amplitude
    lir = reconstructor(reference.with_data(spiked)).data - baseline.data
    patch = lir[max(0, row - half_width):row + half_width + 1, max(0, col - half_width):col + half_width + 1]
    return response_fwhm(patch)


def lir_fwhm(reconstructor: Reconstructor, reference: Image, locations: Sequence[Tuple[int, int]],
             amplitude: float = SPIKE_AMPLITUDE, half_width: int = PATCH_HALF_WIDTH,
             threads: Optional[int] = None) -> List[float]:
    """FWHM area (pixels) of the local impulse response at every (row, col) location"""
    baseline = reconstructor(reference)
    threads = max(1, int(threads or settings.THREADS))
    values = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_local_fwhm)(reconstructor, reference, baseline, tuple(q), amplitude, half_width)
        for q in locations
    )
    logger.info(f"LIR measured at {len(values)} locations, mean FWHM {np.mean(values):.3f} px")
    return list(values)


def impulse_locations(mask: ObjectMask, count: int, seed: int, margin: int = PATCH_HALF_WIDTH) -> List[Tuple[int, int]]:
    """Distinct random (row, col) pixels inside the mask, at least `margin` from the border"""
    inside = mask.mask.copy()
    if margin > 0:
        inside[:margin, :] = False
        inside[-margin:, :] = False
        inside[:, :margin] = False
        inside[:, -margin:] = False
    candidates = np.argwhere(inside)
    if len(candidates) < count:
        raise OutOfBoundsError(f"Only {len(candidates)} impulse candidates for {count} requested")
    chosen = make_rng(seed, 3).choice(len(candidates), size=count, replace=False)
    return [(int(r), int(c)) for r, c in candidates[np.sort(chosen)]]


def noiseless_fbp_reconstructor(geometry: ScanGeometry, params: FilterParams) -> Reconstructor:
    """Image -> FBP of its exact (noise-free) line integrals, on the same grid"""
    def reconstruct(image: Image) -> Image:
        return fbp_reconstruct(radon_forward(image, geometry), params, image.width, image.height,
                               image.pixel_size)
    return reconstruct
