"""
Photon-count simulation and the log transform back to line integrals.
"""

import logging

import numpy as np

from src.core.exceptions import InputDataError
from src.core.random import make_rng
from .types import CountsData, Sinogram

logger = logging.getLogger(__name__)

# Below this mean the Poisson law is sampled exactly (inversion), above it the
# rounded normal approximation is used
INVERSION_LIMIT = 30.0

# Zero counts are clamped to one photon before the log
COUNT_FLOOR = 1.0


def sample_poisson(lam: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent Poisson draws with means lam (any shape)"""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise InputDataError("Poisson means must be finite and non-negative")

    flat = lam.ravel()
    out = np.empty_like(flat)
    small = flat < INVERSION_LIMIT

    # Normal approximation first so the stream layout does not depend on the mix
    z = rng.standard_normal(flat.size)
    out[~small] = np.maximum(np.round(flat[~small] + np.sqrt(flat[~small]) * z[~small]), 0.0)

    if np.any(small):
        mean = flat[small]
        u = rng.uniform(size=mean.size)
        k = np.zeros(mean.size)
        p = np.exp(-mean)
        cdf = p.copy()
        active = u > cdf
        # P(k > 200 | lam < 30) is far below double precision
        for step in range(1, 200):
            if not np.any(active):
                break
            k[active] = step
            p[active] *= mean[active] / step
            cdf[active] += p[active]
            active &= u > cdf
        out[small] = k

    return out.reshape(lam.shape)


def simulate_counts(sino: Sinogram, seed: int, noiseless: bool = False) -> CountsData:
    """lambda = blank_count * exp(-g); Poisson draws unless noiseless"""
    if not np.all(np.isfinite(sino.data)):
        raise InputDataError("Sinogram contains non-finite values")

    lam = sino.geometry.blank_count * np.exp(-sino.data)
    if noiseless:
        return CountsData(sino.geometry, lam)

    counts = sample_poisson(lam, make_rng(seed))
    logger.debug(f"Simulated counts: blank={sino.geometry.blank_count:g}, "
                 f"min={counts.min():g}, zeros={int(np.sum(counts == 0))}")
    return CountsData(sino.geometry, counts)


def counts_to_sinogram(counts: CountsData, count_floor: float = COUNT_FLOOR) -> Sinogram:
    """g_hat = -log(max(y, floor) / blank_count)"""
    y = np.maximum(counts.counts, count_floor)
    return Sinogram(counts.geometry, -np.log(y / counts.geometry.blank_count))
