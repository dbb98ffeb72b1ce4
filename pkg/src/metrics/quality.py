"""
Image Quality Measures
======================
Scale-optimal SNR (plain, HU-windowed, example-weighted), the weighted training
risk, SSIM, and the comparison table that puts them side by side.
"""

import logging
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator
from skimage.metrics import structural_similarity

from src.core.exceptions import DimensionMismatchError, InputDataError, UndefinedReferenceError
from src.scanmodel.types import Image
from .masking import ObjectMask, object_mask

logger = logging.getLogger(__name__)

SNR_CAP_DB = 300.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5

ImageLike = Union[Image, np.ndarray]


class HuWindow(BaseModel):
    """Display window [b1, b2]; values outside are projected onto the bounds"""

    model_config = ConfigDict(frozen=True)

    low: float = -220.0
    high: float = 350.0

    @model_validator(mode="after")
    def check_order(self) -> 'HuWindow':
        if not self.low < self.high:
            raise ValueError(f"Window low bound {self.low} must be below high bound {self.high}")
        return self

    @property
    def span(self) -> float:
        return self.high - self.low

    def apply(self, values: np.ndarray) -> np.ndarray:
        return np.clip(values, self.low, self.high)


def _values(image: ImageLike) -> np.ndarray:
    return image.data if isinstance(image, Image) else np.asarray(image, dtype=np.float64)


def _pair(reference: ImageLike, estimate: ImageLike, mask=None):
    f = _values(reference)
    f_hat = _values(estimate)
    if f.shape != f_hat.shape:
        raise DimensionMismatchError(f"Reference shape {f.shape} differs from estimate {f_hat.shape}")
    if mask is None:
        return f.ravel(), f_hat.ravel()
    selected = mask.mask if isinstance(mask, ObjectMask) else np.asarray(mask, dtype=bool)
    if selected.shape != f.shape:
        raise DimensionMismatchError(f"Mask shape {selected.shape} differs from image {f.shape}")
    return f[selected], f_hat[selected]


def _weighted_snr_values(f: np.ndarray, f_hat: np.ndarray, w: np.ndarray) -> float:
    reference_energy = float(np.sum(w * f * f))
    if reference_energy <= 0:
        raise UndefinedReferenceError("Reference is identically zero where SNR is evaluated")
    estimate_energy = float(np.sum(w * f_hat * f_hat))
    alpha = float(np.sum(w * f * f_hat)) / estimate_energy if estimate_energy > 0 else 0.0
    residual = float(np.sum(w * (f - alpha * f_hat) ** 2))
    if residual <= 0:
        return SNR_CAP_DB
    return min(SNR_CAP_DB, -10.0 * np.log10(residual / reference_energy))


def optimal_scale(reference: ImageLike, estimate: ImageLike, mask=None) -> float:
    """alpha* = <f, f_hat> / ||f_hat||^2"""
    f, f_hat = _pair(reference, estimate, mask)
    energy = float(f_hat @ f_hat)
    return float(f @ f_hat) / energy if energy > 0 else 0.0


def snr(reference: ImageLike, estimate: ImageLike, mask=None) -> float:
    """max over alpha of -20 log10(||f - alpha f_hat|| / ||f||) in dB, capped at 300"""
    f, f_hat = _pair(reference, estimate, mask)
    return _weighted_snr_values(f, f_hat, np.ones_like(f))


def windowed_snr(reference: ImageLike, estimate: ImageLike, window: Optional[HuWindow] = None,
                 mask=None) -> float:
    window = window or HuWindow()
    return snr(window.apply(_values(reference)), window.apply(_values(estimate)), mask)


def weighted_snr(reference: ImageLike, estimate: ImageLike, weights: ImageLike) -> float:
    """SNR with per-pixel weights in every norm and in the optimal scale"""
    f, f_hat = _pair(reference, estimate)
    w = _values(weights).ravel()
    if w.shape != f.shape:
        raise DimensionMismatchError(f"Weights size {w.size} differs from image size {f.size}")
    return _weighted_snr_values(f, f_hat, w)


def training_risk(reference: ImageLike, estimate: ImageLike, weights: ImageLike) -> float:
    """sum w (f - f_hat)^2 / sum w"""
    f, f_hat = _pair(reference, estimate)
    w = _values(weights).ravel()
    if w.shape != f.shape:
        raise DimensionMismatchError(f"Weights size {w.size} differs from image size {f.size}")
    total = float(w.sum())
    if total <= 0:
        raise InputDataError("Weights sum to zero")
    return float(np.sum(w * (f - f_hat) ** 2)) / total


def ssim(reference: ImageLike, estimate: ImageLike, data_range: Optional[float] = None) -> float:
    """Gaussian-weighted (11x11, sigma 1.5) SSIM; data_range defaults to the HU window span"""
    f = _values(reference)
    f_hat = _values(estimate)
    if f.shape != f_hat.shape:
        raise DimensionMismatchError(f"Reference shape {f.shape} differs from estimate {f_hat.shape}")
    if min(f.shape) < SSIM_WINDOW:
        raise DimensionMismatchError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {f.shape}")
    return float(structural_similarity(
        f, f_hat,
        data_range=float(data_range or HuWindow().span),
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
    ))


def quality_table(reference: Image, estimates: Dict[str, Image], mask: Optional[ObjectMask] = None,
                  window: Optional[HuWindow] = None, weights: Optional[Image] = None,
                  include_ssim: bool = True) -> pd.DataFrame:
    """
    Metrics (rows) for each named estimate (columns). The object mask is
    computed from the reference when not given; weighted rows appear only when
    example weights are supplied.
    """
    window = window or HuWindow()
    mask = mask if mask is not None else object_mask(reference)

    columns = {}
    for name, estimate in estimates.items():
        column = {
            "SNR (uniform)": snr(reference, estimate, mask),
            "SNR (windowed)": windowed_snr(reference, estimate, window, mask),
        }
        if weights is not None:
            column["SNR (weighted)"] = weighted_snr(reference, estimate, weights)
            column["Training-Risk"] = training_risk(reference, estimate, weights)
        if include_ssim:
            column["SSIM"] = ssim(reference, estimate, window.span)
        columns[name] = column

    table = pd.DataFrame(columns)
    logger.debug(f"Quality table:\n{table}")
    return table
