"""
Filtered Back-Projection
========================
Ram-Lak ramp filtering composed with a Butterworth low-pass window, applied
per view in the Fourier domain, followed by linear-interpolation
back-projection. A filter bank produces several image versions from the very
same sinogram.

Frequencies are normalised so that omega = 1 is the Nyquist frequency of the
bin sampling; cut-offs above 1 lie beyond Nyquist and are nearly transparent.
"""

import logging
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import fft as sp_fft

from src.core.exceptions import DimensionMismatchError
from src.scanmodel.types import Image, Sinogram

logger = logging.getLogger(__name__)


class FilterParams(BaseModel):
    """Butterworth cut-off phi0 (inf = no low-pass) and order p"""

    model_config = ConfigDict(frozen=True)

    cutoff: float = Field(gt=0)
    order: int = Field(default=3, ge=1)

    @property
    def label(self) -> str:
        cutoff = "inf" if np.isinf(self.cutoff) else f"{self.cutoff:g}"
        return f"fbp_c{cutoff}_p{self.order}"


class FilterBank(BaseModel):
    model_config = ConfigDict(frozen=True)

    filters: List[FilterParams]

    @field_validator("filters")
    @classmethod
    def check_filters(cls, v: List[FilterParams]) -> List[FilterParams]:
        if not v:
            raise ValueError("FilterBank must contain at least one filter")
        if len(set(v)) != len(v):
            raise ValueError("FilterBank entries must be distinct")
        return v

    def __len__(self) -> int:
        return len(self.filters)

    def __iter__(self):
        return iter(self.filters)

    @classmethod
    def default(cls) -> 'FilterBank':
        """Strong, moderate and no low-pass, p = 3"""
        return cls(filters=[FilterParams(cutoff=c, order=3) for c in (0.4, 1.15, np.inf)])

    @classmethod
    def sweep_bank(cls) -> 'FilterBank':
        """Eight-filter sweep from which fusion subsets are chosen"""
        filters = [FilterParams(cutoff=c, order=1) for c in (0.4, 0.8, 1.15)]
        filters += [FilterParams(cutoff=c, order=3) for c in (0.4, 0.8, 1.15, 2.0, 120.0)]
        return cls(filters=filters)

    @classmethod
    def from_cutoffs(cls, cutoffs: Sequence[float], order: int = 3) -> 'FilterBank':
        return cls(filters=[FilterParams(cutoff=c, order=order) for c in cutoffs])


def butterworth_gain(omega, params: FilterParams):
    """|H(omega)| = (1 + (omega / phi0)^(2p))^(-1/2); 1 everywhere for phi0 = inf"""
    omega = np.abs(np.asarray(omega, dtype=np.float64))
    if np.isinf(params.cutoff):
        gain = np.ones_like(omega)
    else:
        gain = 1.0 / np.sqrt(1.0 + (omega / params.cutoff) ** (2 * params.order))
    return gain if gain.ndim else float(gain)


def padded_length(num_bins: int) -> int:
    """Next power of two >= 2 * num_bins (no circular wrap of the linear convolution)"""
    return int(2 ** np.ceil(np.log2(max(2 * num_bins, 2))))


def ramlak_kernel(n_pad: int, bin_spacing: float) -> np.ndarray:
    """Band-limited ramp in the spatial domain, laid out circularly on n_pad samples"""
    n = np.arange(n_pad)
    distance = np.minimum(n, n_pad - n)
    kernel = np.zeros(n_pad)
    kernel[0] = 1.0 / (4.0 * bin_spacing ** 2)
    odd = distance % 2 == 1
    kernel[odd] = -1.0 / (np.pi ** 2 * distance[odd] ** 2 * bin_spacing ** 2)
    return kernel


def ramp_response(n_pad: int, bin_spacing: float) -> np.ndarray:
    """rfft-grid response of the ramp; ~ |nu| in cycles per length unit"""
    return bin_spacing * np.real(sp_fft.rfft(ramlak_kernel(n_pad, bin_spacing)))


def normalized_frequencies(n_pad: int) -> np.ndarray:
    """omega in [0, 1] on the rfft grid (1 = Nyquist)"""
    return 2.0 * sp_fft.rfftfreq(n_pad)


def filter_response(n_pad: int, params: FilterParams, bin_spacing: float = 1.0) -> np.ndarray:
    return ramp_response(n_pad, bin_spacing) * butterworth_gain(normalized_frequencies(n_pad), params)


def _filter_rows(rows: np.ndarray, params_list: Sequence[FilterParams], bin_spacing: float) -> List[np.ndarray]:
    num_bins = rows.shape[-1]
    n_pad = padded_length(num_bins)
    spectrum = sp_fft.rfft(rows, n=n_pad, axis=-1)
    return [
        sp_fft.irfft(spectrum * filter_response(n_pad, params, bin_spacing), n=n_pad, axis=-1)[..., :num_bins]
        for params in params_list
    ]


def filter_projection(view: np.ndarray, params: FilterParams, bin_spacing: float = 1.0) -> np.ndarray:
    """Ramp x Butterworth filtering of one view; same length as the input"""
    view = np.asarray(view, dtype=np.float64)
    if view.ndim != 1:
        raise DimensionMismatchError(f"A view must be 1-D, got shape {view.shape}")
    return _filter_rows(view, [params], bin_spacing)[0]


def filter_sinogram(sino: Sinogram, params: FilterParams) -> Sinogram:
    return sino.with_data(_filter_rows(sino.data, [params], sino.geometry.bin_spacing)[0])


def backproject(sino: Sinogram, width: int, height: int, pixel_size: float) -> Image:
    """Sum over views of the s-interpolated sinogram at s = x cos + y sin, times pi / num_views"""
    if width < 1 or height < 1 or not pixel_size > 0:
        raise DimensionMismatchError(f"Invalid image grid {width}x{height}, pixel_size={pixel_size}")

    geometry = sino.geometry
    xs = (np.arange(width) - (width - 1) / 2.0) * pixel_size
    ys = (np.arange(height) - (height - 1) / 2.0) * pixel_size
    X, Y = np.meshgrid(xs, ys)
    bins = geometry.bin_positions

    image = np.zeros((height, width))
    for view, theta in enumerate(geometry.angles):
        s = X * np.cos(theta) + Y * np.sin(theta)
        image += np.interp(s, bins, sino.data[view], left=0.0, right=0.0)

    image *= np.pi / geometry.num_views
    return Image(image, pixel_size)


def fbp_reconstruct(sino: Sinogram, params: FilterParams, width: int, height: int,
                    pixel_size: float) -> Image:
    return backproject(filter_sinogram(sino, params), width, height, pixel_size)


def fbp_sweep(sino: Sinogram, bank: FilterBank, width: int, height: int,
              pixel_size: float) -> List[Image]:
    """One reconstruction per filter, in bank order, all from the same sinogram"""
    filtered = _filter_rows(sino.data, bank.filters, sino.geometry.bin_spacing)
    images = []
    for params, data in zip(bank.filters, filtered):
        image = backproject(sino.with_data(data), width, height, pixel_size)
        image.extra["filter"] = params.label
        images.append(image)
        logger.debug(f"FBP version {params.label} reconstructed")
    logger.info(f"FBP sweep: {len(images)} versions ({width}x{height})")
    return images
