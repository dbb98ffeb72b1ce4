"""
Core data records of the scan model.

Images and sinograms are numpy-backed dataclasses that validate themselves on
construction; the scan geometry is a frozen pydantic model.
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.exceptions import DimensionMismatchError, InputDataError


class ScanGeometry(BaseModel):
    """2-D parallel-beam geometry: angles uniform on [0, pi), detector centred on the image centre"""

    model_config = ConfigDict(frozen=True)

    num_views: int = Field(ge=1)
    num_bins: int = Field(ge=1)
    bin_spacing: float = Field(gt=0)
    blank_count: float = Field(gt=0)

    @property
    def angles(self) -> np.ndarray:
        return np.arange(self.num_views) * (np.pi / self.num_views)

    @property
    def bin_positions(self) -> np.ndarray:
        """Signed detector offsets s of the bin centres"""
        return (np.arange(self.num_bins) - (self.num_bins - 1) / 2.0) * self.bin_spacing

    @property
    def shape(self):
        return (self.num_views, self.num_bins)

    @classmethod
    def covering(cls, size: int, pixel_size: float, num_views: int,
                 blank_count: float) -> 'ScanGeometry':
        """Geometry whose detector (bin spacing = pixel size) covers the image diagonal"""
        num_bins = int(np.ceil(size * np.sqrt(2.0))) + 4
        if num_bins % 2 == 0:
            num_bins += 1
        return cls(num_views=num_views, num_bins=num_bins,
                   bin_spacing=pixel_size, blank_count=blank_count)


@dataclass
class Image:
    """2-D raster of attenuation values (HU-like or per-length units), row-major"""

    data: np.ndarray
    pixel_size: float = 1.0
    extra: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise DimensionMismatchError(f"Image data must be a non-empty 2-D array, got shape {self.data.shape}")
        if not self.pixel_size > 0:
            raise InputDataError(f"pixel_size must be positive, got {self.pixel_size}")
        if not np.all(np.isfinite(self.data)):
            raise InputDataError("Image contains non-finite values")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @classmethod
    def zeros(cls, width: int, height: int, pixel_size: float = 1.0) -> 'Image':
        return cls(np.zeros((height, width)), pixel_size)

    def with_data(self, data: np.ndarray) -> 'Image':
        """Same grid, new values"""
        return Image(data, self.pixel_size, dict(self.extra))

    def pixel_coordinates(self):
        """Centre coordinates (x along columns, y along rows), origin at the image centre"""
        x = (np.arange(self.width) - (self.width - 1) / 2.0) * self.pixel_size
        y = (np.arange(self.height) - (self.height - 1) / 2.0) * self.pixel_size
        return x, y


@dataclass
class Sinogram:
    """num_views x num_bins matrix of line integrals g"""

    geometry: ScanGeometry
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != self.geometry.shape:
            raise DimensionMismatchError(
                f"Sinogram data shape {self.data.shape} does not match geometry {self.geometry.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise InputDataError("Sinogram contains non-finite values")

    def with_data(self, data: np.ndarray) -> 'Sinogram':
        return Sinogram(self.geometry, data)


@dataclass
class CountsData:
    """Detected photon counts y, one per (view, bin)"""

    geometry: ScanGeometry
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.counts.shape != self.geometry.shape:
            raise DimensionMismatchError(
                f"Counts shape {self.counts.shape} does not match geometry {self.geometry.shape}"
            )
        if not np.all(np.isfinite(self.counts)) or np.any(self.counts < 0):
            raise InputDataError("Counts must be finite and non-negative")


def hu_to_attenuation(image: Image, mu_water: float) -> Image:
    """mu = mu_water * (1 + HU / 1000); air (-1000 HU) maps to 0"""
    return image.with_data(mu_water * (1.0 + image.data / 1000.0))


def attenuation_to_hu(image: Image, mu_water: float) -> Image:
    return image.with_data(1000.0 * (image.data / mu_water - 1.0))
