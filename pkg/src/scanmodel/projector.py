"""
Joseph-style parallel-beam projector.

Each ray is sampled once per image row (or column, whichever the ray crosses
faster) with linear interpolation between the two nearest pixel centres. The
forward projection and the back-projection reuse the same per-view weights,
so the pair is an exact algebraic adjoint: <A f, g> = <f, A^T g>.
"""

import logging
from typing import Tuple

import numpy as np

from src.core.exceptions import DimensionMismatchError
from .types import Image, ScanGeometry, Sinogram

logger = logging.getLogger(__name__)


class JosephProjector:
    """Matched pair A / A^T for one (geometry, image grid) combination"""

    def __init__(self, geometry: ScanGeometry, width: int, height: int, pixel_size: float):
        if width < 1 or height < 1 or not pixel_size > 0:
            raise DimensionMismatchError(f"Invalid image grid {width}x{height}, pixel_size={pixel_size}")
        detector_span = geometry.num_bins * geometry.bin_spacing
        if detector_span < min(width, height) * pixel_size:
            raise DimensionMismatchError(
                f"Detector span {detector_span:.4g} does not cover the field of view "
                f"({min(width, height) * pixel_size:.4g}) of a {width}x{height} image"
            )
        self.geometry = geometry
        self.width = width
        self.height = height
        self.pixel_size = pixel_size
        self._cos = np.cos(geometry.angles)
        self._sin = np.sin(geometry.angles)
        self._bins = geometry.bin_positions
        self._x = (np.arange(width) - (width - 1) / 2.0) * pixel_size
        self._y = (np.arange(height) - (height - 1) / 2.0) * pixel_size

    @classmethod
    def for_image(cls, image: Image, geometry: ScanGeometry) -> 'JosephProjector':
        return cls(geometry, image.width, image.height, image.pixel_size)

    def _footprint(self, view: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flat pixel indices and weights of the two interpolation taps, shape (bins, samples)"""
        c, s = self._cos[view], self._sin[view]
        W, H, ps = self.width, self.height, self.pixel_size

        if abs(c) >= abs(s):
            # one sample per row: x = (t - y sin) / cos
            position = (self._bins[:, None] - self._y[None, :] * s) / c
            index = position / ps + (W - 1) / 2.0
            lo = np.floor(index).astype(np.int64)
            frac = index - lo
            line = np.arange(H)[None, :]
            ok_lo = (lo >= 0) & (lo < W)
            ok_hi = (lo + 1 >= 0) & (lo + 1 < W)
            idx_lo = line * W + lo
            idx_hi = idx_lo + 1
            step = ps / abs(c)
        else:
            # one sample per column: y = (t - x cos) / sin
            position = (self._bins[:, None] - self._x[None, :] * c) / s
            index = position / ps + (H - 1) / 2.0
            lo = np.floor(index).astype(np.int64)
            frac = index - lo
            line = np.arange(W)[None, :]
            ok_lo = (lo >= 0) & (lo < H)
            ok_hi = (lo + 1 >= 0) & (lo + 1 < H)
            idx_lo = lo * W + line
            idx_hi = idx_lo + W
            step = ps / abs(s)

        w_lo = np.where(ok_lo, (1.0 - frac) * step, 0.0)
        w_hi = np.where(ok_hi, frac * step, 0.0)
        idx_lo = np.where(ok_lo, idx_lo, 0)
        idx_hi = np.where(ok_hi, idx_hi, 0)
        return idx_lo, idx_hi, w_lo, w_hi

    def check_image(self, image: Image) -> None:
        if image.shape != (self.height, self.width):
            raise DimensionMismatchError(
                f"Image shape {image.shape} does not match projector grid {(self.height, self.width)}"
            )

    def forward(self, image: Image) -> Sinogram:
        self.check_image(image)
        flat = image.data.ravel()
        out = np.empty(self.geometry.shape)
        for view in range(self.geometry.num_views):
            idx_lo, idx_hi, w_lo, w_hi = self._footprint(view)
            out[view] = np.sum(w_lo * flat[idx_lo] + w_hi * flat[idx_hi], axis=1)
        return Sinogram(self.geometry, out)

    def adjoint(self, sino: Sinogram) -> Image:
        if sino.geometry != self.geometry:
            raise DimensionMismatchError("Sinogram geometry does not match projector geometry")
        size = self.width * self.height
        acc = np.zeros(size)
        for view in range(self.geometry.num_views):
            idx_lo, idx_hi, w_lo, w_hi = self._footprint(view)
            g = sino.data[view][:, None]
            acc += np.bincount(idx_lo.ravel(), weights=(w_lo * g).ravel(), minlength=size)
            acc += np.bincount(idx_hi.ravel(), weights=(w_hi * g).ravel(), minlength=size)
        return Image(acc.reshape(self.height, self.width), self.pixel_size)


def radon_forward(image: Image, geometry: ScanGeometry) -> Sinogram:
    """Line integrals of the image along every (angle, bin) ray"""
    return JosephProjector.for_image(image, geometry).forward(image)


def system_matrix_apply(image: Image, geometry: ScanGeometry) -> Sinogram:
    """A f"""
    return JosephProjector.for_image(image, geometry).forward(image)


def system_matrix_adjoint(sino: Sinogram, width: int, height: int, pixel_size: float) -> Image:
    """A^T g"""
    return JosephProjector(sino.geometry, width, height, pixel_size).adjoint(sino)
