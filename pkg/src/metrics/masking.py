"""Object region of an image: Otsu split, hole filling, largest component."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.filters import threshold_otsu

from src.scanmodel.types import Image

logger = logging.getLogger(__name__)


@dataclass
class ObjectMask:
    mask: np.ndarray
    status: str = "ok"

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)

    @property
    def degenerate(self) -> bool:
        return self.status != "ok"

    @property
    def area(self) -> int:
        return int(self.mask.sum())


def object_mask(image: Image) -> ObjectMask:
    data = image.data
    if data.max() == data.min():
        logger.warning("Constant image: object mask covers the whole image")
        return ObjectMask(np.ones(data.shape, dtype=bool), status="degenerate")

    mask = ndimage.binary_fill_holes(data > threshold_otsu(data))
    labels, count = ndimage.label(mask)
    if count == 0:
        logger.warning("No pixel above the Otsu threshold: object mask covers the whole image")
        return ObjectMask(np.ones(data.shape, dtype=bool), status="degenerate")
    if count > 1:
        sizes = np.bincount(labels.ravel())
        sizes[0] = 0
        mask = labels == int(np.argmax(sizes))
    return ObjectMask(mask)
