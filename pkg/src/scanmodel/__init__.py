"""
Scan model: phantoms, parallel-beam projection and photon-count noise.
"""

from .types import (
    CountsData, Image, ScanGeometry, Sinogram, attenuation_to_hu, hu_to_attenuation
)
from .phantom import (
    BaseDisk, Ellipse, Phantom, Texture, disk_phantom, rasterize_phantom, random_tissue_phantom,
    read_phantom, shepp_logan_phantom, write_phantom
)
from .projector import JosephProjector, radon_forward, system_matrix_adjoint, system_matrix_apply
from .noise import COUNT_FLOOR, counts_to_sinogram, sample_poisson, simulate_counts
from .raster import (
    read_counts, read_image, read_sinogram, write_counts, write_image, write_sinogram
)

__all__ = [
    "CountsData", "Image", "ScanGeometry", "Sinogram", "attenuation_to_hu", "hu_to_attenuation",
    "BaseDisk", "Ellipse", "Phantom", "Texture", "disk_phantom", "rasterize_phantom", "random_tissue_phantom",
    "read_phantom", "shepp_logan_phantom", "write_phantom",
    "JosephProjector", "radon_forward", "system_matrix_adjoint", "system_matrix_apply",
    "COUNT_FLOOR", "counts_to_sinogram", "sample_poisson", "simulate_counts",
    "read_counts", "read_image", "read_sinogram", "write_counts", "write_image", "write_sinogram",
]
