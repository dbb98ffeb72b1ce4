"""
Typed TFR1 readers/writers for Image, Sinogram and CountsData.
"""

from pathlib import Path
from typing import Union

from src.core.exceptions import FormatParseError
from src.core.raster_io import read_raster_array, write_raster_array
from .types import CountsData, Image, ScanGeometry, Sinogram

PathLike = Union[str, Path]


def write_image(image: Image, path: PathLike) -> None:
    write_raster_array(path, "image", image.data, image.pixel_size, image.extra)


def read_image(path: PathLike) -> Image:
    kind, data, pixel_size, extra = read_raster_array(path)
    if kind != "image":
        raise FormatParseError(f"expected kind=image, found kind={kind}", path=str(path), line=2)
    return Image(data, pixel_size, extra)


def _geometry_extra(geometry: ScanGeometry, quantity: str):
    return {
        "quantity": quantity,
        "blank_count": repr(float(geometry.blank_count)),
    }


def _read_geometry(path: PathLike, quantity: str):
    kind, data, bin_spacing, extra = read_raster_array(path)
    if kind != "sinogram":
        raise FormatParseError(f"expected kind=sinogram, found kind={kind}", path=str(path), line=2)
    found = extra.get("quantity", "line_integrals")
    if found != quantity:
        raise FormatParseError(f"expected quantity={quantity}, found quantity={found}",
                               path=str(path), line=2)
    try:
        blank_count = float(extra["blank_count"])
    except (KeyError, ValueError) as e:
        raise FormatParseError("missing or invalid blank_count", path=str(path), line=2) from e
    geometry = ScanGeometry(num_views=data.shape[0], num_bins=data.shape[1],
                            bin_spacing=bin_spacing, blank_count=blank_count)
    return geometry, data


def write_sinogram(sino: Sinogram, path: PathLike) -> None:
    write_raster_array(path, "sinogram", sino.data, sino.geometry.bin_spacing,
                       _geometry_extra(sino.geometry, "line_integrals"))


def read_sinogram(path: PathLike) -> Sinogram:
    geometry, data = _read_geometry(path, "line_integrals")
    return Sinogram(geometry, data)


def write_counts(counts: CountsData, path: PathLike) -> None:
    write_raster_array(path, "sinogram", counts.counts, counts.geometry.bin_spacing,
                       _geometry_extra(counts.geometry, "counts"))


def read_counts(path: PathLike) -> CountsData:
    geometry, data = _read_geometry(path, "counts")
    return CountsData(geometry, data)
