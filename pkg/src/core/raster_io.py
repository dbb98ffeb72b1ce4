"""
TFR1 raster codec shared by images, sinograms and count maps.

Layout: the magic line "TFR1", one ASCII header line
"kind=<image|sinogram> rows=<r> cols=<c> pixel_size=<f> extra=<k=v,...>",
then rows*cols little-endian float64 values in row-major order.
Sinograms keep their geometry in `extra` (views are rows, bins are columns).
"""

import logging
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from src.core.exceptions import DimensionMismatchError, FormatParseError, InputDataError

logger = logging.getLogger(__name__)

MAGIC = b"TFR1\n"
KINDS = ("image", "sinogram")


def _format_extra(extra: Dict[str, str]) -> str:
    for key, value in extra.items():
        text = f"{key}{value}"
        if any(c in text for c in " ,=\n"):
            raise InputDataError(f"extra entry {key}={value} contains a reserved character")
    return ",".join(f"{k}={v}" for k, v in extra.items())


def _parse_extra(text: str, path: str) -> Dict[str, str]:
    extra = {}
    if not text:
        return extra
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise FormatParseError(f"malformed extra entry '{item}'", path=path, line=2)
        extra[key] = value
    return extra


def write_raster_array(path: Union[str, Path], kind: str, data: np.ndarray, pixel_size: float,
                       extra: Dict[str, str]) -> None:
    if kind not in KINDS:
        raise InputDataError(f"Unknown raster kind: {kind}")
    data = np.asarray(data, dtype='<f8')
    if data.ndim != 2:
        raise DimensionMismatchError(f"Raster data must be 2-D, got shape {data.shape}")
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        header = (f"kind={kind} rows={data.shape[0]} cols={data.shape[1]} "
                  f"pixel_size={float(pixel_size)!r} extra={_format_extra(extra)}\n")
        with open(path, 'wb') as f:
            f.write(MAGIC)
            f.write(header.encode('ascii'))
            f.write(np.ascontiguousarray(data).tobytes())
        logger.debug(f"Raster written: {path} ({kind} {data.shape})")
    except Exception as e:
        logger.error(f"Error writing raster {path}: {e}")
        raise


def read_raster_array(path: Union[str, Path]) -> Tuple[str, np.ndarray, float, Dict[str, str]]:
    """Returns (kind, data, pixel_size, extra)"""
    path = str(path)
    if not Path(path).exists():
        raise FileNotFoundError(f"Raster file not found: {path}")

    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise FormatParseError("missing TFR1 magic", path=path, line=1, offset=0)

    end = raw.find(b"\n", len(MAGIC))
    if end < 0:
        raise FormatParseError("unterminated header line", path=path, line=2, offset=len(MAGIC))
    try:
        header = raw[len(MAGIC):end].decode('ascii')
    except UnicodeDecodeError as e:
        raise FormatParseError("header is not ASCII", path=path, line=2) from e

    fields = {}
    for token in header.split(" "):
        key, sep, value = token.partition("=")
        if not sep:
            raise FormatParseError(f"malformed header token '{token}'", path=path, line=2)
        fields[key] = value
    for key in ("kind", "rows", "cols", "pixel_size", "extra"):
        if key not in fields:
            raise FormatParseError(f"header field '{key}' missing", path=path, line=2)

    kind = fields["kind"]
    if kind not in KINDS:
        raise FormatParseError(f"unknown kind '{kind}'", path=path, line=2)
    try:
        rows = int(fields["rows"])
        cols = int(fields["cols"])
        pixel_size = float(fields["pixel_size"])
    except ValueError as e:
        raise FormatParseError(f"bad header value: {e}", path=path, line=2) from e
    if rows < 1 or cols < 1:
        raise FormatParseError(f"invalid raster size {rows}x{cols}", path=path, line=2)

    payload = raw[end + 1:]
    expected = rows * cols * 8
    if len(payload) != expected:
        raise FormatParseError(f"expected {expected} data bytes, found {len(payload)}",
                               path=path, offset=end + 1 + min(len(payload), expected))

    data = np.frombuffer(payload, dtype='<f8').reshape(rows, cols).astype(np.float64)
    return kind, data, pixel_size, _parse_extra(fields["extra"], path)
