"""
TFDS1 training-set files.

    TFDS1
    examples=<K> inputs=<m> outputs=<n> norm_shift=<a1|none> norm_scale=<a2|none>
    K rows of little-endian float64: rho, x_1..x_m, y_1..y_n
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from src.core.exceptions import FormatParseError
from src.models.neural.network import TrainingSet

logger = logging.getLogger(__name__)

MAGIC = b"TFDS1\n"


def _fmt_optional(value) -> str:
    return "none" if value is None else repr(float(value))


def _parse_optional(text: str):
    return None if text == "none" else float(text)


def write_dataset(data: TrainingSet, path: Union[str, Path]) -> None:
    rows = np.column_stack([data.example_weights, data.inputs, data.targets]).astype('<f8')
    header = (f"examples={len(data)} inputs={data.n_inputs} outputs={data.n_outputs} "
              f"norm_shift={_fmt_optional(data.norm_shift)} norm_scale={_fmt_optional(data.norm_scale)}\n")
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'wb') as f:
            f.write(MAGIC)
            f.write(header.encode('ascii'))
            f.write(np.ascontiguousarray(rows).tobytes())
        logger.info(f"Dataset written: {path} ({len(data)} examples, {data.n_inputs} -> {data.n_outputs})")
    except Exception as e:
        logger.error(f"Error writing dataset {path}: {e}")
        raise


def read_dataset(path: Union[str, Path]) -> TrainingSet:
    path = str(path)
    if not Path(path).exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")

    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise FormatParseError("missing TFDS1 magic", path=path, line=1, offset=0)
    end = raw.find(b"\n", len(MAGIC))
    if end < 0:
        raise FormatParseError("unterminated header line", path=path, line=2, offset=len(MAGIC))

    try:
        fields = dict(token.split("=", 1) for token in raw[len(MAGIC):end].decode('ascii').split(" "))
        K = int(fields["examples"])
        m = int(fields["inputs"])
        n = int(fields["outputs"])
        shift = _parse_optional(fields["norm_shift"])
        scale = _parse_optional(fields["norm_scale"])
    except (KeyError, ValueError, UnicodeDecodeError) as e:
        raise FormatParseError(f"bad header: {e}", path=path, line=2) from e
    if K < 1 or m < 1 or n < 1:
        raise FormatParseError(f"invalid counts examples={K} inputs={m} outputs={n}", path=path, line=2)

    payload = raw[end + 1:]
    expected = K * (1 + m + n) * 8
    if len(payload) != expected:
        raise FormatParseError(f"expected {expected} data bytes, found {len(payload)}",
                               path=path, offset=end + 1 + min(len(payload), expected))

    rows = np.frombuffer(payload, dtype='<f8').reshape(K, 1 + m + n).astype(np.float64)
    data = TrainingSet(rows[:, 1:1 + m], rows[:, 1 + m:], rows[:, 0], shift, scale)
    logger.info(f"Dataset loaded: {path} ({K} examples)")
    return data
