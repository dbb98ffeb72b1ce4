"""
TFNN1 model files: plain text, one record per line.

    TFNN1
    layers <m> <h1> [<h2>] <n>
    norm <alpha1> <alpha2>
    W <layer> <rows> <cols>     followed by <rows> lines of <cols> values
    b <layer> <size>            followed by one line of <size> values

Floats are written with 17 significant digits so a load reproduces every bit.
"""

import logging
from pathlib import Path
from typing import List, Union

import numpy as np

from src.core.exceptions import FormatParseError
from .network import NeuralNet

logger = logging.getLogger(__name__)

MAGIC = "TFNN1"


def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in np.ravel(values))


def dumps_model(net: NeuralNet) -> str:
    lines = [MAGIC,
             "layers " + " ".join(str(n) for n in net.layer_sizes),
             f"norm {_fmt([net.norm_shift, net.norm_scale])}"]
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"W {l} {w.shape[0]} {w.shape[1]}")
        lines.extend(_fmt(row) for row in w)
        lines.append(f"b {l} {b.shape[0]}")
        lines.append(_fmt(b))
    return "\n".join(lines) + "\n"


def save_model(net: NeuralNet, path: Union[str, Path]) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(dumps_model(net))
        logger.info(f"Model saved: {path} (layers {net.layer_sizes})")
    except Exception as e:
        logger.error(f"Error saving model: {e}")
        raise


class _Lines:
    """Line cursor that reports 1-based line numbers in parse errors"""

    def __init__(self, text: str, path: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.path = path
        self.pos = 0

    def error(self, message: str, line: int = None) -> FormatParseError:
        return FormatParseError(message, path=self.path, line=line or self.pos)

    def next(self, what: str) -> List[str]:
        if self.pos >= len(self.lines):
            raise FormatParseError(f"unexpected end of file, expected {what}", path=self.path,
                                   line=self.pos + 1)
        self.pos += 1
        return self.lines[self.pos - 1].split()

    def floats(self, count: int, what: str) -> np.ndarray:
        tokens = self.next(what)
        if len(tokens) != count:
            raise self.error(f"expected {count} values for {what}, found {len(tokens)}")
        try:
            return np.array([float(t) for t in tokens])
        except ValueError as e:
            raise self.error(f"bad number in {what}: {e}") from e

    def ints(self, tokens: List[str], what: str) -> List[int]:
        try:
            return [int(t) for t in tokens]
        except ValueError as e:
            raise self.error(f"bad integer in {what}: {e}") from e


def loads_model(text: str, path: str = "<string>") -> NeuralNet:
    cursor = _Lines(text, path)
    if cursor.next("magic") != [MAGIC]:
        raise cursor.error(f"missing {MAGIC} header")

    tokens = cursor.next("layer sizes")
    if len(tokens) < 3 or tokens[0] != "layers":
        raise cursor.error("expected 'layers <m> ... <n>'")
    sizes = cursor.ints(tokens[1:], "layer sizes")

    tokens = cursor.next("normalisation")
    if len(tokens) != 3 or tokens[0] != "norm":
        raise cursor.error("expected 'norm <alpha1> <alpha2>'")
    try:
        shift, scale = float(tokens[1]), float(tokens[2])
    except ValueError as e:
        raise cursor.error(f"bad normalisation constant: {e}") from e

    weights, biases = [], []
    for l in range(len(sizes) - 1):
        rows, cols = sizes[l + 1], sizes[l]
        header = cursor.next(f"W {l}")
        if header[:1] != ["W"] or cursor.ints(header[1:], "W header") != [l, rows, cols]:
            raise cursor.error(f"expected 'W {l} {rows} {cols}'")
        weights.append(np.stack([cursor.floats(cols, f"W {l} row {r}") for r in range(rows)]))

        header = cursor.next(f"b {l}")
        if header[:1] != ["b"] or cursor.ints(header[1:], "b header") != [l, rows]:
            raise cursor.error(f"expected 'b {l} {rows}'")
        biases.append(cursor.floats(rows, f"b {l}"))

    if cursor.pos != len(cursor.lines):
        raise FormatParseError("trailing content after the last layer", path=path, line=cursor.pos + 1)

    try:
        return NeuralNet(sizes, weights, biases, shift, scale)
    except ValueError as e:
        raise FormatParseError(str(e), path=path) from e


def load_model(path: Union[str, Path]) -> NeuralNet:
    if not Path(path).exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    net = loads_model(Path(path).read_text(), str(path))
    logger.info(f"Model loaded: {path} (layers {net.layer_sizes})")
    return net
