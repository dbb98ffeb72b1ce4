"""
Error types shared across the toolkit.

The CLI maps them onto exit codes: input/parse/dimension problems exit with 2,
numerical failures with 3.
"""

from typing import Optional


class TomofuseError(Exception):
    """Base class for all toolkit errors"""


class DimensionMismatchError(TomofuseError, ValueError):
    """Array shapes, geometries or network sizes do not agree"""


class InputDataError(TomofuseError, ValueError):
    """Input values are outside the domain of an operation (e.g. non-finite)"""


class DegenerateDataError(TomofuseError, ValueError):
    """Data has no spread where a spread is required (max == min)"""


class DatasetEmptyError(TomofuseError, ValueError):
    """Every candidate training example was pruned"""


class OutOfBoundsError(TomofuseError, IndexError):
    """A neighbourhood does not fit inside the image"""


class DegenerateResponseError(TomofuseError, ValueError):
    """Local impulse response has no positive peak"""


class NumericalFailure(TomofuseError, RuntimeError):
    """An iterative method could not make progress"""


class FormatParseError(TomofuseError, ValueError):
    """A file does not follow its declared format"""

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None, offset: Optional[int] = None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class UndefinedReferenceError(TomofuseError, ValueError):
    """Reference image is identically zero where a quality metric is evaluated"""
