from .exceptions import (
    TomofuseError,
    DimensionMismatchError,
    InputDataError,
    DegenerateDataError,
    DatasetEmptyError,
    OutOfBoundsError,
    FormatParseError,
    NumericalFailure,
    DegenerateResponseError,
    UndefinedReferenceError,
)
from .random import make_rng, spawn_seeds

__all__ = [
    'TomofuseError',
    'DimensionMismatchError',
    'InputDataError',
    'DegenerateDataError',
    'DatasetEmptyError',
    'OutOfBoundsError',
    'FormatParseError',
    'NumericalFailure',
    'DegenerateResponseError',
    'UndefinedReferenceError',
    'make_rng',
    'spawn_seeds',
]
