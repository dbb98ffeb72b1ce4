"""
Reconstruction: filtered back-projection and penalized weighted least squares.
"""

from .fbp import (
    FilterBank, FilterParams, backproject, butterworth_gain, fbp_reconstruct, fbp_sweep,
    filter_projection, filter_response, filter_sinogram
)
from .pwls import (
    PwlsParams, PwlsProblem, PwlsResult, WeightMap, fbp_initial_image, huber, huber_deriv,
    penalty, penalty_gradient, pwls_gradient, pwls_objective, pwls_reconstruct
)

__all__ = [
    "FilterBank", "FilterParams", "backproject", "butterworth_gain", "fbp_reconstruct", "fbp_sweep",
    "filter_projection", "filter_response", "filter_sinogram",
    "PwlsParams", "PwlsProblem", "PwlsResult", "WeightMap", "fbp_initial_image", "huber",
    "huber_deriv", "penalty", "penalty_gradient", "pwls_gradient", "pwls_objective",
    "pwls_reconstruct",
]
