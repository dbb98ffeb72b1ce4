from .masking import ObjectMask, object_mask
from .quality import (
    SNR_CAP_DB, HuWindow, optimal_scale, quality_table, snr, ssim, training_risk, weighted_snr, windowed_snr
)
from .resolution import impulse_locations, lir_fwhm, noiseless_fbp_reconstructor, response_fwhm

__all__ = [
    "ObjectMask", "object_mask",
    "SNR_CAP_DB", "HuWindow", "optimal_scale", "quality_table", "snr", "ssim", "training_risk",
    "weighted_snr", "windowed_snr",
    "impulse_locations", "lir_fwhm", "noiseless_fbp_reconstructor", "response_fwhm",
]
