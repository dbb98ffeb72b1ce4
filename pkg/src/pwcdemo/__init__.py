from .experiment import (
    DEFAULT_WIDTHS, PwcConfig, PwcReport, add_noise, build_pwc_training_set, gaussian_filter_bank,
    generate_pwc, run_pwc_experiment, window_features
)

__all__ = [
    "DEFAULT_WIDTHS", "PwcConfig", "PwcReport", "add_noise", "build_pwc_training_set",
    "gaussian_filter_bank", "generate_pwc", "run_pwc_experiment", "window_features",
]
