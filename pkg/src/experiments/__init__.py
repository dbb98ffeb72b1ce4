from .repro import (
    BoostExperiment, ExperimentConfig, ScanSlice, make_slices, run_fbp_boost_experiment,
    run_pwls_boost_experiment, run_radius_study
)

__all__ = [
    "BoostExperiment", "ExperimentConfig", "ScanSlice", "make_slices", "run_fbp_boost_experiment",
    "run_pwls_boost_experiment", "run_radius_study",
]
