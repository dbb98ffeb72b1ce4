from src.data_pipeline.processing.patch_features import DiskOffsets, FusionConfig, build_training_set
from .fuse import check_compatible, fuse, fusion_coverage
from .pipeline import (
    DEFAULT_PWLS_SNAPSHOTS, end_to_end_fbp_boost, end_to_end_pwls_boost, fbp_stack, pwls_stack
)

__all__ = [
    "DiskOffsets", "FusionConfig", "build_training_set",
    "check_compatible", "fuse", "fusion_coverage",
    "DEFAULT_PWLS_SNAPSHOTS", "end_to_end_fbp_boost", "end_to_end_pwls_boost", "fbp_stack", "pwls_stack",
]
