from .patch_features import (
    DiskOffsets, FusionConfig, FusionDatasetBuilder, build_features, build_training_set,
    compute_example_weight, example_weight_map, extract_disk
)

__all__ = [
    "DiskOffsets", "FusionConfig", "FusionDatasetBuilder", "build_features", "build_training_set",
    "compute_example_weight", "example_weight_map", "extract_disk",
]
