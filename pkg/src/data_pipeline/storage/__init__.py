from .dataset_io import read_dataset, write_dataset

__all__ = ["read_dataset", "write_dataset"]
