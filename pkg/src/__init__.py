"""tomofuse: CT reconstruction boosted by learned local fusion of image versions."""

__version__ = '0.1.0'
