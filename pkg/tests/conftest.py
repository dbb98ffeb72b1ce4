"""Shared fixtures: small scan geometries, phantom images and a tmp model registry."""

import numpy as np
import pytest

from src.config import settings
from src.scanmodel.phantom import disk_phantom, random_tissue_phantom, rasterize_phantom
from src.scanmodel.types import Image, ScanGeometry


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_geometry():
    """24 views over a 32x32 unit-pixel grid"""
    return ScanGeometry(num_views=24, num_bins=47, bin_spacing=1.0, blank_count=1e5)


@pytest.fixture
def tiny_geometry():
    """6 views over an 8x8 grid, for finite-difference checks"""
    return ScanGeometry(num_views=6, num_bins=13, bin_spacing=1.0, blank_count=1e4)


@pytest.fixture
def disk_image():
    """64x64 cylinder, 1000 HU in air, pixel size 0.1"""
    return rasterize_phantom(disk_phantom(64 * 0.1 / 2), 64, 64, 0.1)


@pytest.fixture
def tissue_image():
    """64x64 random-tissue slice in HU"""
    fov = 64 * 0.1 / 2
    return rasterize_phantom(random_tissue_phantom(fov, seed=3, pixel_size=0.1), 64, 64, 0.1)


@pytest.fixture
def ramp_image():
    return Image(np.add.outer(np.arange(32.0), np.arange(32.0)), 1.0)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setattr(settings, "THREADS", 1)
