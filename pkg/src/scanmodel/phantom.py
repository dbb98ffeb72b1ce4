"""
Synthetic Phantoms
==================
Ellipse phantoms in HU-like units: the Shepp-Logan head and a seeded
"random tissue" generator emulating thigh sections (soft tissue, bone, air
cavities and faint lesions over a smooth texture).

Coordinates are physical lengths with the origin at the image centre;
x runs along columns and y along rows.
"""

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.ndimage import gaussian_filter

from src.core.exceptions import FormatParseError, InputDataError
from src.core.random import make_rng
from .types import Image

logger = logging.getLogger(__name__)


class Ellipse(BaseModel):
    """Additive ellipse: centre, semi-axes, rotation (degrees), value"""

    model_config = ConfigDict(frozen=True)

    cx: float
    cy: float
    a: float = Field(gt=0)
    b: float = Field(gt=0)
    angle_deg: float = 0.0
    value: float

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        theta = np.deg2rad(self.angle_deg)
        dx = x - self.cx
        dy = y - self.cy
        u = dx * np.cos(theta) + dy * np.sin(theta)
        v = -dx * np.sin(theta) + dy * np.cos(theta)
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0


class BaseDisk(BaseModel):
    """Centred disk added under all ellipses"""

    model_config = ConfigDict(frozen=True)

    radius: float = Field(gt=0)
    value: float


class Texture(BaseModel):
    """Smooth zero-mean random field (std = amplitude) confined to the body outline"""

    model_config = ConfigDict(frozen=True)

    amplitude: float = Field(ge=0)
    correlation: float = Field(gt=0, description="Gaussian correlation length in pixels")
    seed: int = Field(ge=0)


class Phantom(BaseModel):
    model_config = ConfigDict(frozen=True)

    ellipses: List[Ellipse] = Field(default_factory=list)
    base_disk: Optional[BaseDisk] = None
    background: float = 0.0
    texture: Optional[Texture] = None


def rasterize_phantom(phantom: Phantom, width: int, height: int, pixel_size: float) -> Image:
    """Pixel value = background + sum of values of every shape containing the pixel centre"""
    if width < 1 or height < 1 or not pixel_size > 0:
        raise InputDataError(f"Invalid raster grid {width}x{height}, pixel_size={pixel_size}")

    grid = Image.zeros(width, height, pixel_size)
    xs, ys = grid.pixel_coordinates()
    X, Y = np.meshgrid(xs, ys)

    data = np.full((height, width), float(phantom.background))
    support = None

    if phantom.base_disk is not None:
        disk = X ** 2 + Y ** 2 <= phantom.base_disk.radius ** 2
        data += np.where(disk, phantom.base_disk.value, 0.0)
        support = disk

    for ellipse in phantom.ellipses:
        inside = ellipse.contains(X, Y)
        data += np.where(inside, ellipse.value, 0.0)
        if support is None:
            support = inside

    if phantom.texture is not None and phantom.texture.amplitude > 0:
        rng = make_rng(phantom.texture.seed)
        field = gaussian_filter(rng.standard_normal((height, width)), phantom.texture.correlation)
        std = field.std()
        if std > 0:
            field *= phantom.texture.amplitude / std
        if support is not None:
            field = np.where(support, field, 0.0)
        data += field

    return Image(data, pixel_size)


# Modified Shepp-Logan geometry on the unit disk: (x0, y0, a, b, phi)
_SHEPP_LOGAN_SHAPES = [
    (0.0, 0.0, 0.69, 0.92, 0.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0),
    (0.22, 0.0, 0.11, 0.31, -18.0),
    (-0.22, 0.0, 0.16, 0.41, 18.0),
    (0.0, 0.35, 0.21, 0.25, 0.0),
    (0.0, 0.1, 0.046, 0.046, 0.0),
    (0.0, -0.1, 0.046, 0.046, 0.0),
    (-0.08, -0.605, 0.046, 0.023, 0.0),
    (0.0, -0.605, 0.023, 0.023, 0.0),
    (0.06, -0.605, 0.023, 0.046, 0.0),
]
# Additive HU values: skull 1000 HU, brain 20 HU over an air background
_SHEPP_LOGAN_VALUES = [2000.0, -980.0, -30.0, -30.0, 20.0, 20.0, 20.0, 20.0, 20.0, 20.0]


def shepp_logan_phantom(fov_radius: float) -> Phantom:
    ellipses = [
        Ellipse(cx=x0 * fov_radius, cy=y0 * fov_radius, a=a * fov_radius, b=b * fov_radius,
                angle_deg=phi, value=value)
        for (x0, y0, a, b, phi), value in zip(_SHEPP_LOGAN_SHAPES, _SHEPP_LOGAN_VALUES)
    ]
    return Phantom(ellipses=ellipses, background=-1000.0)


def disk_phantom(fov_radius: float, radius_fraction: float = 0.6, value: float = 1000.0) -> Phantom:
    """Uniform centred cylinder of `value` HU in air"""
    return Phantom(base_disk=BaseDisk(radius=radius_fraction * fov_radius, value=value + 1000.0),
                   background=-1000.0)


def random_tissue_phantom(fov_radius: float, seed: int, pixel_size: float = 1.0,
                          texture_amplitude: float = 8.0) -> Phantom:
    """
    Thigh-like section: fat-wrapped muscle (+40 HU) with one or two bones
    (~+1240 HU, darker marrow), optional air cavities (-1000 HU) and faint
    lesions (+-30..80 HU) on a smooth texture.
    """
    rng = make_rng(seed)
    R = fov_radius

    body_a = rng.uniform(0.75, 0.88) * R
    body_b = rng.uniform(0.60, 0.78) * R
    body_angle = rng.uniform(-20.0, 20.0)
    fat = rng.uniform(0.06, 0.12)

    # Body outline first: texture is confined to it
    ellipses = [
        Ellipse(cx=0.0, cy=0.0, a=body_a, b=body_b, angle_deg=body_angle, value=900.0),
        Ellipse(cx=0.0, cy=0.0, a=body_a * (1 - fat), b=body_b * (1 - fat),
                angle_deg=body_angle, value=140.0),
    ]

    def place(scale: float):
        # Uniform point inside a shrunken copy of the muscle ellipse
        r = np.sqrt(rng.uniform(0.0, 1.0)) * scale
        phi = rng.uniform(0.0, 2 * np.pi)
        u = r * body_a * (1 - fat) * np.cos(phi)
        v = r * body_b * (1 - fat) * np.sin(phi)
        t = np.deg2rad(body_angle)
        return u * np.cos(t) - v * np.sin(t), u * np.sin(t) + v * np.cos(t)

    for _ in range(int(rng.integers(1, 3))):
        cx, cy = place(0.45)
        size = rng.uniform(0.10, 0.17) * R
        aspect = rng.uniform(0.8, 1.0)
        angle = rng.uniform(0.0, 180.0)
        ellipses.append(Ellipse(cx=cx, cy=cy, a=size, b=size * aspect, angle_deg=angle, value=1200.0))
        ellipses.append(Ellipse(cx=cx, cy=cy, a=size * 0.5, b=size * aspect * 0.5,
                                angle_deg=angle, value=-700.0))

    for _ in range(int(rng.integers(0, 3))):
        cx, cy = place(0.7)
        size = rng.uniform(0.03, 0.07) * R
        ellipses.append(Ellipse(cx=cx, cy=cy, a=size, b=size * rng.uniform(0.6, 1.0),
                                angle_deg=rng.uniform(0.0, 180.0), value=-1040.0))

    for _ in range(int(rng.integers(3, 7))):
        cx, cy = place(0.8)
        size = rng.uniform(0.03, 0.09) * R
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        ellipses.append(Ellipse(cx=cx, cy=cy, a=size, b=size * rng.uniform(0.5, 1.0),
                                angle_deg=rng.uniform(0.0, 180.0),
                                value=sign * rng.uniform(30.0, 80.0)))

    texture = None
    if texture_amplitude > 0:
        texture = Texture(amplitude=texture_amplitude, correlation=2.0,
                          seed=int(rng.integers(0, 2 ** 31 - 1)))

    return Phantom(ellipses=ellipses, background=-1000.0, texture=texture)


def write_phantom(phantom: Phantom, path: str) -> None:
    """One ellipse per line: 'cx cy a b angle_deg value' (plus optional keyword lines)"""
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        lines = ["# cx cy a b angle_deg value"]
        if phantom.background != 0.0:
            lines.append(f"background {phantom.background!r}")
        if phantom.base_disk is not None:
            lines.append(f"disk {phantom.base_disk.radius!r} {phantom.base_disk.value!r}")
        if phantom.texture is not None:
            t = phantom.texture
            lines.append(f"texture {t.amplitude!r} {t.correlation!r} {t.seed}")
        for e in phantom.ellipses:
            lines.append(f"{e.cx!r} {e.cy!r} {e.a!r} {e.b!r} {e.angle_deg!r} {e.value!r}")
        Path(path).write_text("\n".join(lines) + "\n")
        logger.info(f"Phantom written: {path} ({len(phantom.ellipses)} ellipses)")
    except Exception as e:
        logger.error(f"Error writing phantom: {e}")
        raise


def read_phantom(path: str) -> Phantom:
    if not Path(path).exists():
        raise FileNotFoundError(f"Phantom file not found: {path}")

    ellipses = []
    fields = {}
    for number, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == 'background' and len(tokens) == 2:
                fields['background'] = float(tokens[1])
            elif tokens[0] == 'disk' and len(tokens) == 3:
                fields['base_disk'] = BaseDisk(radius=float(tokens[1]), value=float(tokens[2]))
            elif tokens[0] == 'texture' and len(tokens) == 4:
                fields['texture'] = Texture(amplitude=float(tokens[1]), correlation=float(tokens[2]),
                                            seed=int(tokens[3]))
            elif len(tokens) == 6:
                cx, cy, a, b, angle, value = (float(t) for t in tokens)
                ellipses.append(Ellipse(cx=cx, cy=cy, a=a, b=b, angle_deg=angle, value=value))
            else:
                raise ValueError(f"expected 6 numbers, got {len(tokens)} tokens")
        except ValueError as e:
            raise FormatParseError(str(e), path=str(path), line=number) from e

    logger.info(f"Phantom loaded: {path} ({len(ellipses)} ellipses)")
    return Phantom(ellipses=ellipses, **fields)
