"""8-bit RGB image value type and the float conversion boundary.

All corruption arithmetic runs in 32-bit float on [0, 1]; images cross that
boundary exactly once in each direction.  The float -> byte conversion
rounds half to even, matching IEEE default rounding, so results do not
depend on platform-specific rounding of .5 cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image as _PILImage

from ..errors import ParameterRangeError

CHANNELS = 3


@dataclass(frozen=True)
class Image:
    width: int
    height: int
    data: bytes  # row-major RGB samples

    def __post_init__(self):
        expected = self.width * self.height * CHANNELS
        if len(self.data) != expected:
            raise ValueError(
                f"data length {len(self.data)} != width*height*3 = {expected}"
            )

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Image":
        arr = np.ascontiguousarray(array, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise ValueError(f"expected HxWx3 array, got shape {arr.shape}")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr.tobytes())

    def to_array(self) -> np.ndarray:
        arr = np.frombuffer(self.data, dtype=np.uint8)
        return arr.reshape(self.height, self.width, CHANNELS)

    @classmethod
    def filled(cls, width: int, height: int, value: int = 0) -> "Image":
        return cls(width, height, bytes([value]) * (width * height * CHANNELS))


def check_nonempty(image: Image) -> None:
    if image.width <= 0 or image.height <= 0:
        raise ParameterRangeError(
            f"zero-sized image ({image.width}x{image.height}) cannot be corrupted"
        )


def to_float(image: Image) -> np.ndarray:
    """Image bytes as float32 on [0, 1]."""
    return image.to_array().astype(np.float32) / np.float32(255.0)


def from_float(array: np.ndarray, width: int, height: int) -> Image:
    """Clamp to [0, 1], scale to [0, 255], round half to even."""
    clipped = np.clip(array, np.float32(0.0), np.float32(1.0))
    scaled = clipped * np.float32(255.0)
    return Image(width, height, np.rint(scaled).astype(np.uint8).tobytes())


def read_png(path) -> Image:
    with _PILImage.open(path) as img:
        return Image.from_array(np.asarray(img.convert("RGB")))


def write_png(image: Image, path) -> None:
    _PILImage.fromarray(image.to_array(), mode="RGB").save(path, format="PNG")
