"""Sensor-noise corruptions: motion, gaussian, zoom, fog, glass + masking."""

from .backend import available_backends, backend_name
from .image import Image, from_float, read_png, to_float, write_png
from .ops import corrupt, gaussian_kernel1d, mask_view, motion_taps, zoom_factors
from .params import NOISE_KINDS, NoiseParams, params_for

__all__ = [
    "Image",
    "NoiseParams",
    "NOISE_KINDS",
    "available_backends",
    "backend_name",
    "corrupt",
    "from_float",
    "gaussian_kernel1d",
    "mask_view",
    "motion_taps",
    "params_for",
    "read_png",
    "to_float",
    "write_png",
    "zoom_factors",
]
