"""The five sensor corruptions and the view-masking ablation.

Each corruption is a pure function of (image bytes, params, seed): the seed
feeds the package's counter-based generator, never global state, so batch
runs can parallelize freely without changing results.

Kernel/permutation construction happens here in shared code; only the four
hot loops live in the selected backend (:mod:`perturbench.corrupt.backend`).
Fog is elementwise NumPy and needs no compiled twin.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from ..errors import ParameterRangeError
from ..rng import Rng, derive_seed
from .backend import kernels
from .image import Image, check_nonempty, from_float, to_float
from .params import NoiseParams
from .plasma import next_power_of_two, plasma_fractal

MOTION_ANGLE_RANGE_DEG = (-45.0, 45.0)
FOG_BRIGHTNESS = 1.0  # white haze; keeps fog output >= input per channel
GAUSSIAN_SUPPORT_SIGMAS = 3.0


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalized 1-D gaussian taps with 3-sigma support, as float32."""
    if sigma <= 0:
        raise ParameterRangeError(f"sigma must be positive, got {sigma}")
    radius = max(1, int(math.ceil(GAUSSIAN_SUPPORT_SIGMAS * sigma)))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(t * t) / (2.0 * sigma * sigma))
    weights /= weights.sum()
    return weights.astype(np.float32)


def motion_taps(radius: int, sigma: float, angle_deg: float):
    """Sparse 2-D kernel: a 1-D gaussian rasterized along a rotated ray.

    Sample i of the 1-D kernel sits at signed offset t = i - radius along
    the direction (cos, sin) of the angle and is splatted bilinearly onto
    the (2r+1)^2 grid.  Returns (dy, dx, weight) arrays of the nonzero
    taps in row-major grid order, weights normalized to sum 1.
    """
    if radius < 1:
        raise ParameterRangeError(f"radius must be >= 1, got {radius}")
    size = 2 * radius + 1
    grid = np.zeros((size, size), dtype=np.float64)
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    for i in range(size):
        t = i - radius
        weight = math.exp(-(t * t) / (2.0 * sigma * sigma))
        x = radius + t * cos_t
        y = radius + t * sin_t
        x0, y0 = math.floor(x), math.floor(y)
        fx, fy = x - x0, y - y0
        for dy, dx, frac in (
            (0, 0, (1 - fy) * (1 - fx)),
            (0, 1, (1 - fy) * fx),
            (1, 0, fy * (1 - fx)),
            (1, 1, fy * fx),
        ):
            yy, xx = y0 + dy, x0 + dx
            # the 1e-12 floor drops float dust (cos(90 deg) != 0 exactly)
            # so axis-aligned streaks stay exactly axis aligned
            if 0 <= yy < size and 0 <= xx < size and frac > 1e-12:
                grid[yy, xx] += weight * frac
    grid /= grid.sum()
    taps = grid.astype(np.float32)
    ys, xs = np.nonzero(taps)
    return (
        (ys - radius).astype(np.int64),
        (xs - radius).astype(np.int64),
        taps[ys, xs],
    )


def zoom_factors(s_min: float, s_max: float, step: float) -> np.ndarray:
    """s_min, s_min+step, ... up to and including s_max (within float fuzz)."""
    if step <= 0 or s_max < s_min:
        raise ParameterRangeError(f"bad zoom schedule ({s_min}, {s_max}, {step})")
    count = int(math.floor((s_max - s_min) / step + 1e-9)) + 1
    return s_min + step * np.arange(count, dtype=np.float64)


def _corrupt_motion(x: np.ndarray, params: NoiseParams, rng: Rng) -> np.ndarray:
    angle = rng.uniform(*MOTION_ANGLE_RANGE_DEG)
    dy, dx, w = motion_taps(int(params["radius"]), params["sigma"], angle)
    return kernels.sparse_blur_f32(x, dy, dx, w)


def _corrupt_gaussian(x: np.ndarray, params: NoiseParams, rng: Rng) -> np.ndarray:
    return kernels.sep_blur_f32(x, gaussian_kernel1d(params["sigma"]))


def _corrupt_zoom(x: np.ndarray, params: NoiseParams, rng: Rng) -> np.ndarray:
    factors = zoom_factors(params["s_min"], params["s_max"], params["step"])
    return kernels.zoom_mean_f32(x, factors)


def _corrupt_fog(x: np.ndarray, params: NoiseParams, rng: Rng) -> np.ndarray:
    h, w = x.shape[0], x.shape[1]
    mapsize = next_power_of_two(max(h, w))
    field = plasma_fractal(mapsize, params["beta"], rng)[:h, :w]
    t = np.clip(np.float32(params["alpha"]) * field, np.float32(0.0), np.float32(1.0))
    t = t[:, :, None]
    return x + t * (np.float32(FOG_BRIGHTNESS) - x)


def _corrupt_glass(x: np.ndarray, params: NoiseParams, rng: Rng) -> np.ndarray:
    h, w = x.shape[0], x.shape[1]
    delta = int(params["delta"])
    iterations = int(params["iterations"])
    rows = max(0, h - 2 * delta)
    cols = max(0, w - 2 * delta)
    n_offsets = iterations * rows * cols * 2
    offsets = rng.bulk_randint(-delta, delta, n_offsets).reshape(
        iterations, rows, cols, 2
    )
    perm = kernels.glass_swap_perm(h, w, offsets)
    swapped = np.ascontiguousarray(x.reshape(h * w, 3)[perm].reshape(h, w, 3))
    return kernels.sep_blur_f32(swapped, gaussian_kernel1d(params["sigma"]))


_CORRUPTIONS = {
    "motion_blur": _corrupt_motion,
    "gaussian_blur": _corrupt_gaussian,
    "zoom_blur": _corrupt_zoom,
    "fog": _corrupt_fog,
    "glass_blur": _corrupt_glass,
}


def corrupt(image: Image, params: NoiseParams, seed: int) -> Image:
    """Apply one corruption; dimensions preserved, samples stay 8-bit."""
    check_nonempty(image)
    try:
        transform = _CORRUPTIONS[params.kind]
    except KeyError:
        raise ParameterRangeError(f"unknown corruption kind {params.kind!r}") from None
    rng = Rng(derive_seed(seed, "corrupt", params.kind, params.level))
    result = transform(to_float(image), params, rng)
    return from_float(result, image.width, image.height)


def mask_view(
    observations: Mapping[str, Image], views_to_black: Iterable[str]
) -> dict[str, Image]:
    """Replace the named views with all-black frames of the same size."""
    views_to_black = set(views_to_black)
    for name in views_to_black:
        if name not in observations:
            raise KeyError(f"unknown view {name!r}")
    out: dict[str, Image] = {}
    for name, img in observations.items():
        if name in views_to_black:
            out[name] = Image.filled(img.width, img.height, 0)
        else:
            out[name] = img
    return out
