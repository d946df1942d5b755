"""Reference corruption kernels (NumPy).

The compiled extension (`_kernels.pyx`) implements the same four entry
points.  Outputs must be bit-identical between the two, which pins down the
arithmetic completely:

* accumulation happens in float32, tap by tap, in the documented order
  (kernel index order for blurs, factor order for zoom);
* bilinear weights are computed in float64 and each sample is rounded to
  float32 exactly once, when added to the accumulator;
* borders replicate the edge pixel (clamp indexing);
* the glass-blur swap pass is pure integer work on index maps.

The extension is compiled with contraction disabled so it cannot fuse the
multiply-adds that these semantics split.
"""

from __future__ import annotations

import numpy as np

NAME = "reference"


def sep_blur_f32(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable 2-D convolution: rows then columns, replicate borders.

    ``img`` is float32 (H, W, C); ``kernel`` is float32, odd length.
    """
    radius = kernel.shape[0] // 2
    out = img
    for axis in (0, 1):
        pad = [(0, 0)] * out.ndim
        pad[axis] = (radius, radius)
        padded = np.pad(out, pad, mode="edge")
        acc = np.zeros_like(out)
        for t in range(kernel.shape[0]):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(t, t + out.shape[axis])
            acc += kernel[t] * padded[tuple(sl)]
        out = acc
    return out


def sparse_blur_f32(
    img: np.ndarray, taps_dy: np.ndarray, taps_dx: np.ndarray, taps_w: np.ndarray
) -> np.ndarray:
    """2-D convolution given as a sparse tap list, replicate borders."""
    h, w = img.shape[0], img.shape[1]
    ry = int(np.max(np.abs(taps_dy))) if taps_dy.size else 0
    rx = int(np.max(np.abs(taps_dx))) if taps_dx.size else 0
    padded = np.pad(img, ((ry, ry), (rx, rx), (0, 0)), mode="edge")
    acc = np.zeros_like(img)
    for dy, dx, weight in zip(taps_dy, taps_dx, taps_w):
        acc += weight * padded[ry + dy : ry + dy + h, rx + dx : rx + dx + w]
    return acc


def zoom_mean_f32(img: np.ndarray, factors: np.ndarray) -> np.ndarray:
    """Mean of center-anchored bilinear rescalings at the given factors."""
    h, w = img.shape[0], img.shape[1]
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    ys = np.arange(h, dtype=np.float64)
    xs = np.arange(w, dtype=np.float64)
    acc = np.zeros_like(img)
    for s in factors:
        sy = cy + (ys - cy) / s
        sx = cx + (xs - cx) / s
        y0 = np.floor(sy)
        x0 = np.floor(sx)
        fy = (sy - y0)[:, None, None]
        fx = (sx - x0)[None, :, None]
        y0i = np.clip(y0.astype(np.int64), 0, h - 1)
        y1i = np.clip(y0i + 1, 0, h - 1)
        x0i = np.clip(x0.astype(np.int64), 0, w - 1)
        x1i = np.clip(x0i + 1, 0, w - 1)
        top = (1.0 - fx) * img[y0i][:, x0i] + fx * img[y0i][:, x1i]
        bottom = (1.0 - fx) * img[y1i][:, x0i] + fx * img[y1i][:, x1i]
        sample = (1.0 - fy) * top + fy * bottom
        acc += sample.astype(np.float32)
    return acc / np.float32(len(factors))


def glass_swap_perm(height: int, width: int, offsets: np.ndarray) -> np.ndarray:
    """Pixel permutation produced by the glass-blur swap passes.

    ``offsets`` has shape (iterations, rows, cols, 2) holding (dy, dx) in
    [-delta, delta]; the swapped region spans rows [delta, height-delta)
    and columns [delta, width-delta), scanned in row-major order per
    iteration.  Returns a flat int64 array ``perm`` of length
    height*width: output pixel k takes its value from input pixel
    ``perm[k]``.  Swaps are genuinely sequential (later swaps see earlier
    moves), which is what makes the distortion accumulate.
    """
    iterations, rows, cols = offsets.shape[0], offsets.shape[1], offsets.shape[2]
    delta_y = (height - rows) // 2
    delta_x = (width - cols) // 2
    perm = list(range(height * width))
    flat = offsets.reshape(-1).tolist()
    idx = 0
    for _ in range(iterations):
        for r in range(rows):
            base = (delta_y + r) * width
            for c in range(cols):
                dy = flat[idx]
                dx = flat[idx + 1]
                idx += 2
                a = base + delta_x + c
                b = a + dy * width + dx
                perm[a], perm[b] = perm[b], perm[a]
    return np.asarray(perm, dtype=np.int64)
