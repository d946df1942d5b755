# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled corruption kernels, bit-identical to `_kernels_py`.

Accumulation stays in float32 tap by tap; bilinear samples are computed in
double and rounded to float32 once when added.  Built with
-ffp-contract=off so the compiler cannot fuse these multiply-adds into FMAs
(which would round differently from the reference).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

NAME = "compiled"


cdef inline Py_ssize_t _clamp(Py_ssize_t v, Py_ssize_t lo, Py_ssize_t hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def sep_blur_f32(float[:, :, ::1] img, float[::1] kernel):
    """Separable 2-D convolution: rows then columns, replicate borders."""
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t ch = img.shape[2]
    cdef Py_ssize_t length = kernel.shape[0]
    cdef Py_ssize_t radius = length // 2
    cdef Py_ssize_t i, j, c, t, src
    cdef float acc

    mid_arr = np.empty((h, w, ch), dtype=np.float32)
    out_arr = np.empty((h, w, ch), dtype=np.float32)
    cdef float[:, :, ::1] mid = mid_arr
    cdef float[:, :, ::1] out = out_arr

    with nogil:
        # vertical pass (axis 0)
        for i in range(h):
            for j in range(w):
                for c in range(ch):
                    acc = 0.0
                    for t in range(length):
                        src = _clamp(i + t - radius, 0, h - 1)
                        acc = acc + kernel[t] * img[src, j, c]
                    mid[i, j, c] = acc
        # horizontal pass (axis 1)
        for i in range(h):
            for j in range(w):
                for c in range(ch):
                    acc = 0.0
                    for t in range(length):
                        src = _clamp(j + t - radius, 0, w - 1)
                        acc = acc + kernel[t] * mid[i, src, c]
                    out[i, j, c] = acc
    return out_arr


def sparse_blur_f32(
    float[:, :, ::1] img,
    cnp.int64_t[::1] taps_dy,
    cnp.int64_t[::1] taps_dx,
    float[::1] taps_w,
):
    """2-D convolution given as a sparse tap list, replicate borders."""
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t ch = img.shape[2]
    cdef Py_ssize_t n_taps = taps_w.shape[0]
    cdef Py_ssize_t i, j, c, t, sy, sx
    cdef float weight

    out_arr = np.zeros((h, w, ch), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr

    with nogil:
        for t in range(n_taps):
            weight = taps_w[t]
            for i in range(h):
                sy = _clamp(i + taps_dy[t], 0, h - 1)
                for j in range(w):
                    sx = _clamp(j + taps_dx[t], 0, w - 1)
                    for c in range(ch):
                        out[i, j, c] = out[i, j, c] + weight * img[sy, sx, c]
    return out_arr


def zoom_mean_f32(float[:, :, ::1] img, double[::1] factors):
    """Mean of center-anchored bilinear rescalings at the given factors."""
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t ch = img.shape[2]
    cdef Py_ssize_t n = factors.shape[0]
    cdef Py_ssize_t k, i, j, c, y0i, y1i, x0i, x1i
    cdef double cy = (h - 1) / 2.0
    cdef double cx = (w - 1) / 2.0
    cdef double s, sy, sx, fy, fx, top, bottom, sample
    cdef float count = <float> n

    out_arr = np.zeros((h, w, ch), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr

    with nogil:
        for k in range(n):
            s = factors[k]
            for i in range(h):
                sy = cy + (i - cy) / s
                fy = sy - floor(sy)
                y0i = _clamp(<Py_ssize_t> floor(sy), 0, h - 1)
                y1i = _clamp(y0i + 1, 0, h - 1)
                for j in range(w):
                    sx = cx + (j - cx) / s
                    fx = sx - floor(sx)
                    x0i = _clamp(<Py_ssize_t> floor(sx), 0, w - 1)
                    x1i = _clamp(x0i + 1, 0, w - 1)
                    for c in range(ch):
                        top = (1.0 - fx) * img[y0i, x0i, c] + fx * img[y0i, x1i, c]
                        bottom = (1.0 - fx) * img[y1i, x0i, c] + fx * img[y1i, x1i, c]
                        sample = (1.0 - fy) * top + fy * bottom
                        out[i, j, c] = out[i, j, c] + <float> sample
        for i in range(h):
            for j in range(w):
                for c in range(ch):
                    out[i, j, c] = out[i, j, c] / count
    return out_arr


def glass_swap_perm(Py_ssize_t height, Py_ssize_t width, cnp.int64_t[:, :, :, ::1] offsets):
    """Pixel permutation produced by the glass-blur swap passes."""
    cdef Py_ssize_t iterations = offsets.shape[0]
    cdef Py_ssize_t rows = offsets.shape[1]
    cdef Py_ssize_t cols = offsets.shape[2]
    cdef Py_ssize_t delta_y = (height - rows) // 2
    cdef Py_ssize_t delta_x = (width - cols) // 2
    cdef Py_ssize_t it, r, c, a, b, base
    cdef cnp.int64_t tmp

    perm_arr = np.arange(height * width, dtype=np.int64)
    cdef cnp.int64_t[::1] perm = perm_arr

    with nogil:
        for it in range(iterations):
            for r in range(rows):
                base = (delta_y + r) * width
                for c in range(cols):
                    a = base + delta_x + c
                    b = a + offsets[it, r, c, 0] * width + offsets[it, r, c, 1]
                    tmp = perm[a]
                    perm[a] = perm[b]
                    perm[b] = tmp
    return perm_arr
