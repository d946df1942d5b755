"""Image corruptions: kernel oracles, invariances, determinism, parity."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from perturbench import Image, available_backends, corrupt, mask_view, params_for
from perturbench.corrupt import ops
from perturbench.corrupt.ops import gaussian_kernel1d, motion_taps, zoom_factors
from perturbench.corrupt.image import from_float, read_png, to_float, write_png

from factories import image_corpus, ref_conv_rows, ref_gaussian_kernel, ssim

ALL_KINDS = ("motion_blur", "gaussian_blur", "zoom_blur", "fog", "glass_blur")


def random_image(seed, width=32, height=28):
    rng = np.random.default_rng(seed)
    return Image.from_array(rng.integers(0, 256, (height, width, 3), dtype=np.uint8))


def test_gaussian_kernel_normalized():
    for sigma in (0.5, 1.0, 2.7, 5.5, 10.0):
        k = gaussian_kernel1d(sigma)
        assert k.dtype == np.float32
        assert abs(float(k.sum()) - 1.0) < 1e-6
        assert len(k) % 2 == 1
        # symmetric and peaked at the center
        assert np.allclose(k, k[::-1])
        assert k.argmax() == len(k) // 2


def test_gaussian_kernel_matches_reference():
    for sigma in (1.0, 3.25, 7.75):
        k = gaussian_kernel1d(sigma).astype(np.float64)
        r = ref_gaussian_kernel(sigma)
        assert len(k) == len(r)
        assert np.abs(k - r).max() < 1e-7


def test_motion_taps_normalized_and_bounded():
    for radius, sigma, angle in ((5, 2.0, 0.0), (20, 11.0, 30.0), (35, 20.0, -45.0)):
        dy, dx, w = motion_taps(radius, sigma, angle)
        assert abs(float(w.sum()) - 1.0) < 1e-6
        assert np.all(np.abs(dy) <= radius)
        assert np.all(np.abs(dx) <= radius)
        assert np.all(w > 0)


def test_motion_taps_axis_aligned():
    dy, dx, w = motion_taps(8, 4.0, 0.0)
    assert np.all(dy == 0)  # horizontal streak
    dy, dx, w = motion_taps(8, 4.0, 90.0)
    assert np.all(dx == 0)  # vertical streak


def test_zoom_factors_inclusive():
    f = zoom_factors(1.0, 1.11, 0.01)
    assert len(f) == 12
    assert f[0] == 1.0
    assert abs(f[-1] - 1.11) < 1e-9
    assert np.allclose(np.diff(f), 0.01)


def test_sep_blur_impulse_response():
    k = gaussian_kernel1d(2.0)
    r = len(k) // 2
    size = 4 * r + 1
    img = np.zeros((size, size, 3), dtype=np.float32)
    img[size // 2, size // 2, :] = 1.0
    out = ops.kernels.sep_blur_f32(img, k)
    expect = np.outer(k, k).astype(np.float32)
    lo, hi = size // 2 - r, size // 2 + r + 1
    assert np.abs(out[lo:hi, lo:hi, 0] - expect).max() < 1e-6


def test_sep_blur_matches_float64_reference():
    rng = np.random.default_rng(8)
    img = rng.random((20, 24, 3)).astype(np.float32)
    k = gaussian_kernel1d(1.5)
    ref = ref_conv_rows(
        ref_conv_rows(img.astype(np.float64).transpose(1, 0, 2), k.astype(np.float64)).transpose(1, 0, 2),
        k.astype(np.float64),
    )
    out = ops.kernels.sep_blur_f32(img, k)
    assert np.abs(out - ref).max() < 1e-4


def test_constant_image_invariant_under_blurs():
    for value in (0, 128, 255):
        img = Image.filled(24, 20, value)
        for kind in ("motion_blur", "gaussian_blur"):
            for level in (1, 3, 5):
                out = corrupt(img, params_for(kind, level), seed=3)
                assert out.data == img.data, (kind, level, value)


def test_determinism_across_runs():
    img = random_image(1)
    for kind in ALL_KINDS:
        a = corrupt(img, params_for(kind, 3), seed=11)
        b = corrupt(img, params_for(kind, 3), seed=11)
        assert a.data == b.data
        c = corrupt(img, params_for(kind, 3), seed=12)
        if kind in ("motion_blur", "fog", "glass_blur"):  # seeded geometry
            assert c.data != a.data


def test_determinism_across_parallelism():
    img = random_image(2)
    jobs = [(kind, level) for kind in ALL_KINDS for level in (1, 4)]
    serial = [corrupt(img, params_for(k, l), seed=7).data for k, l in jobs]
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(
            pool.map(lambda jl: corrupt(img, params_for(jl[0], jl[1]), seed=7).data, jobs)
        )
    assert serial == parallel


def test_backend_parity_bit_identical():
    backends = available_backends()
    if len(backends) < 2:
        pytest.skip("only one backend importable")
    img = random_image(3)
    results = {}
    for name, module in backends.items():
        saved = ops.kernels
        ops.kernels = module
        try:
            results[name] = [
                corrupt(img, params_for(kind, level), seed=5).data
                for kind in ALL_KINDS
                for level in (1, 3, 5)
            ]
        finally:
            ops.kernels = saved
    names = sorted(results)
    assert results[names[0]] == results[names[1]]


def test_fog_brightens_monotonically():
    img = random_image(4)
    out = corrupt(img, params_for("fog", 3), seed=2)
    a = img.to_array().astype(int)
    b = out.to_array().astype(int)
    assert np.all(b >= a)
    assert b.sum() > a.sum()


def test_glass_changes_but_preserves_shape():
    img = random_image(5, width=40, height=36)
    out = corrupt(img, params_for("glass_blur", 2), seed=9)
    assert (out.width, out.height) == (img.width, img.height)
    assert out.data != img.data


def test_glass_swap_perm_is_permutation():
    rng_offsets = np.random.default_rng(0).integers(-1, 2, (3, 10, 12, 2))
    perm = ops.kernels.glass_swap_perm(12, 14, rng_offsets)
    assert sorted(perm.tolist()) == list(range(12 * 14))


def test_severity_monotone_ssim():
    # acceptance runs the 20-image corpus; a 5-image slice keeps this fast
    corpus = image_corpus(5)
    for kind in ("motion_blur", "gaussian_blur"):
        means = []
        for level in range(1, 6):
            vals = []
            for arr in corpus:
                img = Image.from_array(arr)
                out = corrupt(img, params_for(kind, level), seed=13)
                vals.append(ssim(arr, out.to_array()))
            means.append(sum(vals) / len(vals))
        assert all(means[i + 1] <= means[i] + 1e-9 for i in range(4)), (kind, means)


def test_zoom_blur_blends_toward_center():
    img = random_image(6)
    out = corrupt(img, params_for("zoom_blur", 5), seed=1)
    assert out.data != img.data
    assert (out.width, out.height) == (img.width, img.height)


def test_mask_view():
    views = {"agent": random_image(7), "wrist": random_image(8)}
    out = mask_view(views, ["wrist"])
    assert out["agent"].data == views["agent"].data
    assert out["wrist"].data == bytes(len(views["wrist"].data))
    with pytest.raises(KeyError):
        mask_view(views, ["belly"])


def test_from_float_rounds_half_even_and_clamps():
    arr = np.array([[[2.0, -1.0, 0.5]]], dtype=np.float32)
    img = from_float(arr, 1, 1)
    vals = list(img.data)
    assert vals[0] == 255 and vals[1] == 0
    assert vals[2] == 128  # 0.5*255 = 127.5 rounds half to even


def test_png_round_trip(tmp_path):
    img = random_image(9)
    path = tmp_path / "x.png"
    write_png(img, path)
    again = read_png(path)
    assert again == img


def test_to_float_range():
    img = random_image(10)
    f = to_float(img)
    assert f.dtype == np.float32
    assert float(f.min()) >= 0.0 and float(f.max()) <= 1.0


def test_zero_size_rejected():
    with pytest.raises(Exception):
        corrupt(Image(0, 0, b""), params_for("fog", 1), seed=1)
