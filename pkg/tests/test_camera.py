"""Camera transforms against independent spherical/rotation oracles."""

import math

import numpy as np
import pytest

from perturbench import (
    CameraSpec,
    DegenerateGeometryError,
    ParameterRangeError,
    apply_camera_perturbation,
    perturb_distance,
    perturb_orientation,
    perturb_sphere,
    sample_camera_perturbation,
)
from perturbench.camera import (
    CAMERA_KINDS,
    DISTANCE_RANGE,
    ORIENTATION_RANGE_DEG,
    SPHERE_CONE_RANGE_DEG,
    look_at_rotation,
    severity_band,
)

from factories import make_camera, ref_spherical


def rot(cam):
    return np.asarray(cam.rotation, dtype=float)


def test_look_at_is_special_orthogonal():
    r = look_at_rotation((1.0, 0.4, 0.7), (0.0, 0.0, 0.1))
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(r) - 1.0) < 1e-12


def test_look_at_aims_at_center():
    pos = np.array([1.0, 0.4, 0.7])
    center = np.array([0.0, 0.0, 0.1])
    r = look_at_rotation(pos, center)
    forward = -r[:, 2]
    expect = (center - pos) / np.linalg.norm(center - pos)
    assert np.allclose(forward, expect, atol=1e-12)


def test_look_at_degenerate():
    with pytest.raises(DegenerateGeometryError):
        look_at_rotation((0.0, 0.0, 0.1), (0.0, 0.0, 0.1))
    with pytest.raises(DegenerateGeometryError):
        look_at_rotation((0.0, 0.0, 1.0), (0.0, 0.0, 0.0))  # parallel to up


def test_distance_scales_radius():
    cam = make_camera()
    r0, az0, el0 = ref_spherical(cam.position, cam.look_center)
    out = perturb_distance(cam, 1.5)
    r1, az1, el1 = ref_spherical(out.position, out.look_center)
    assert abs(r1 - 1.5 * r0) < 1e-12
    assert abs(az1 - az0) < 1e-12 and abs(el1 - el0) < 1e-12
    assert out.rotation == cam.rotation
    assert out.look_center == cam.look_center


def test_distance_range_enforced():
    cam = make_camera()
    for bad in (0.5, 1.0, 2.5):
        with pytest.raises(ParameterRangeError):
            perturb_distance(cam, bad)
    perturb_distance(cam, 1.01)
    perturb_distance(cam, 2.0)


def test_sphere_oracle():
    cam = make_camera()
    r0, az0, el0 = ref_spherical(cam.position, cam.look_center)
    out = perturb_sphere(cam, 25.0, -10.0)
    r1, az1, el1 = ref_spherical(out.position, out.look_center)
    assert abs(r1 - r0) < 1e-9
    assert abs(az1 - (az0 + math.radians(25.0))) < 1e-9
    assert abs(el1 - (el0 + math.radians(-10.0))) < 1e-9
    # re-aimed at the center
    f = -rot(out)[:, 2]
    d = np.asarray(cam.look_center) - np.asarray(out.position)
    assert np.allclose(f, d / np.linalg.norm(d), atol=1e-9)


def test_sphere_identity_exact():
    cam = make_camera()
    assert perturb_sphere(cam, 0.0, 0.0) == cam


def test_sphere_elevation_bound():
    cam = make_camera()
    with pytest.raises(DegenerateGeometryError):
        perturb_sphere(cam, 0.0, 80.0)


def test_orientation_closed_form():
    cam = make_camera()
    out = perturb_orientation(cam, 5.0, 0.0, 0.0)
    a = math.radians(5.0)
    rz = np.array(
        [
            [math.cos(a), -math.sin(a), 0.0],
            [math.sin(a), math.cos(a), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    assert np.allclose(rot(out), rz @ rot(cam), atol=1e-12)
    assert out.position == cam.position


def test_orientation_identity_exact():
    cam = make_camera()
    assert perturb_orientation(cam, 0.0, 0.0, 0.0) == cam


def test_orientation_magnitude_range():
    cam = make_camera()
    with pytest.raises(ParameterRangeError):
        perturb_orientation(cam, 1.0, 0.0, 0.0)  # below 2 deg
    with pytest.raises(ParameterRangeError):
        perturb_orientation(cam, 0.0, 12.0, 0.0)  # above 10 deg
    perturb_orientation(cam, -10.0, 0.0, 0.0)
    perturb_orientation(cam, 0.0, 2.0, -2.0)


def test_orientation_preserves_orthonormality():
    cam = make_camera()
    out = perturb_orientation(cam, 7.5, -3.0, 2.5)
    r = rot(out)
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(r) - 1.0) < 1e-12


def test_severity_band_equal_widths():
    lo, hi = 1.01, 2.00
    width = (hi - lo) / 5.0
    for level in range(1, 6):
        b = severity_band((lo, hi), level)
        assert abs(b[0] - (lo + (level - 1) * width)) < 1e-12
        assert abs(b[1] - (lo + level * width)) < 1e-12
    assert severity_band((lo, hi), 5)[1] == hi
    assert severity_band((lo, hi), 1)[0] == lo


def test_severity_band_level_range():
    for bad in (0, 6):
        with pytest.raises(ParameterRangeError):
            severity_band((0.0, 1.0), bad)


def test_sampling_respects_bands():
    for level in range(1, 6):
        d_band = severity_band(DISTANCE_RANGE, level)
        s_band = severity_band(SPHERE_CONE_RANGE_DEG, level)
        o_band = severity_band(ORIENTATION_RANGE_DEG, level)
        for seed in range(300):
            p = sample_camera_perturbation(level, seed)
            if p.kind == "distance":
                assert d_band[0] <= p.distance_factor <= d_band[1]
            elif p.kind == "sphere":
                mag = math.hypot(p.delta_azimuth_deg, p.delta_elevation_deg)
                assert s_band[0] <= mag <= s_band[1] + 1e-12
            else:
                for ang in (p.yaw_deg, p.pitch_deg, p.roll_deg):
                    assert ang == 0.0 or o_band[0] <= abs(ang) <= o_band[1] + 1e-12


def test_sampling_kind_forcing_is_numerically_neutral():
    # forcing a kind must not consume extra draws and change the numbers
    for seed in (3, 17, 123):
        free = sample_camera_perturbation(2, seed)
        forced = sample_camera_perturbation(2, seed, kind=free.kind)
        assert forced == free
    kinds = {sample_camera_perturbation(3, s).kind for s in range(60)}
    assert kinds == set(CAMERA_KINDS)


def test_sampling_deterministic():
    a = sample_camera_perturbation(4, 99)
    b = sample_camera_perturbation(4, 99)
    assert a == b


def test_apply_dispatch():
    # zero-elevation start: every sampled sphere move stays inside (-90, 90)
    cam = make_camera(position=(1.2, 0.5, 0.1), center=(0.0, 0.0, 0.1))
    for seed in range(30):
        p = sample_camera_perturbation(3, seed)
        out = apply_camera_perturbation(cam, p)
        r = rot(out)
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-9)
        assert abs(np.linalg.det(r) - 1.0) < 1e-9
        if p.kind == "sphere":
            r0 = ref_spherical(cam.position, cam.look_center)[0]
            r1 = ref_spherical(out.position, out.look_center)[0]
            assert abs(r0 - r1) < 1e-9


def test_orthonormality_sweep():
    # 1000 here; the acceptance suite runs the full 10^4
    cam = make_camera(position=(1.2, 0.5, 0.1), center=(0.0, 0.0, 0.1))
    for seed in range(1000):
        level = 1 + seed % 5
        out = apply_camera_perturbation(
            cam, sample_camera_perturbation(level, seed)
        )
        r = rot(out)
        assert np.abs(r.T @ r - np.eye(3)).max() < 1e-9
        assert abs(np.linalg.det(r) - 1.0) < 1e-9
