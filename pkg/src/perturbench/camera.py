"""Camera perturbations: distance scaling, sphere moves, orientation offsets.

Frame conventions, fixed once and documented so adapters can remap:

* world up axis is +z;
* a camera rotation matrix has columns (right, up, backward) in world
  coordinates, so the optical axis points along minus the third column
  (a (right, up, toward-target) triple would be left-handed and could not
  satisfy det R = 1);
* Euler offsets (yaw, pitch, roll) compose intrinsically as Rz Ry Rx and
  pre-multiply the current rotation, i.e. they rotate the camera in the
  world frame;
* azimuth is measured in the xy-plane from +x, elevation from the
  horizontal plane toward +z.

Severity levels partition each parameter range into five equal-width bands:
distance factor over [1.01, 2.00], total sphere offset over [15, 75]
degrees, per-axis orientation offset over [2, 10] degrees.  Sampling within
a band is uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, ParameterRangeError
from .rng import Rng, derive_seed
from .scene import CameraSpec

DISTANCE_RANGE = (1.01, 2.00)
SPHERE_CONE_RANGE_DEG = (15.0, 75.0)
ORIENTATION_RANGE_DEG = (2.0, 10.0)

CAMERA_KINDS = ("distance", "sphere", "orientation")

WORLD_UP = np.array([0.0, 0.0, 1.0])


def severity_band(full_range: tuple[float, float], level: int) -> tuple[float, float]:
    """The level-th of five equal-width sub-intervals of ``full_range``."""
    if not 1 <= level <= 5:
        raise ParameterRangeError(f"severity level {level} outside 1..5")
    lo, hi = full_range
    width = (hi - lo) / 5.0
    return (lo + (level - 1) * width, lo + level * width)


# ---------------------------------------------------------------------------
# Rotation helpers


def euler_zyx_matrix(yaw_rad: float, pitch_rad: float, roll_rad: float) -> np.ndarray:
    cy, sy = math.cos(yaw_rad), math.sin(yaw_rad)
    cp, sp = math.cos(pitch_rad), math.sin(pitch_rad)
    cr, sr = math.cos(roll_rad), math.sin(roll_rad)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return rz @ ry @ rx


def look_at_rotation(position, center) -> np.ndarray:
    """Rotation whose optical axis points from ``position`` at ``center``."""
    position = np.asarray(position, dtype=float)
    center = np.asarray(center, dtype=float)
    back = position - center
    norm = np.linalg.norm(back)
    if norm < 1e-12:
        raise DegenerateGeometryError("camera position coincides with look_center")
    back = back / norm
    right = np.cross(WORLD_UP, back)
    rnorm = np.linalg.norm(right)
    if rnorm < 1e-12:
        raise DegenerateGeometryError("optical axis parallel to the world up axis")
    right = right / rnorm
    up = np.cross(back, right)
    return np.stack([right, up, back], axis=1)


def forward_axis(camera: CameraSpec) -> np.ndarray:
    r = np.asarray(camera.rotation, dtype=float)
    return -r[:, 2]


def _mat_tuple(m: np.ndarray):
    return tuple(tuple(float(v) for v in row) for row in m)


# ---------------------------------------------------------------------------
# The three transforms


def perturb_distance(camera: CameraSpec, factor: float) -> CameraSpec:
    """Slide the camera along its optical axis away from look_center."""
    lo, hi = DISTANCE_RANGE
    if not lo <= factor <= hi:
        raise ParameterRangeError(f"distance factor {factor} outside [{lo}, {hi}]")
    p = np.asarray(camera.position, dtype=float)
    c = np.asarray(camera.look_center, dtype=float)
    new_pos = c + factor * (p - c)
    return CameraSpec(
        position=tuple(float(v) for v in new_pos),
        rotation=camera.rotation,
        look_center=camera.look_center,
        fov_deg=camera.fov_deg,
    )


def perturb_sphere(
    camera: CameraSpec, delta_azimuth_deg: float, delta_elevation_deg: float
) -> CameraSpec:
    """Move on the view sphere around look_center; re-aim at the center."""
    if delta_azimuth_deg == 0.0 and delta_elevation_deg == 0.0:
        return camera
    p = np.asarray(camera.position, dtype=float)
    c = np.asarray(camera.look_center, dtype=float)
    d = p - c
    radius = float(np.linalg.norm(d))
    if radius < 1e-12:
        raise DegenerateGeometryError("camera position coincides with look_center")
    azimuth = math.atan2(d[1], d[0])
    elevation = math.asin(max(-1.0, min(1.0, d[2] / radius)))
    azimuth += math.radians(delta_azimuth_deg)
    elevation += math.radians(delta_elevation_deg)
    if not -math.pi / 2 < elevation < math.pi / 2:
        raise DegenerateGeometryError(
            f"elevation {math.degrees(elevation):.2f} deg leaves (-90, 90)"
        )
    unit = np.array(
        [
            math.cos(elevation) * math.cos(azimuth),
            math.cos(elevation) * math.sin(azimuth),
            math.sin(elevation),
        ]
    )
    new_pos = c + radius * unit
    rotation = look_at_rotation(new_pos, c)
    return CameraSpec(
        position=tuple(float(v) for v in new_pos),
        rotation=_mat_tuple(rotation),
        look_center=camera.look_center,
        fov_deg=camera.fov_deg,
    )


def perturb_orientation(
    camera: CameraSpec, yaw_deg: float, pitch_deg: float, roll_deg: float
) -> CameraSpec:
    """Tilt the camera in place by Euler offsets (position fixed)."""
    lo, hi = ORIENTATION_RANGE_DEG
    for name, angle in (("yaw", yaw_deg), ("pitch", pitch_deg), ("roll", roll_deg)):
        # A zero offset means the axis is unperturbed; nonzero offsets must
        # lie in the documented magnitude range.
        if angle != 0.0 and not lo <= abs(angle) <= hi:
            raise ParameterRangeError(
                f"{name} offset {angle} deg outside +/-[{lo}, {hi}]"
            )
    offset = euler_zyx_matrix(
        math.radians(yaw_deg), math.radians(pitch_deg), math.radians(roll_deg)
    )
    rotation = offset @ np.asarray(camera.rotation, dtype=float)
    return CameraSpec(
        position=camera.position,
        rotation=_mat_tuple(rotation),
        look_center=camera.look_center,
        fov_deg=camera.fov_deg,
    )


# ---------------------------------------------------------------------------
# Severity-banded sampling


@dataclass(frozen=True)
class CameraPerturbParams:
    """One sampled camera perturbation.

    All numeric fields are always populated (deterministically from the
    seed); ``kind`` selects which of them ``apply_camera_perturbation``
    uses.  ``cone_min_deg``/``cone_max_deg`` record the sphere band the
    offsets were drawn from.
    """

    kind: str
    level: int
    distance_factor: float
    delta_azimuth_deg: float
    delta_elevation_deg: float
    yaw_deg: float
    pitch_deg: float
    roll_deg: float
    cone_min_deg: float
    cone_max_deg: float

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "distance_factor": self.distance_factor,
            "delta_azimuth_deg": self.delta_azimuth_deg,
            "delta_elevation_deg": self.delta_elevation_deg,
            "yaw_deg": self.yaw_deg,
            "pitch_deg": self.pitch_deg,
            "roll_deg": self.roll_deg,
            "cone_min_deg": self.cone_min_deg,
            "cone_max_deg": self.cone_max_deg,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "CameraPerturbParams":
        return cls(**doc)


def sample_camera_perturbation(
    level: int, seed: int, kind: str | None = None
) -> CameraPerturbParams:
    """Draw banded perturbation parameters for the given severity level.

    The numeric fields do not depend on ``kind``: forcing a kind yields the
    same offsets as sampling one (the kind draw comes last in the stream).
    """
    rng = Rng(derive_seed(seed, "camera", level))

    d_lo, d_hi = severity_band(DISTANCE_RANGE, level)
    factor = rng.uniform(d_lo, d_hi)

    s_lo, s_hi = severity_band(SPHERE_CONE_RANGE_DEG, level)
    magnitude = rng.uniform(s_lo, s_hi)
    heading = rng.uniform(0.0, 2.0 * math.pi)
    delta_az = magnitude * math.cos(heading)
    delta_el = magnitude * math.sin(heading)

    o_lo, o_hi = severity_band(ORIENTATION_RANGE_DEG, level)
    yaw = rng.uniform(o_lo, o_hi) * rng.sign()
    pitch = rng.uniform(o_lo, o_hi) * rng.sign()
    roll = rng.uniform(o_lo, o_hi) * rng.sign()

    if kind is None:
        kind = rng.choice(CAMERA_KINDS)
    elif kind not in CAMERA_KINDS:
        raise ParameterRangeError(f"unknown camera perturbation kind {kind!r}")

    return CameraPerturbParams(
        kind=kind,
        level=level,
        distance_factor=factor,
        delta_azimuth_deg=delta_az,
        delta_elevation_deg=delta_el,
        yaw_deg=yaw,
        pitch_deg=pitch,
        roll_deg=roll,
        cone_min_deg=s_lo,
        cone_max_deg=s_hi,
    )


def apply_camera_perturbation(camera: CameraSpec, params: CameraPerturbParams) -> CameraSpec:
    if params.kind == "distance":
        return perturb_distance(camera, params.distance_factor)
    if params.kind == "sphere":
        return perturb_sphere(camera, params.delta_azimuth_deg, params.delta_elevation_deg)
    if params.kind == "orientation":
        return perturb_orientation(camera, params.yaw_deg, params.pitch_deg, params.roll_deg)
    raise ParameterRangeError(f"unknown camera perturbation kind {params.kind!r}")
