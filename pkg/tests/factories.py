"""Shared scene builders and reference implementations used across tests.

Everything here is deliberately independent of the library internals: the
reference routines are written from the definitions, not by calling into
the code under test.
"""

from __future__ import annotations

import math

import numpy as np

from perturbench import (
    CameraSpec,
    GoalPredicate,
    LightSpec,
    ObjectPlacement,
    RobotInit,
    SceneSpec,
    TaskSpec,
)
from perturbench.camera import look_at_rotation

HOME_QPOS = (0.0, 0.2, 0.0, -1.9, 0.0, 2.1, 0.78)


def make_camera(position=(1.0, 0.4, 0.7), center=(0.0, 0.0, 0.1), fov=60.0):
    rot = look_at_rotation(position, center)
    return CameraSpec(
        position=tuple(float(v) for v in position),
        rotation=tuple(tuple(float(v) for v in row) for row in rot),
        look_center=tuple(float(v) for v in center),
        fov_deg=fov,
    )


def make_scene(
    scene_id="scene-0",
    suite="spatial",
    instruction="pick up the mug",
    target_pos=(0.08, -0.05, 0.02),
    goal=None,
    extra_objects=(),
    gripper=0.02,
):
    objects = [
        ObjectPlacement("mug-1", "mug", target_pos, (0.0, 0.0, 0.4), is_target=True),
        ObjectPlacement("plate-1", "plate", (-0.15, 0.12, 0.01), (0.0, 0.0, 0.0)),
    ]
    objects.extend(extra_objects)
    if goal is None:
        goal = GoalPredicate("picked_up", ("mug-1",))
    return SceneSpec(
        scene_id=scene_id,
        objects=tuple(objects),
        camera=make_camera(),
        lights=LightSpec(
            diffuse=(0.6, 0.6, 0.55),
            direction=(0.0, 0.0, -1.0),
            specular=0.3,
            shadows=True,
        ),
        textures={"scene-wall": "wall_plain", "work-surface": "table_oak"},
        robot_init=RobotInit(qpos=HOME_QPOS, gripper=gripper),
        task=TaskSpec(instruction=instruction, goal=goal, suite=suite),
    )


def make_on_scene(scene_id="scene-on", gap=0.0):
    """Target resting on the plate: goal on(mug-1, plate-1).

    Geometry matches the registry extents used in tests: plate top sits at
    z = 0.02 (center 0.01, half height 0.01) and the mug's half height is
    0.05, so a mug center at z = 0.07 rests exactly on the plate.
    """
    plate = ObjectPlacement("plate-1", "plate", (0.1, 0.1, 0.01), (0.0, 0.0, 0.0))
    mug = ObjectPlacement(
        "mug-1", "mug", (0.1, 0.1, 0.07 + gap), (0.0, 0.0, 0.0), is_target=True
    )
    return SceneSpec(
        scene_id=scene_id,
        objects=(mug, plate),
        camera=make_camera(),
        lights=LightSpec((0.5, 0.5, 0.5), (0.0, 0.0, -1.0), 0.2, False),
        textures={"scene-wall": "wall_plain", "work-surface": "table_oak"},
        robot_init=RobotInit(qpos=HOME_QPOS, gripper=0.0),
        task=TaskSpec(
            instruction="put the mug on the plate",
            goal=GoalPredicate("on", ("mug-1", "plate-1")),
            suite="goal",
        ),
    )


def random_scene(rng, scene_id="fuzz"):
    """Randomized but always-valid scene for round-trip fuzzing."""
    n_extra = rng.randint(0, 3)
    extras = []
    for i in range(n_extra):
        extras.append(
            ObjectPlacement(
                f"thing-{i}",
                rng.choice(("bowl", "book", "can")),
                (rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.0, 0.1)),
                (0.0, 0.0, rng.uniform(-math.pi, math.pi)),
                is_confounder=bool(rng.randint(0, 1)),
            )
        )
    pos = (rng.uniform(0.6, 1.4), rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.0))
    scene = make_scene(
        scene_id=scene_id,
        suite=rng.choice(("spatial", "object", "goal", "long")),
        target_pos=(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.02),
        extra_objects=extras,
        gripper=rng.uniform(0.0, 0.04),
    )
    cam = make_camera(position=pos, fov=rng.uniform(40.0, 90.0))
    lights = LightSpec(
        diffuse=(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)),
        direction=(0.0, 0.0, -1.0),
        specular=rng.uniform(0, 1),
        shadows=bool(rng.randint(0, 1)),
    )
    import dataclasses

    return dataclasses.replace(scene, camera=cam, lights=lights)


# ---------------------------------------------------------------------------
# Reference numerics


def ref_spherical(position, center):
    """(radius, azimuth, elevation) of position about center, world z up."""
    d = np.asarray(position, float) - np.asarray(center, float)
    r = float(np.linalg.norm(d))
    az = math.atan2(d[1], d[0])
    el = math.asin(d[2] / r)
    return r, az, el


def ref_gaussian_kernel(sigma):
    radius = max(1, int(math.ceil(3.0 * sigma)))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(t * t) / (2.0 * sigma * sigma))
    return k / k.sum()


def ref_conv_rows(img, kernel):
    """Edge-padded 1-D convolution along axis 1, float64."""
    r = len(kernel) // 2
    padded = np.pad(img, ((0, 0), (r, r), (0, 0)), mode="edge")
    out = np.zeros_like(img, dtype=np.float64)
    for t in range(len(kernel)):
        out += kernel[t] * padded[:, t : t + img.shape[1], :]
    return out


def ssim(a, b):
    """Mean structural similarity, 11x11 gaussian window, on uint8 RGB."""
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    win = ref_gaussian_kernel(1.5)
    win = win[len(win) // 2 - 5 : len(win) // 2 + 6]
    win = win / win.sum()

    def filt(x):
        x = ref_conv_rows(x, win)
        x = ref_conv_rows(x.transpose(1, 0, 2), win).transpose(1, 0, 2)
        return x

    x = a.astype(np.float64)
    y = b.astype(np.float64)
    mx, my = filt(x), filt(y)
    sxx = filt(x * x) - mx * mx
    syy = filt(y * y) - my * my
    sxy = filt(x * y) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def image_corpus(n=20, width=48, height=40):
    """Deterministic structured images: gradients plus random rectangles."""
    images = []
    rng = np.random.default_rng(20240817)
    for _ in range(n):
        xs = np.linspace(0, 255, width)
        ys = np.linspace(0, 255, height)
        base = np.add.outer(ys * rng.uniform(0.2, 1.0), xs * rng.uniform(0.2, 1.0)) / 2
        img = np.stack([base, base[::-1], base.T[:width].T], axis=-1)
        for _ in range(4):
            x0 = rng.integers(0, width - 8)
            y0 = rng.integers(0, height - 8)
            img[y0 : y0 + 8, x0 : x0 + 8] = rng.integers(0, 256, 3)
        images.append(np.clip(img, 0, 255).astype(np.uint8))
    return images
