"""Declarative scene description: placements, camera, light, robot, task.

Values are immutable after construction (frozen dataclasses over tuples) so
they can be shared freely across threads.  ``to_tree``/``from_tree`` map a
scene onto the plain-data tree used by the canonical text format
(:mod:`perturbench.canonical`) and by the patch algebra
(:mod:`perturbench.patch`).

Conventions fixed here because upstream descriptions leave them open:

* rotations are 3x3 matrices; helpers build them from yaw-pitch-roll via
  intrinsic Z-Y-X composition (see :mod:`perturbench.geometry`);
* the goal language is the closed predicate set ``on, in, next_to,
  picked_up, open, closed, turned_on`` with fixed arities -- a documented
  subset, not a full task-description grammar;
* the world up axis is +z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

from . import canonical

Vec3 = tuple[float, float, float]
Mat3 = tuple[Vec3, Vec3, Vec3]

SUITES = ("spatial", "object", "goal", "long")
TEXTURE_ROLES = ("scene-wall", "work-surface")

#: predicate name -> number of object-id arguments
PREDICATE_ARITY: Mapping[str, int] = {
    "on": 2,
    "in": 2,
    "next_to": 2,
    "picked_up": 1,
    "open": 1,
    "closed": 1,
    "turned_on": 1,
}

SCENE_FILE_SUFFIX = ".scene"


def _vec(value, n: int, what: str) -> tuple[float, ...]:
    items = tuple(float(v) for v in value)
    if len(items) != n:
        raise ValueError(f"{what} must have {n} components, got {len(items)}")
    return items


def _mat3(value) -> Mat3:
    rows = tuple(_vec(row, 3, "rotation row") for row in value)
    if len(rows) != 3:
        raise ValueError(f"rotation must have 3 rows, got {len(rows)}")
    return rows  # type: ignore[return-value]


@dataclass(frozen=True)
class GoalPredicate:
    """One goal atom: predicate name plus object-id arguments."""

    name: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(str(a) for a in self.args))

    @property
    def text(self) -> str:
        return f"{self.name}({', '.join(self.args)})"

    @classmethod
    def parse(cls, text: str) -> "GoalPredicate":
        head, _, rest = text.partition("(")
        if not rest.endswith(")"):
            raise ValueError(f"malformed goal expression {text!r}")
        args = [a.strip() for a in rest[:-1].split(",") if a.strip()]
        return cls(head.strip(), tuple(args))


@dataclass(frozen=True)
class ObjectPlacement:
    object_id: str
    category: str
    position: Vec3
    orientation: Vec3  # roll, pitch, yaw in radians
    is_target: bool = False
    is_confounder: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position, 3, "position"))
        object.__setattr__(self, "orientation", _vec(self.orientation, 3, "orientation"))


@dataclass(frozen=True)
class CameraSpec:
    position: Vec3
    rotation: Mat3  # columns are the camera right/up/back axes in world frame
    look_center: Vec3
    fov_deg: float

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position, 3, "camera position"))
        object.__setattr__(self, "rotation", _mat3(self.rotation))
        object.__setattr__(self, "look_center", _vec(self.look_center, 3, "look_center"))
        object.__setattr__(self, "fov_deg", float(self.fov_deg))


@dataclass(frozen=True)
class LightSpec:
    diffuse: Vec3
    direction: Vec3
    specular: float
    shadows: bool

    def __post_init__(self):
        object.__setattr__(self, "diffuse", _vec(self.diffuse, 3, "diffuse"))
        object.__setattr__(self, "direction", _vec(self.direction, 3, "direction"))
        object.__setattr__(self, "specular", float(self.specular))


@dataclass(frozen=True)
class RobotInit:
    qpos: tuple[float, ...]
    gripper: float

    def __post_init__(self):
        object.__setattr__(self, "qpos", tuple(float(q) for q in self.qpos))
        object.__setattr__(self, "gripper", float(self.gripper))


@dataclass(frozen=True)
class TaskSpec:
    instruction: str
    goal: GoalPredicate
    suite: str


@dataclass(frozen=True)
class SceneSpec:
    scene_id: str
    objects: tuple[ObjectPlacement, ...]
    camera: CameraSpec
    lights: LightSpec
    textures: Mapping[str, str]
    robot_init: RobotInit
    task: TaskSpec

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        # Plain dicts are accepted but stored as a private snapshot.
        object.__setattr__(self, "textures", dict(self.textures))

    def object_by_id(self, object_id: str) -> ObjectPlacement | None:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        return None

    @property
    def target(self) -> ObjectPlacement | None:
        for obj in self.objects:
            if obj.is_target:
                return obj
        return None

    def to_tree(self) -> dict:
        return to_tree(self)

    def dumps(self) -> str:
        return dumps(self)

    @classmethod
    def from_tree(cls, tree: Mapping[str, Any]) -> "SceneSpec":
        return from_tree(tree)

    @classmethod
    def loads(cls, text: str) -> "SceneSpec":
        return loads(text)


# ---------------------------------------------------------------------------
# Tree mapping (the shape seen by canonical serialization and patches)


def to_tree(scene: SceneSpec) -> dict:
    return {
        "scene_id": scene.scene_id,
        "objects": [
            {
                "object_id": o.object_id,
                "category": o.category,
                "position": list(o.position),
                "orientation": list(o.orientation),
                "is_target": o.is_target,
                "is_confounder": o.is_confounder,
            }
            for o in scene.objects
        ],
        "camera": {
            "position": list(scene.camera.position),
            "rotation": [list(row) for row in scene.camera.rotation],
            "look_center": list(scene.camera.look_center),
            "fov_deg": scene.camera.fov_deg,
        },
        "lights": {
            "diffuse": list(scene.lights.diffuse),
            "direction": list(scene.lights.direction),
            "specular": scene.lights.specular,
            "shadows": scene.lights.shadows,
        },
        "textures": dict(scene.textures),
        "robot_init": {
            "qpos": list(scene.robot_init.qpos),
            "gripper": scene.robot_init.gripper,
        },
        "task": {
            "instruction": scene.task.instruction,
            "goal": {
                "predicate": scene.task.goal.name,
                "args": list(scene.task.goal.args),
            },
            "suite": scene.task.suite,
        },
    }


def from_tree(tree: Mapping[str, Any]) -> SceneSpec:
    try:
        goal = tree["task"]["goal"]
        return SceneSpec(
            scene_id=tree["scene_id"],
            objects=tuple(
                ObjectPlacement(
                    object_id=o["object_id"],
                    category=o["category"],
                    position=o["position"],
                    orientation=o["orientation"],
                    is_target=bool(o["is_target"]),
                    is_confounder=bool(o["is_confounder"]),
                )
                for o in tree["objects"]
            ),
            camera=CameraSpec(
                position=tree["camera"]["position"],
                rotation=tree["camera"]["rotation"],
                look_center=tree["camera"]["look_center"],
                fov_deg=tree["camera"]["fov_deg"],
            ),
            lights=LightSpec(
                diffuse=tree["lights"]["diffuse"],
                direction=tree["lights"]["direction"],
                specular=tree["lights"]["specular"],
                shadows=bool(tree["lights"]["shadows"]),
            ),
            textures={str(k): str(v) for k, v in tree["textures"].items()},
            robot_init=RobotInit(
                qpos=tree["robot_init"]["qpos"],
                gripper=tree["robot_init"]["gripper"],
            ),
            task=TaskSpec(
                instruction=tree["task"]["instruction"],
                goal=GoalPredicate(goal["predicate"], tuple(goal["args"])),
                suite=tree["task"]["suite"],
            ),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scene document: {exc}") from exc


def dumps(scene: SceneSpec) -> str:
    return canonical.dumps(to_tree(scene))


def loads(text: str) -> SceneSpec:
    return from_tree(canonical.loads(text))


def save(path, scene: SceneSpec) -> None:
    canonical.dump_file(path, to_tree(scene))


def load(path) -> SceneSpec:
    return from_tree(canonical.load_file(path))


# ---------------------------------------------------------------------------
# Validation


def _finite(values) -> bool:
    return all(math.isfinite(v) for v in values)


def validate(scene: SceneSpec, joint_count: int = 7) -> list[str]:
    """Check every structural invariant; returns violation descriptions.

    Each description names the offending key path.  An empty list means the
    scene is well-formed.  ``joint_count`` is the kinematic profile the
    robot_init.qpos length must match.
    """
    violations: list[str] = []

    seen: set[str] = set()
    for i, obj in enumerate(scene.objects):
        if obj.object_id in seen:
            violations.append(f"objects.{i}.object_id: duplicate id {obj.object_id!r}")
        seen.add(obj.object_id)
        if not _finite(obj.position):
            violations.append(f"objects.{i}.position: non-finite component")
        for angle in obj.orientation:
            if not (-math.pi < angle <= math.pi) or not math.isfinite(angle):
                violations.append(
                    f"objects.{i}.orientation: angle {angle!r} outside (-pi, pi]"
                )
                break

    cam = scene.camera
    if not (_finite(cam.position) and _finite(cam.look_center)):
        violations.append("camera.position: non-finite component")
    r = cam.rotation
    # R^T R = I within 1e-9, checked entrywise.
    ortho_err = 0.0
    for i in range(3):
        for j in range(3):
            dot = sum(r[k][i] * r[k][j] for k in range(3))
            ortho_err = max(ortho_err, abs(dot - (1.0 if i == j else 0.0)))
    det = (
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
        - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    )
    if ortho_err > 1e-9:
        violations.append(f"camera.rotation: not orthonormal (max error {ortho_err:.3e})")
    if abs(det - 1.0) > 1e-9:
        violations.append(f"camera.rotation: determinant {det:.6f} != 1")

    lights = scene.lights
    norm = math.sqrt(sum(c * c for c in lights.direction))
    if abs(norm - 1.0) > 1e-9:
        violations.append(f"lights.direction: norm {norm:.12f} != 1")
    if any(not (0.0 <= c <= 1.0) for c in lights.diffuse):
        violations.append(f"lights.diffuse: channel outside [0, 1]: {lights.diffuse}")
    if lights.specular < 0:
        violations.append(f"lights.specular: negative value {lights.specular}")

    for role in scene.textures:
        if role not in TEXTURE_ROLES:
            violations.append(f"textures.{role}: unknown surface role")

    robot = scene.robot_init
    if len(robot.qpos) != joint_count:
        violations.append(
            f"robot_init.qpos: length {len(robot.qpos)} != profile {joint_count}"
        )
    if not (0.0 <= robot.gripper <= 1.0):
        violations.append(f"robot_init.gripper: {robot.gripper} outside [0, 1]")

    task = scene.task
    if task.suite not in SUITES:
        violations.append(f"task.suite: unknown suite {task.suite!r}")
    goal = task.goal
    arity = PREDICATE_ARITY.get(goal.name)
    if arity is None:
        violations.append(f"task.goal: unknown predicate {goal.name!r}")
    elif len(goal.args) != arity:
        violations.append(
            f"task.goal: {goal.name} expects {arity} arguments, got {len(goal.args)}"
        )
    for arg in goal.args:
        if scene.object_by_id(arg) is None:
            violations.append(f"task.goal: references missing object {arg!r}")
    if goal.args:
        n_targets = sum(1 for o in scene.objects if o.is_target)
        if n_targets != 1:
            violations.append(
                f"objects: expected exactly one is_target flag, found {n_targets}"
            )

    return violations
