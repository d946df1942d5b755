"""Scene-level perturbations: layout, background, light, robot init.

Every transform returns ``(new_scene, patch)`` with the guarantee
``patch.apply(input) == output``; inputs are never mutated.

Physics is out of scope, so placement and relation checks use documented
geometric proxies:

* collision: axis-aligned bounding boxes must be disjoint with a 5 mm
  margin, using per-category half extents from the distractor registry
  (objects without an entry get ``default_half_extents``);
* ``next_to(a, b)``: horizontal center distance < 0.15 m;
* ``on(a, b)``: |bottom(a) − top(b)| < 0.01 m and the boxes overlap
  horizontally;
* ``in(a, b)``: a's box contained in b's box horizontally and a's center
  below b's top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    ConstraintError,
    MissingObjectError,
    PackingError,
    ParameterRangeError,
    RegistryError,
)
from .patch import ScenePatch, diff
from .rng import Rng, derive_seed
from .scene import LightSpec, ObjectPlacement, RobotInit, SceneSpec

COLLISION_MARGIN_M = 0.005
NEXT_TO_MAX_DISTANCE_M = 0.15
ON_MAX_VERTICAL_GAP_M = 0.01
DEFAULT_HALF_EXTENTS = (0.04, 0.04, 0.04)
PLACEMENT_ATTEMPT_BUDGET = 200

#: declares a manifest complete w.r.t. the full catalog sizes
FULL_CATALOG_DIRECTIVE = "#full-catalog"
DISTRACTOR_CATALOG_SIZE = 416
TEXTURE_CATALOG_SIZE = 950

ROBOT_MAGNITUDE_RANGE = (0.1, 0.5)


# ---------------------------------------------------------------------------
# Registries


@dataclass(frozen=True)
class DistractorRegistry:
    """Catalog of distractor categories with their box half extents."""

    entries: tuple[tuple[str, tuple[float, float, float]], ...] = ()
    default_half_extents: tuple[float, float, float] = DEFAULT_HALF_EXTENTS

    def __post_init__(self):
        seen = set()
        for category, extents in self.entries:
            if category in seen:
                raise RegistryError(f"duplicate distractor category {category!r}")
            seen.add(category)
            if any(e <= 0 for e in extents):
                raise RegistryError(f"non-positive half extent for {category!r}")

    @property
    def categories(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.entries)

    def half_extents(self, category: str) -> tuple[float, float, float]:
        for cat, extents in self.entries:
            if cat == category:
                return extents
        return self.default_half_extents

    @classmethod
    def parse(cls, text: str) -> "DistractorRegistry":
        """Parse a manifest: one ``category hx hy hz`` line per entry."""
        entries = []
        complete = False
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line == FULL_CATALOG_DIRECTIVE:
                complete = True
                continue
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise RegistryError(
                    f"line {lineno}: expected 'category hx hy hz', got {line!r}"
                )
            try:
                extents = (float(parts[1]), float(parts[2]), float(parts[3]))
            except ValueError:
                raise RegistryError(f"line {lineno}: bad extent in {line!r}") from None
            entries.append((parts[0], extents))
        registry = cls(tuple(entries))
        if complete and len(entries) != DISTRACTOR_CATALOG_SIZE:
            raise RegistryError(
                f"manifest declares itself complete but lists {len(entries)} "
                f"of {DISTRACTOR_CATALOG_SIZE} distractors"
            )
        return registry

    @classmethod
    def load(cls, path) -> "DistractorRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())


@dataclass(frozen=True)
class TextureRegistry:
    """Catalog of texture ids tagged with the surface role they fit."""

    entries: tuple[tuple[str, str], ...] = ()  # (texture_id, role)

    def __post_init__(self):
        seen = set()
        for texture_id, _role in self.entries:
            if texture_id in seen:
                raise RegistryError(f"duplicate texture id {texture_id!r}")
            seen.add(texture_id)

    def for_role(self, role: str) -> tuple[str, ...]:
        return tuple(t for t, r in self.entries if r == role)

    @classmethod
    def parse(cls, text: str) -> "TextureRegistry":
        """Parse a manifest: one ``texture_id role`` line per entry."""
        entries = []
        complete = False
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line == FULL_CATALOG_DIRECTIVE:
                complete = True
                continue
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise RegistryError(
                    f"line {lineno}: expected 'texture_id role', got {line!r}"
                )
            entries.append((parts[0], parts[1]))
        registry = cls(tuple(entries))
        if complete and len(entries) != TEXTURE_CATALOG_SIZE:
            raise RegistryError(
                f"manifest declares itself complete but lists {len(entries)} "
                f"of {TEXTURE_CATALOG_SIZE} textures"
            )
        return registry

    @classmethod
    def load(cls, path) -> "TextureRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())


@dataclass(frozen=True)
class LightPerturbParams:
    diffuse: tuple[float, float, float]
    direction: tuple[float, float, float]
    specular: float
    shadows: bool

    def __post_init__(self):
        object.__setattr__(self, "diffuse", tuple(float(c) for c in self.diffuse))
        object.__setattr__(self, "direction", tuple(float(c) for c in self.direction))
        object.__setattr__(self, "specular", float(self.specular))


@dataclass(frozen=True)
class WorkspaceBounds:
    """Axis-aligned placement region (z is the support surface height)."""

    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "min_corner", tuple(float(v) for v in self.min_corner))
        object.__setattr__(self, "max_corner", tuple(float(v) for v in self.max_corner))
        if any(a > b for a, b in zip(self.min_corner, self.max_corner)):
            raise ParameterRangeError("workspace min corner exceeds max corner")


# ---------------------------------------------------------------------------
# Geometric predicates


def bounding_box(obj: ObjectPlacement, registry: DistractorRegistry):
    hx, hy, hz = registry.half_extents(obj.category)
    x, y, z = obj.position
    return ((x - hx, y - hy, z - hz), (x + hx, y + hy, z + hz))


def boxes_disjoint(box_a, box_b, margin: float = COLLISION_MARGIN_M) -> bool:
    (amin, amax), (bmin, bmax) = box_a, box_b
    for axis in range(3):
        if amax[axis] + margin <= bmin[axis] or bmax[axis] + margin <= amin[axis]:
            return True
    return False


def _horizontal_overlap(box_a, box_b) -> bool:
    (amin, amax), (bmin, bmax) = box_a, box_b
    return not (
        amax[0] <= bmin[0] or bmax[0] <= amin[0] or amax[1] <= bmin[1] or bmax[1] <= amin[1]
    )


def relation_holds(
    predicate: str, a: ObjectPlacement, b: ObjectPlacement | None, registry: DistractorRegistry
) -> bool:
    """Evaluate a goal predicate geometrically (documented proxy semantics)."""
    if predicate == "next_to":
        assert b is not None
        dx = a.position[0] - b.position[0]
        dy = a.position[1] - b.position[1]
        return math.hypot(dx, dy) < NEXT_TO_MAX_DISTANCE_M
    if predicate == "on":
        assert b is not None
        box_a = bounding_box(a, registry)
        box_b = bounding_box(b, registry)
        bottom_a = box_a[0][2]
        top_b = box_b[1][2]
        return abs(bottom_a - top_b) < ON_MAX_VERTICAL_GAP_M and _horizontal_overlap(
            box_a, box_b
        )
    if predicate == "in":
        assert b is not None
        box_a = bounding_box(a, registry)
        box_b = bounding_box(b, registry)
        horizontally_inside = (
            box_b[0][0] <= box_a[0][0]
            and box_a[1][0] <= box_b[1][0]
            and box_b[0][1] <= box_a[0][1]
            and box_a[1][1] <= box_b[1][1]
        )
        return horizontally_inside and a.position[2] < box_b[1][2]
    # Unary predicates (picked_up, open, ...) carry no static geometry.
    return True


def goal_relations_hold(scene: SceneSpec, registry: DistractorRegistry) -> bool:
    goal = scene.task.goal
    if goal.name not in ("next_to", "on", "in") or len(goal.args) != 2:
        return True
    a = scene.object_by_id(goal.args[0])
    b = scene.object_by_id(goal.args[1])
    if a is None or b is None:
        return False
    return relation_holds(goal.name, a, b, registry)


# ---------------------------------------------------------------------------
# Layout


def _replace_objects(scene: SceneSpec, objects: Sequence[ObjectPlacement]) -> SceneSpec:
    return SceneSpec(
        scene_id=scene.scene_id,
        objects=tuple(objects),
        camera=scene.camera,
        lights=scene.lights,
        textures=scene.textures,
        robot_init=scene.robot_init,
        task=scene.task,
    )


def add_confounders(
    scene: SceneSpec,
    registry: DistractorRegistry,
    n: int,
    workspace: WorkspaceBounds,
    seed: int,
) -> tuple[SceneSpec, ScenePatch]:
    """Add ``n`` distractor objects at collision-free poses.

    Categories are drawn without replacement; positions are rejection
    sampled inside the workspace until the new box clears every existing
    box (margin included).  Existing objects are untouched.
    """
    if n < 1:
        raise ParameterRangeError(f"confounder count must be >= 1, got {n}")
    if len(registry.entries) < n:
        raise RegistryError(
            f"registry holds {len(registry.entries)} categories, need {n}"
        )
    rng = Rng(derive_seed(seed, "confounders", scene.scene_id, n))
    categories = rng.sample(registry.categories, n)

    existing_ids = {o.object_id for o in scene.objects}
    boxes = [bounding_box(o, registry) for o in scene.objects]
    placed: list[ObjectPlacement] = []
    for category in categories:
        hx, hy, hz = registry.half_extents(category)
        placement = None
        for _ in range(PLACEMENT_ATTEMPT_BUDGET):
            x = rng.uniform(workspace.min_corner[0] + hx, workspace.max_corner[0] - hx)
            y = rng.uniform(workspace.min_corner[1] + hy, workspace.max_corner[1] - hy)
            z = workspace.min_corner[2] + hz
            yaw = rng.uniform(-math.pi, math.pi)
            candidate = ObjectPlacement(
                object_id=_fresh_id(category, existing_ids),
                category=category,
                position=(x, y, z),
                orientation=(0.0, 0.0, yaw),
                is_target=False,
                is_confounder=True,
            )
            box = bounding_box(candidate, registry)
            if all(boxes_disjoint(box, other) for other in boxes):
                placement = candidate
                break
        if placement is None:
            raise PackingError(
                f"placed {len(placed)} of {n} confounders before exhausting "
                f"{PLACEMENT_ATTEMPT_BUDGET} attempts"
            )
        placed.append(placement)
        existing_ids.add(placement.object_id)
        boxes.append(bounding_box(placement, registry))

    out = _replace_objects(scene, tuple(scene.objects) + tuple(placed))
    return out, diff(scene, out)


def _fresh_id(category: str, taken: set) -> str:
    k = 1
    while f"{category}_{k}" in taken:
        k += 1
    return f"{category}_{k}"


def _wrap_angle(a: float) -> float:
    wrapped = math.fmod(a + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def jitter_target_pose(
    scene: SceneSpec,
    pos_bounds: tuple[float, float, float],
    rot_bounds: tuple[float, float, float],
    seed: int,
    registry: DistractorRegistry | None = None,
) -> tuple[SceneSpec, ScenePatch]:
    """Offset the target pose while preserving the goal's spatial relations.

    Offsets are uniform in ±bounds per component; candidates violating the
    goal relation (under the geometric proxies) are rejected and resampled
    up to a budget.
    """
    if any(b < 0 for b in pos_bounds) or any(b < 0 for b in rot_bounds):
        raise ParameterRangeError("jitter bounds must be non-negative")
    target = scene.target
    if target is None:
        raise MissingObjectError("scene has no target object to jitter")
    registry = registry if registry is not None else DistractorRegistry()
    rng = Rng(derive_seed(seed, "target-pose", scene.scene_id))
    index = scene.objects.index(target)

    for _ in range(PLACEMENT_ATTEMPT_BUDGET):
        offset = tuple(rng.uniform(-b, b) for b in pos_bounds)
        twist = tuple(rng.uniform(-b, b) for b in rot_bounds)
        moved = ObjectPlacement(
            object_id=target.object_id,
            category=target.category,
            position=tuple(p + o for p, o in zip(target.position, offset)),
            orientation=tuple(
                _wrap_angle(a + t) for a, t in zip(target.orientation, twist)
            ),
            is_target=True,
            is_confounder=target.is_confounder,
        )
        objects = list(scene.objects)
        objects[index] = moved
        candidate = _replace_objects(scene, objects)
        if goal_relations_hold(candidate, registry):
            return candidate, diff(scene, candidate)

    raise ConstraintError(
        f"no relation-preserving target pose found in {PLACEMENT_ATTEMPT_BUDGET} attempts"
    )


# ---------------------------------------------------------------------------
# Background, light, robot


def swap_background(
    scene: SceneSpec, registry: TextureRegistry, role: str, seed: int
) -> tuple[SceneSpec, ScenePatch]:
    current = scene.textures.get(role)
    candidates = [t for t in registry.for_role(role) if t != current]
    if not candidates:
        raise RegistryError(f"registry has no alternative texture for role {role!r}")
    rng = Rng(derive_seed(seed, "background", scene.scene_id, role))
    chosen = rng.choice(candidates)
    textures = dict(scene.textures)
    textures[role] = chosen
    out = SceneSpec(
        scene_id=scene.scene_id,
        objects=scene.objects,
        camera=scene.camera,
        lights=scene.lights,
        textures=textures,
        robot_init=scene.robot_init,
        task=scene.task,
    )
    return out, diff(scene, out)


def perturb_light(
    scene: SceneSpec, params: LightPerturbParams
) -> tuple[SceneSpec, ScenePatch]:
    norm = math.sqrt(sum(c * c for c in params.direction))
    if abs(norm - 1.0) > 1e-9:
        raise ParameterRangeError(f"light direction norm {norm!r} != 1")
    if any(not 0.0 <= c <= 1.0 for c in params.diffuse):
        raise ParameterRangeError(f"diffuse channel outside [0, 1]: {params.diffuse}")
    if params.specular < 0:
        raise ParameterRangeError(f"negative specular {params.specular}")
    out = SceneSpec(
        scene_id=scene.scene_id,
        objects=scene.objects,
        camera=scene.camera,
        lights=LightSpec(
            diffuse=params.diffuse,
            direction=params.direction,
            specular=params.specular,
            shadows=params.shadows,
        ),
        textures=scene.textures,
        robot_init=scene.robot_init,
        task=scene.task,
    )
    return out, diff(scene, out)


def perturb_robot_init(init: RobotInit, magnitude: float, seed: int) -> RobotInit:
    """Offset qpos by a vector of exactly the requested Euclidean norm."""
    lo, hi = ROBOT_MAGNITUDE_RANGE
    if not lo <= magnitude <= hi:
        raise ParameterRangeError(f"magnitude {magnitude} outside [{lo}, {hi}]")
    rng = Rng(derive_seed(seed, "robot-init"))
    direction = rng.unit_vector(len(init.qpos))
    qpos = tuple(q + magnitude * d for q, d in zip(init.qpos, direction))
    return RobotInit(qpos=qpos, gripper=init.gripper)
