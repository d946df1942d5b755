"""Benchmark construction: generate perturbed variants of base tasks,
remove ceiling tasks, balance mechanisms, stratify difficulty.

A variant is one base task with one perturbation dimension applied through
one of its mechanisms.  Scene-changing dimensions are captured as a scene
patch; sensor noise and language variants leave the scene untouched (noise
parameters replay from the stored seed and level, the rewritten
instruction is stored as an override).
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, replace as dc_replace
from typing import Mapping, Sequence

from .camera import apply_camera_perturbation, sample_camera_perturbation, severity_band
from .canonical import dump_file, load_file
from .dims import DIMENSIONS, LEVELED_DIMENSIONS, SUB_DIMENSIONS
from .errors import (
    ConstraintError,
    CoverageError,
    DegenerateGeometryError,
    LexiconCoverageError,
    PackingError,
    ParameterRangeError,
    RegistryError,
    ValidationError,
)
from .language import DEFAULT_LEXICON, RewriteLexicon, rewrite
from .patch import ScenePatch, diff
from .patch import load as load_patch
from .patch import save as save_patch
from .rng import Rng, derive_seed
from .scene import SUITES, LightSpec, SceneSpec
from .sceneops import (
    ROBOT_MAGNITUDE_RANGE,
    DistractorRegistry,
    LightPerturbParams,
    TextureRegistry,
    WorkspaceBounds,
    add_confounders,
    jitter_target_pose,
    perturb_light,
    perturb_robot_init,
    swap_background,
)

log = logging.getLogger(__name__)

LEVELS = (1, 2, 3, 4, 5)
N_REFERENCE_MODELS = 4
GENERATION_ATTEMPTS = 20

# Constraint failures that make one variant draw unusable; the generator
# retries with a fresh derived seed and skips the slot when the budget runs out.
_GENERATION_FAILURES = (
    PackingError,
    ConstraintError,
    RegistryError,
    LexiconCoverageError,
    DegenerateGeometryError,
)


@dataclass(frozen=True)
class GeneratorConfig:
    """Catalogs and per-level magnitudes used by generate_variants."""

    registry: DistractorRegistry
    textures: TextureRegistry
    workspace: WorkspaceBounds
    lexicon: RewriteLexicon = DEFAULT_LEXICON
    confounders_per_level: tuple[int, ...] = (1, 1, 2, 2, 3)
    jitter_pos_per_level: tuple[float, ...] = (0.01, 0.02, 0.03, 0.04, 0.05)
    jitter_yaw_per_level: tuple[float, ...] = (
        math.pi / 12, math.pi / 6, math.pi / 4, math.pi / 3, math.pi * 5 / 12,
    )

    @classmethod
    def default(cls) -> "GeneratorConfig":
        registry = DistractorRegistry((
            ("mug", (0.04, 0.04, 0.05)),
            ("bowl", (0.06, 0.06, 0.03)),
            ("book", (0.08, 0.055, 0.015)),
            ("bottle", (0.03, 0.03, 0.09)),
            ("can", (0.03, 0.03, 0.05)),
            ("sponge", (0.045, 0.03, 0.02)),
            ("box", (0.05, 0.05, 0.05)),
            ("cup", (0.035, 0.035, 0.045)),
        ))
        textures = TextureRegistry((
            ("wall_plain", "scene-wall"),
            ("wall_brick", "scene-wall"),
            ("wall_panel", "scene-wall"),
            ("table_oak", "work-surface"),
            ("table_marble", "work-surface"),
            ("table_steel", "work-surface"),
        ))
        workspace = WorkspaceBounds((-0.35, -0.35, 0.0), (0.35, 0.35, 0.0))
        return cls(registry=registry, textures=textures, workspace=workspace)


@dataclass(frozen=True)
class ManifestEntry:
    """One benchmark variant; the patch itself rides along in memory."""

    variant_id: str
    base_task_id: str
    suite: str
    dimension: str
    sub_dimension: str
    level: int | None
    seed: int
    patch_ref: str
    instruction: str | None = None
    patch: ScenePatch | None = None

    def to_doc(self) -> dict:
        return {
            "variant_id": self.variant_id,
            "base_task_id": self.base_task_id,
            "suite": self.suite,
            "dimension": self.dimension,
            "sub_dimension": self.sub_dimension,
            "level": self.level,
            "seed": self.seed,
            "patch_ref": self.patch_ref,
            "instruction": self.instruction,
        }

    @classmethod
    def from_doc(cls, doc: dict, patch: ScenePatch | None = None) -> "ManifestEntry":
        return cls(
            variant_id=doc["variant_id"],
            base_task_id=doc["base_task_id"],
            suite=doc["suite"],
            dimension=doc["dimension"],
            sub_dimension=doc["sub_dimension"],
            level=doc["level"],
            seed=doc["seed"],
            patch_ref=doc["patch_ref"],
            instruction=doc.get("instruction"),
            patch=patch,
        )


@dataclass(frozen=True)
class DifficultyLevel:
    """Benchmark difficulty: 5 minus the number of reference models solving."""

    level: int

    def __post_init__(self):
        if not 1 <= self.level <= 5:
            raise ValueError(f"difficulty level {self.level} outside 1..5")

    @classmethod
    def from_success_count(cls, successes: int, n_models: int = N_REFERENCE_MODELS):
        if not 0 <= successes <= n_models:
            raise ValueError(f"{successes} successes with {n_models} models")
        return cls(n_models + 1 - successes)


@dataclass(frozen=True)
class BenchmarkManifest:
    """Entries plus the bookkeeping the construction steps report."""

    entries: tuple[ManifestEntry, ...]
    shortfalls: Mapping[str, int] = None  # "suite/dimension" -> missing count

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "shortfalls", dict(self.shortfalls or {}))
        seen = set()
        for entry in self.entries:
            if entry.variant_id in seen:
                raise ValidationError([f"duplicate variant_id {entry.variant_id!r}"])
            seen.add(entry.variant_id)

    def __len__(self) -> int:
        return len(self.entries)

    def counts(self) -> dict:
        """Entry counts per dimension and suite, plus per-dimension totals."""
        out: dict = {}
        for entry in self.entries:
            row = out.setdefault(entry.dimension, {})
            row[entry.suite] = row.get(entry.suite, 0) + 1
        return out

    def dimension_totals(self) -> dict:
        return {dim: sum(row.values()) for dim, row in self.counts().items()}

    def sub_dimension_counts(self) -> dict:
        out: dict = {}
        for entry in self.entries:
            row = out.setdefault(entry.dimension, {})
            row[entry.sub_dimension] = row.get(entry.sub_dimension, 0) + 1
        return out

    def entry_by_id(self, variant_id: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.variant_id == variant_id:
                return entry
        raise KeyError(variant_id)

    def to_doc(self) -> dict:
        return {
            "entries": [e.to_doc() for e in self.entries],
            "counts": self.counts(),
            "shortfalls": dict(self.shortfalls),
        }

    @classmethod
    def from_doc(cls, doc: dict, patches: Mapping[str, ScenePatch] | None = None) -> "BenchmarkManifest":
        patches = patches or {}
        entries = [
            ManifestEntry.from_doc(row, patches.get(row["variant_id"]))
            for row in doc["entries"]
        ]
        manifest = cls(entries=tuple(entries), shortfalls=doc.get("shortfalls", {}))
        recorded = doc.get("counts")
        if recorded is not None and recorded != manifest.counts():
            raise ValidationError(["counts summary does not match entry recount"])
        return manifest


MANIFEST_FILE = "manifest.json"
PATCH_DIR = "patches"


def save_manifest(manifest: BenchmarkManifest, directory) -> None:
    os.makedirs(os.path.join(directory, PATCH_DIR), exist_ok=True)
    dump_file(os.path.join(directory, MANIFEST_FILE), manifest.to_doc())
    for entry in manifest.entries:
        if entry.patch is not None:
            save_patch(os.path.join(directory, entry.patch_ref), entry.patch)


def load_manifest(directory, load_patches: bool = True) -> BenchmarkManifest:
    doc = load_file(os.path.join(directory, MANIFEST_FILE))
    patches = {}
    if load_patches:
        for row in doc["entries"]:
            path = os.path.join(directory, row["patch_ref"])
            patches[row["variant_id"]] = load_patch(path)
    return BenchmarkManifest.from_doc(doc, patches)


# ---------------------------------------------------------------------------
# Variant generation


def _perturbed_scene(
    scene: SceneSpec,
    dimension: str,
    sub: str,
    level: int | None,
    seed: int,
    config: GeneratorConfig,
) -> tuple[ScenePatch, str | None]:
    """Applies one mechanism; returns (scene patch, instruction override)."""
    if dimension == "layout":
        if sub == "confounding":
            n = config.confounders_per_level[level - 1]
            _, patch = add_confounders(scene, config.registry, n, config.workspace, seed)
        else:
            bound = config.jitter_pos_per_level[level - 1]
            yaw = config.jitter_yaw_per_level[level - 1]
            _, patch = jitter_target_pose(
                scene, (bound, bound, 0.0), (0.0, 0.0, yaw), seed,
                registry=config.registry,
            )
        return patch, None
    if dimension == "background":
        _, patch = swap_background(scene, config.textures, sub, seed)
        return patch, None
    if dimension == "light":
        _, patch = perturb_light(scene, _light_params(scene.lights, sub, seed))
        return patch, None
    if dimension == "camera":
        params = sample_camera_perturbation(level, seed, kind=sub)
        modified = dc_replace(scene, camera=apply_camera_perturbation(scene.camera, params))
        return diff(scene, modified), None
    if dimension == "robot":
        lo, hi = severity_band(ROBOT_MAGNITUDE_RANGE, level)
        magnitude = Rng(derive_seed(seed, "robot-magnitude")).uniform(lo, hi)
        modified = dc_replace(
            scene, robot_init=perturb_robot_init(scene.robot_init, magnitude, seed)
        )
        return diff(scene, modified), None
    if dimension == "noise":
        # Image-space corruption: the scene is unchanged, parameters replay
        # from (sub_dimension, level) at evaluation time.
        return ScenePatch(edits=()), None
    if dimension == "language":
        override = rewrite(scene.task.instruction, sub, config.lexicon, seed)
        return ScenePatch(edits=()), override
    raise ParameterRangeError(f"unknown perturbation dimension {dimension!r}")


def _light_params(current: LightSpec, sub: str, seed: int) -> LightPerturbParams:
    rng = Rng(derive_seed(seed, "light", sub))
    diffuse = current.diffuse
    direction = current.direction
    specular = current.specular
    shadows = current.shadows
    if sub == "diffuse":
        diffuse = tuple(rng.uniform(0.2, 1.0) for _ in range(3))
    elif sub == "direction":
        v = rng.unit_vector(3)
        direction = (v[0], v[1], -abs(v[2]))  # keep light pointing down
    elif sub == "specular":
        specular = rng.uniform(0.0, 2.0)
    elif sub == "shadows":
        shadows = not current.shadows
    else:
        raise ParameterRangeError(f"unknown light mechanism {sub!r}")
    return LightPerturbParams(
        diffuse=diffuse, direction=direction, specular=specular, shadows=shadows
    )


def generate_variants(
    base_tasks: Sequence[SceneSpec],
    dims: Sequence[str] = DIMENSIONS,
    per_cell: int = 500,
    seed: int = 0,
    config: GeneratorConfig | None = None,
) -> BenchmarkManifest:
    """Builds per_cell variants for every (suite, dimension) cell.

    Mechanisms cycle round-robin in a seeded order; severity levels for the
    leveled dimensions are drawn per variant.  A constraint failure (packing,
    relation jitter, lexicon coverage, degenerate geometry) retries with a
    fresh derived seed; when the attempt budget runs out the slot is skipped,
    logged, and counted in the manifest's shortfalls.
    """
    if per_cell < 1:
        raise ParameterRangeError("per_cell must be at least 1")
    for dim in dims:
        if dim not in DIMENSIONS:
            raise ParameterRangeError(f"unknown perturbation dimension {dim!r}")
    config = config if config is not None else GeneratorConfig.default()

    by_suite: dict[str, list[SceneSpec]] = {}
    for scene in base_tasks:
        by_suite.setdefault(scene.task.suite, []).append(scene)
    suites = [s for s in SUITES if s in by_suite]

    entries: list[ManifestEntry] = []
    shortfalls: dict[str, int] = {}
    for suite in suites:
        tasks = by_suite[suite]
        for dim in dims:
            subs = Rng(derive_seed(seed, "mechanism-order", suite, dim)).shuffled(
                SUB_DIMENSIONS[dim]
            )
            made = 0
            for k in range(per_cell):
                base = tasks[k % len(tasks)]
                sub = subs[k % len(subs)]
                entry = None
                for attempt in range(GENERATION_ATTEMPTS):
                    vseed = derive_seed(seed, "variant", suite, dim, k, attempt)
                    level = None
                    if dim in LEVELED_DIMENSIONS:
                        level = Rng(derive_seed(vseed, "level")).randint(1, 5)
                    try:
                        patch, override = _perturbed_scene(
                            base, dim, sub, level, vseed, config
                        )
                    except _GENERATION_FAILURES as exc:
                        log.debug(
                            "variant %s/%s/%d attempt %d failed: %s",
                            suite, dim, k, attempt, exc,
                        )
                        continue
                    variant_id = f"{suite}-{dim}-{k:05d}"
                    entry = ManifestEntry(
                        variant_id=variant_id,
                        base_task_id=base.scene_id,
                        suite=suite,
                        dimension=dim,
                        sub_dimension=sub,
                        level=level,
                        seed=vseed,
                        patch_ref=f"{PATCH_DIR}/{variant_id}.patch",
                        instruction=override,
                        patch=patch,
                    )
                    break
                if entry is None:
                    log.warning("skipping variant %s/%s/%d: attempts exhausted", suite, dim, k)
                    continue
                entries.append(entry)
                made += 1
            if made < per_cell:
                shortfalls[f"{suite}/{dim}"] = per_cell - made
    return BenchmarkManifest(entries=tuple(entries), shortfalls=shortfalls)


# ---------------------------------------------------------------------------
# Filtering, balancing, stratification


def _check_coverage(
    entries: Sequence[ManifestEntry], model_records: Mapping[str, Mapping[str, bool]]
) -> None:
    if not model_records:
        raise CoverageError([(e.variant_id, "<no models>") for e in entries[:5]])
    missing = []
    for entry in entries:
        for model in sorted(model_records):
            if entry.variant_id not in model_records[model]:
                missing.append((entry.variant_id, model))
    if missing:
        raise CoverageError(missing)


def _largest_remainder_keep(counts: Sequence[int], total_keep: int) -> list[int]:
    """Apportions total_keep across groups proportionally to counts."""
    total = sum(counts)
    if total == 0:
        return [0] * len(counts)
    quotas = [c * total_keep / total for c in counts]
    keeps = [int(math.floor(q)) for q in quotas]
    shortfall = total_keep - sum(keeps)
    order = sorted(
        range(len(counts)),
        key=lambda i: (-(quotas[i] - keeps[i]), i),
    )
    for i in order:
        if shortfall == 0:
            break
        if keeps[i] < counts[i]:
            keeps[i] += 1
            shortfall -= 1
    return keeps


def filter_and_balance(
    manifest: BenchmarkManifest,
    model_records: Mapping[str, Mapping[str, bool]],
    ceiling_rule: float = 1.0,
    seed: int = 0,
) -> BenchmarkManifest:
    """Removes ceiling entries, then balances mechanisms within dimensions.

    An entry solved by at least ceiling_rule of the reference models is
    removed.  Within each dimension, every surviving mechanism is capped at
    one more than the smallest surviving mechanism count, so counts differ
    by at most 1; the drops are spread across suites by largest remainder
    and resolved by a seeded sample inside each suite.  Output entries are
    a subset of the input in original order.
    """
    if not 0.0 < ceiling_rule <= 1.0:
        raise ParameterRangeError(f"ceiling_rule {ceiling_rule} outside (0, 1]")
    _check_coverage(manifest.entries, model_records)

    models = sorted(model_records)
    survivors = []
    for entry in manifest.entries:
        solved = sum(1 for m in models if model_records[m][entry.variant_id])
        if solved / len(models) < ceiling_rule:
            survivors.append(entry)

    kept_ids: set[str] = set()
    dims_present = []
    for entry in survivors:
        if entry.dimension not in dims_present:
            dims_present.append(entry.dimension)
    for dim in dims_present:
        groups: dict[str, list[ManifestEntry]] = {}
        for entry in survivors:
            if entry.dimension == dim:
                groups.setdefault(entry.sub_dimension, []).append(entry)
        cap = min(len(g) for g in groups.values()) + 1
        for sub in sorted(groups):
            group = groups[sub]
            if len(group) <= cap:
                kept_ids.update(e.variant_id for e in group)
                continue
            suites_here = []
            for entry in group:
                if entry.suite not in suites_here:
                    suites_here.append(entry.suite)
            per_suite = [[e for e in group if e.suite == s] for s in suites_here]
            keeps = _largest_remainder_keep([len(g) for g in per_suite], cap)
            for suite, bucket, keep in zip(suites_here, per_suite, keeps):
                rng = Rng(derive_seed(seed, "balance", dim, sub, suite))
                chosen = rng.sample(range(len(bucket)), keep)
                kept_ids.update(bucket[i].variant_id for i in sorted(chosen))

    final = tuple(e for e in survivors if e.variant_id in kept_ids)
    return BenchmarkManifest(entries=final, shortfalls={})


def successes_by_variant(
    model_records: Mapping[str, Mapping[str, bool]]
) -> dict[str, dict[str, bool]]:
    """Transposes {model: {variant: success}} to {variant: {model: success}}."""
    out: dict[str, dict[str, bool]] = {}
    for model, rows in model_records.items():
        for variant_id, success in rows.items():
            out.setdefault(variant_id, {})[model] = bool(success)
    return out


def stratify(
    records: Mapping[str, Mapping[str, bool]],
    n_models: int = N_REFERENCE_MODELS,
) -> dict[str, DifficultyLevel]:
    """Maps each variant to a difficulty level from its success count.

    records holds per-variant model outcomes; every variant must carry
    exactly n_models outcomes.  Model identity is irrelevant: the level
    depends only on how many models succeeded.
    """
    out: dict[str, DifficultyLevel] = {}
    bad = [
        (vid, f"{len(outcomes)} outcomes, expected {n_models}")
        for vid, outcomes in records.items()
        if len(outcomes) != n_models
    ]
    if bad:
        raise CoverageError(bad)
    for vid, outcomes in records.items():
        successes = sum(1 for v in outcomes.values() if v)
        out[vid] = DifficultyLevel.from_success_count(successes, n_models)
    return out
