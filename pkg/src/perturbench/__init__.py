"""Simulator-agnostic robustness toolkit for vision-language-action policies.

Seven perturbation families over a declarative scene model and rendered
images, an episode evaluation harness with a synthetic verification
environment, compositional-generalization statistics, benchmark
construction, and a report CLI.
"""

from .builder import (
    BenchmarkManifest,
    DifficultyLevel,
    GeneratorConfig,
    ManifestEntry,
    filter_and_balance,
    generate_variants,
    load_manifest,
    save_manifest,
    stratify,
)
from .camera import (
    CameraPerturbParams,
    apply_camera_perturbation,
    perturb_distance,
    perturb_orientation,
    perturb_sphere,
    sample_camera_perturbation,
)
from .canonical import dumps as canonical_dumps
from .canonical import fingerprint
from .canonical import loads as canonical_loads
from .corrupt import (
    Image,
    NoiseParams,
    available_backends,
    backend_name,
    corrupt,
    mask_view,
    params_for,
)
from .dims import (
    DIMENSIONS,
    LEVELED_DIMENSIONS,
    SUB_DIMENSIONS,
    PerturbationSpec,
    PerturbationVector,
)
from .errors import (
    ConstraintError,
    CoverageError,
    DegenerateGeometryError,
    DegenerateTableError,
    IncompatibleScenesError,
    LexiconCoverageError,
    MissingBaselineError,
    MissingObjectError,
    PackingError,
    ParameterRangeError,
    PatchPathError,
    PerturbenchError,
    ProtocolError,
    RegistryError,
    RewriterServiceError,
    StalePatchError,
    TransportError,
    ValidationError,
)
from .harness import (
    EpisodeRecord,
    SyntheticEnv,
    SyntheticEnvModel,
    filter_trajectories,
    run_episode,
    run_suite,
)
from .language import DEFAULT_LEXICON, RewriteLexicon, blank, replace_goal, rewrite
from .patch import ScenePatch, apply, diff
from .rng import Rng, derive_seed
from .scene import (
    SUITES,
    CameraSpec,
    GoalPredicate,
    LightSpec,
    ObjectPlacement,
    RobotInit,
    SceneSpec,
    TaskSpec,
    validate,
)
from .sceneops import (
    DistractorRegistry,
    TextureRegistry,
    WorkspaceBounds,
    add_confounders,
    jitter_target_pose,
    perturb_light,
    perturb_robot_init,
    swap_background,
)
from .stats import (
    ChiSquareResult,
    CompGapResult,
    PairSuccessTable,
    chi_square,
    contingency_from_rates,
    pairwise_heatmap,
    success_conditioned,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkManifest",
    "CameraPerturbParams",
    "CameraSpec",
    "ChiSquareResult",
    "CompGapResult",
    "ConstraintError",
    "CoverageError",
    "DEFAULT_LEXICON",
    "DIMENSIONS",
    "DegenerateGeometryError",
    "DegenerateTableError",
    "DifficultyLevel",
    "DistractorRegistry",
    "EpisodeRecord",
    "GeneratorConfig",
    "GoalPredicate",
    "Image",
    "IncompatibleScenesError",
    "LEVELED_DIMENSIONS",
    "LexiconCoverageError",
    "LightSpec",
    "ManifestEntry",
    "MissingBaselineError",
    "MissingObjectError",
    "NoiseParams",
    "ObjectPlacement",
    "PackingError",
    "PairSuccessTable",
    "ParameterRangeError",
    "PatchPathError",
    "PerturbationSpec",
    "PerturbationVector",
    "PerturbenchError",
    "ProtocolError",
    "RegistryError",
    "RewriteLexicon",
    "RewriterServiceError",
    "RobotInit",
    "Rng",
    "SUB_DIMENSIONS",
    "SUITES",
    "ScenePatch",
    "SceneSpec",
    "StalePatchError",
    "SyntheticEnv",
    "SyntheticEnvModel",
    "TaskSpec",
    "TextureRegistry",
    "TransportError",
    "ValidationError",
    "WorkspaceBounds",
    "add_confounders",
    "apply",
    "apply_camera_perturbation",
    "available_backends",
    "backend_name",
    "blank",
    "canonical_dumps",
    "canonical_loads",
    "chi_square",
    "contingency_from_rates",
    "corrupt",
    "derive_seed",
    "diff",
    "filter_and_balance",
    "filter_trajectories",
    "fingerprint",
    "generate_variants",
    "jitter_target_pose",
    "load_manifest",
    "mask_view",
    "pairwise_heatmap",
    "params_for",
    "perturb_distance",
    "perturb_light",
    "perturb_orientation",
    "perturb_robot_init",
    "perturb_sphere",
    "replace_goal",
    "rewrite",
    "run_episode",
    "run_suite",
    "sample_camera_perturbation",
    "save_manifest",
    "stratify",
    "success_conditioned",
    "swap_background",
    "validate",
]
