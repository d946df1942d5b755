"""The seven perturbation dimensions and their concrete mechanisms.

``DIMENSIONS`` fixes the canonical flag order used by
:class:`PerturbationVector` and by every report surface.  Four dimensions
carry a five-step severity ladder; background, light and language variants
are generated per mechanism without levels (their severity is not
parameterized by a single scalar), recorded as ``level = None``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

DIMENSIONS = ("layout", "background", "light", "camera", "robot", "noise", "language")

SUB_DIMENSIONS: Mapping[str, tuple[str, ...]] = {
    "layout": ("confounding", "target_pose"),
    "background": ("scene-wall", "work-surface"),
    "light": ("diffuse", "direction", "specular", "shadows"),
    "camera": ("distance", "sphere", "orientation"),
    "robot": ("joint_init",),
    "noise": ("motion_blur", "gaussian_blur", "zoom_blur", "fog", "glass_blur"),
    "language": ("distraction", "commonsense", "reasoning"),
}

LEVELED_DIMENSIONS = ("layout", "camera", "robot", "noise")


def dimension_index(name: str) -> int:
    try:
        return DIMENSIONS.index(name)
    except ValueError:
        raise ValueError(f"unknown perturbation dimension {name!r}") from None


@dataclass(frozen=True)
class PerturbationSpec:
    """One perturbation instance, fully resolved and replayable."""

    dimension: str
    sub_dimension: str
    level: int | None
    params: Mapping[str, object]
    seed: int

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise ValueError(f"unknown perturbation dimension {self.dimension!r}")
        if self.sub_dimension not in SUB_DIMENSIONS[self.dimension]:
            raise ValueError(
                f"unknown sub-dimension {self.sub_dimension!r} of {self.dimension}"
            )
        object.__setattr__(self, "params", dict(self.params))

    def to_doc(self) -> dict:
        return {
            "dimension": self.dimension,
            "sub_dimension": self.sub_dimension,
            "level": self.level,
            "params": dict(self.params),
            "seed": self.seed,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "PerturbationSpec":
        return cls(
            dimension=doc["dimension"],
            sub_dimension=doc["sub_dimension"],
            level=doc["level"],
            params=doc["params"],
            seed=doc["seed"],
        )


@dataclass(frozen=True)
class PerturbationVector:
    """Which dimensions an episode perturbs, with one spec per set flag."""

    flags: tuple[bool, bool, bool, bool, bool, bool, bool] = (False,) * 7
    specs: tuple[PerturbationSpec, ...] = ()

    def __post_init__(self):
        flags = tuple(bool(f) for f in self.flags)
        if len(flags) != len(DIMENSIONS):
            raise ValueError(f"expected {len(DIMENSIONS)} flags, got {len(flags)}")
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "specs", tuple(self.specs))
        if len(self.specs) != sum(flags):
            raise ValueError(
                f"{sum(flags)} set flags but {len(self.specs)} perturbation specs"
            )
        spec_dims = {s.dimension for s in self.specs}
        flagged = {d for d, f in zip(DIMENSIONS, flags) if f}
        if spec_dims != flagged:
            raise ValueError(f"specs cover {sorted(spec_dims)} but flags set {sorted(flagged)}")

    @classmethod
    def none(cls) -> "PerturbationVector":
        return cls()

    @classmethod
    def of(cls, *specs: PerturbationSpec) -> "PerturbationVector":
        dims = {s.dimension for s in specs}
        if len(dims) != len(specs):
            raise ValueError("at most one spec per dimension")
        flags = tuple(d in dims for d in DIMENSIONS)
        ordered = tuple(sorted(specs, key=lambda s: dimension_index(s.dimension)))
        return cls(flags, ordered)

    def is_set(self, dimension: str) -> bool:
        return self.flags[dimension_index(dimension)]

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(d for d, f in zip(DIMENSIONS, self.flags) if f)

    def spec_for(self, dimension: str) -> PerturbationSpec | None:
        for spec in self.specs:
            if spec.dimension == dimension:
                return spec
        return None

    def to_doc(self) -> dict:
        return {
            "flags": [1 if f else 0 for f in self.flags],
            "specs": [s.to_doc() for s in self.specs],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "PerturbationVector":
        return cls(
            tuple(bool(f) for f in doc["flags"]),
            tuple(PerturbationSpec.from_doc(s) for s in doc["specs"]),
        )
