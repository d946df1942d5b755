"""Severity-level parameter tables for the five sensor-noise corruptions.

Level 1 and level 5 anchor each parameter; levels 2-4 interpolate linearly.
Interpolated values keep four decimals; counts (motion radius, glass swap
radius, glass iterations) round half to even to stay integers.  Glass blur
runs FEWER iterations at level 5 (1) than at level 1 (3): the parameter
source is followed verbatim even though the direction looks inverted, and
severity is carried by sigma/delta instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..errors import ParameterRangeError

NOISE_KINDS = ("motion_blur", "gaussian_blur", "zoom_blur", "fog", "glass_blur")

# (name, level-1 value, level-5 value, integer-valued)
_ANCHORS: Mapping[str, tuple[tuple[str, float, float, bool], ...]] = {
    "motion_blur": (
        ("radius", 5, 35, True),
        ("sigma", 2.0, 20.0, False),
    ),
    "gaussian_blur": (("sigma", 1.0, 10.0, False),),
    "zoom_blur": (
        ("s_min", 1.0, 1.0, False),
        ("s_max", 1.11, 1.56, False),
        ("step", 0.01, 0.03, False),
    ),
    "fog": (
        ("alpha", 0.5, 5.0, False),
        ("beta", 3.0, 1.3, False),
    ),
    "glass_blur": (
        ("sigma", 0.5, 2.5, False),
        ("delta", 1, 5, True),
        ("iterations", 3, 1, True),
    ),
}


@dataclass(frozen=True)
class NoiseParams:
    kind: str
    level: int
    values: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def to_doc(self) -> dict:
        return {"kind": self.kind, "level": self.level, "values": dict(self.values)}

    @classmethod
    def from_doc(cls, doc: dict) -> "NoiseParams":
        return cls(doc["kind"], doc["level"], doc["values"])


def _round_half_even(x: float) -> int:
    return int(round(x))


def params_for(kind: str, level: int) -> NoiseParams:
    if kind not in _ANCHORS:
        raise ParameterRangeError(f"unknown corruption kind {kind!r}")
    if not 1 <= level <= 5:
        raise ParameterRangeError(f"severity level {level} outside 1..5")
    t = (level - 1) / 4.0
    values: dict[str, float] = {}
    for name, lo, hi, integer in _ANCHORS[kind]:
        value = lo + t * (hi - lo)
        values[name] = _round_half_even(value) if integer else round(value, 4)
    return NoiseParams(kind=kind, level=level, values=values)
