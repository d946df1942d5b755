"""Synthetic environment for desk-scale verification of the statistics.

The model assigns a success probability to each of the 2^7 perturbation
flag combinations, either as an explicit table or through a clamped linear
form: base rate, additive per-dimension effects, additive pairwise
interaction terms.  An episode then succeeds with that probability, decided
by a single seeded draw, so suites over the synthetic environment are
exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..dims import DIMENSIONS, PerturbationVector, dimension_index
from ..rng import Rng, derive_seed

Flags = tuple[bool, ...]


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


@dataclass(frozen=True)
class SyntheticEnvModel:
    """Success probability as a function of the perturbation flags."""

    table: Mapping[Flags, float]

    def __post_init__(self):
        frozen = {}
        for flags, p in self.table.items():
            key = tuple(bool(f) for f in flags)
            if len(key) != len(DIMENSIONS):
                raise ValueError(f"flag tuple {flags!r} must have {len(DIMENSIONS)} entries")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
            frozen[key] = float(p)
        object.__setattr__(self, "table", frozen)

    @classmethod
    def from_pairwise(
        cls,
        base: float,
        effects: Mapping[str, float] | None = None,
        interactions: Mapping[tuple[str, str], float] | None = None,
    ) -> "SyntheticEnvModel":
        """Clamped linear model over flags: base + effects + pair terms."""
        effects = dict(effects or {})
        interactions = dict(interactions or {})
        for name in effects:
            dimension_index(name)  # validates
        for a, b in interactions:
            dimension_index(a)
            dimension_index(b)
        table: dict[Flags, float] = {}
        n = len(DIMENSIONS)
        for mask in range(1 << n):
            flags = tuple(bool(mask >> i & 1) for i in range(n))
            p = base
            for name, effect in effects.items():
                if flags[dimension_index(name)]:
                    p += effect
            for (a, b), weight in interactions.items():
                if flags[dimension_index(a)] and flags[dimension_index(b)]:
                    p += weight
            table[flags] = _clamp01(p)
        return cls(table)

    def success_rate(self, flags) -> float:
        key = tuple(bool(f) for f in flags)
        try:
            return self.table[key]
        except KeyError:
            raise KeyError(f"model has no entry for flags {key}") from None


class SyntheticEnv:
    """Environment handle: one seeded Bernoulli draw decides the episode.

    A successful episode terminates at step 1; a failed one never signals
    done, so the runner stops it at max_steps.
    """

    def __init__(
        self,
        task_id: str,
        vector: PerturbationVector,
        model: SyntheticEnvModel,
        salt: int = 0,
    ):
        self.task_id = task_id
        self.vector = vector
        self._model = model
        self._salt = salt
        self._succeeding = False
        self._state = (0.0,)

    def reset(self, seed: int) -> dict:
        rng = Rng(derive_seed(seed, "synthetic-episode", self.task_id, self._salt))
        rate = self._model.success_rate(self.vector.flags)
        self._succeeding = rng.random() < rate
        self._state = (rng.random(),)
        return {"views": {}, "state": self._state}

    def step(self, action) -> tuple[dict, bool, bool]:
        """Returns (observation, done, success)."""
        if self._succeeding:
            return ({"views": {}, "state": self._state}, True, True)
        return ({"views": {}, "state": self._state}, False, False)
