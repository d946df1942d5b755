"""Deterministic counter-based random number generation.

Every sampling routine in this package draws from :class:`Rng`, a
counter-based generator built on the splitmix64 finalizer.  The i-th value
depends only on (seed, i), never on shared state, so results are identical
across processes, platforms and parallel schedules.

Constants:

* ``GOLDEN`` is 2**64 / phi rounded to odd (0x9E3779B97F4A7C15), the
  standard splitmix64 increment; consecutive counters map to well-spread
  states.
* The two mixing multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB are
  the splitmix64 finalizer constants (Steele, Lea & Flood 2014).
* String seeding uses the FNV-1a 64-bit hash (offset basis
  0xCBF29CE484222325, prime 0x100000001B3).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """splitmix64 finalizer: a bijective avalanche mix on 64 bits."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * _MIX1) & _MASK64
    z ^= z >> 27
    z = (z * _MIX2) & _MASK64
    z ^= z >> 31
    return z


def fnv1a64(text: str) -> int:
    """FNV-1a hash of the UTF-8 encoding of ``text``, on 64 bits."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit seed from heterogeneous labels.

    Parts are rendered to text and joined with an unprintable separator so
    ("ab", "c") and ("a", "bc") hash differently.  Integers render in hex to
    keep the text form unambiguous.  The result is passed through the
    splitmix64 finalizer so structurally similar inputs decorrelate.
    """
    rendered = []
    for part in parts:
        if isinstance(part, bool):
            rendered.append(f"b:{int(part)}")
        elif isinstance(part, int):
            rendered.append(f"i:{part & _MASK64:016x}")
        else:
            rendered.append(f"s:{part}")
    return mix64(fnv1a64("\x1f".join(rendered)))


class Rng:
    """Counter-based generator: value i is ``mix64(seed + (i+1)*GOLDEN)``.

    Instances are cheap; derive a fresh one per sampling site instead of
    threading a shared stream through call chains.
    """

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._counter = 0
        self._spare_normal: float | None = None

    @property
    def seed(self) -> int:
        return self._seed

    def split(self, *labels: object) -> "Rng":
        """A statistically independent child generator for a sub-task."""
        return Rng(derive_seed(self._seed, *labels))

    def u64(self) -> int:
        self._counter += 1
        return mix64((self._seed + self._counter * GOLDEN) & _MASK64)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.u64() >> 11) * (2.0**-53)

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform float in [lo, hi)."""
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi], unbiased."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        n = hi - lo + 1
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            r = self.u64()
            if r < limit:
                return lo + r % n

    def choice(self, seq):
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.randint(0, len(seq) - 1)]

    def sign(self) -> int:
        return 1 if self.u64() & 1 else -1

    def shuffled(self, seq) -> list:
        """Fisher-Yates shuffle, returned as a new list."""
        out = list(seq)
        for i in range(len(out) - 1, 0, -1):
            j = self.randint(0, i)
            out[i], out[j] = out[j], out[i]
        return out

    def sample(self, seq, k: int) -> list:
        """k distinct elements, order given by the shuffle."""
        if k > len(seq):
            raise ValueError(f"cannot sample {k} from {len(seq)} elements")
        return self.shuffled(seq)[:k]

    def normal(self) -> float:
        """Standard normal via Box-Muller; the paired value is cached."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        # u1 in (0, 1] so the log is finite.
        u1 = ((self.u64() >> 11) + 1) * (2.0**-53)
        u2 = self.random()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def unit_vector(self, n: int) -> list[float]:
        """Uniform direction on the (n-1)-sphere."""
        while True:
            g = [self.normal() for _ in range(n)]
            norm = math.sqrt(sum(x * x for x in g))
            if norm > 1e-12:
                return [x / norm for x in g]

    def bulk_u64(self, count: int) -> np.ndarray:
        """``count`` consecutive draws as a uint64 array (vectorized)."""
        base = np.uint64(self._seed)
        idx = np.arange(self._counter + 1, self._counter + count + 1, dtype=np.uint64)
        self._counter += count
        z = base + idx * np.uint64(GOLDEN)
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
        return z

    def bulk_randint(self, lo: int, hi: int, count: int) -> np.ndarray:
        """``count`` unbiased integers in [lo, hi] as an int64 array.

        Matches the scalar rejection scheme: rejected draws are re-drawn
        from subsequent counters, so the stream stays reproducible.
        """
        n = hi - lo + 1
        limit = np.uint64(_MASK64 + 1 - ((_MASK64 + 1) % n))
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            draws = self.bulk_u64(count - filled)
            good = draws[draws < limit]
            take = good[: count - filled]
            out[filled : filled + take.size] = lo + (take % np.uint64(n)).astype(np.int64)
            filled += take.size
        return out
