"""Compositional-generalization statistics over perturbation pairs.

Given per-condition success rates s(a, b) for a pair of perturbation
indicators (D_i, D_j), conditioning on success turns the rate table into a
probability table p(a, b | Y=1) = s(a, b) / T with T the table sum.  The
compositionality gap

    delta = p(1,1|Y=1) - p(D_i=1|Y=1) * p(D_j=1|Y=1)

is the success-conditioned covariance of the two indicators: zero exactly
when s00*s11 = s01*s10 (odds ratio one), negative when the perturbations
hurt more jointly than independence predicts.

The chi-square test follows the standard 2x2 independence construction on
counts, expected cell = row total * column total / n, no continuity
correction, p-value from the dof-1 survival function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateTableError, PerturbenchError
from .special import chi_square_sf


@dataclass(frozen=True)
class PairSuccessTable:
    """Success rates for the four conditions of a perturbation pair.

    Index convention: ``s_ab`` is the rate with D_i = a and D_j = b.
    ``n_trials`` is the per-condition trial count behind each rate.
    """

    s00: float
    s01: float
    s10: float
    s11: float
    n_trials: int = 1

    def __post_init__(self):
        for name in ("s00", "s01", "s10", "s11"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value} outside [0, 1]")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")

    def swapped(self) -> "PairSuccessTable":
        """The same table with the two dimensions exchanged."""
        return PairSuccessTable(self.s00, self.s10, self.s01, self.s11, self.n_trials)


@dataclass(frozen=True)
class CompGapResult:
    p_joint: float
    p_i: float
    p_j: float
    delta: float


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    p_value: float
    counts: tuple[int, int, int, int]  # n00, n01, n10, n11


def success_conditioned(table: PairSuccessTable) -> CompGapResult:
    """Success-conditioned joint/marginal probabilities and the gap."""
    total = table.s00 + table.s01 + table.s10 + table.s11
    if total <= 0.0:
        raise DegenerateTableError("all-zero success table: conditioning undefined")
    # Marginals are sums of cell probabilities, not ratios of summed scores,
    # so the additive decompositions hold exactly in floating point.
    p01 = table.s01 / total
    p10 = table.s10 / total
    p11 = table.s11 / total
    p_i = p10 + p11
    p_j = p01 + p11
    return CompGapResult(p_joint=p11, p_i=p_i, p_j=p_j, delta=p11 - p_i * p_j)


def contingency_from_rates(table: PairSuccessTable) -> tuple[int, int, int, int]:
    """Counts n_ab = round(s_ab * n_trials), rounding half to even."""
    return (
        round(table.s00 * table.n_trials),
        round(table.s01 * table.n_trials),
        round(table.s10 * table.n_trials),
        round(table.s11 * table.n_trials),
    )


def chi_square(n00: int, n01: int, n10: int, n11: int) -> ChiSquareResult:
    """2x2 independence test on success counts."""
    counts = (n00, n01, n10, n11)
    if any(c < 0 for c in counts):
        raise ValueError(f"negative count in {counts}")
    observed = ((n00, n01), (n10, n11))
    row = (n00 + n01, n10 + n11)
    col = (n00 + n10, n01 + n11)
    n = row[0] + row[1]
    if not all(row) or not all(col):
        raise DegenerateTableError(
            f"zero marginal in table {counts}: expected counts undefined"
        )
    statistic = 0.0
    for r in range(2):
        for c in range(2):
            expected = row[r] * col[c] / n
            diff = observed[r][c] - expected
            statistic += diff * diff / expected
    return ChiSquareResult(
        statistic=statistic, p_value=chi_square_sf(statistic, dof=1), counts=counts
    )


def pairwise_heatmap(
    results: Mapping[tuple[str, str], PairSuccessTable],
    dimensions: Sequence[str] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """The independence-vs-joint matrix pair behind the pairwise heatmap.

    Returns (matrix, gap).  For dimension indices i < j the matrix holds
    the independence product p_i * p_j above the diagonal and the observed
    joint p(1,1|Y=1) below it; the diagonal is NaN.  ``gap`` is symmetric:
    joint minus product for every pair.

    Pair keys may be given in either orientation; a reversed key is
    interpreted with the roles of the two dimensions exchanged.
    """
    if dimensions is None:
        seen: list[str] = []
        for a, b in results:
            for name in (a, b):
                if name not in seen:
                    seen.append(name)
        dimensions = seen
    dims = list(dimensions)
    n = len(dims)
    matrix = np.full((n, n), np.nan)
    gap = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i + 1, n):
            table = results.get((dims[i], dims[j]))
            if table is None:
                reverse = results.get((dims[j], dims[i]))
                if reverse is None:
                    raise PerturbenchError(
                        f"missing pair table for ({dims[i]}, {dims[j]})"
                    )
                table = reverse.swapped()
            r = success_conditioned(table)
            matrix[i, j] = r.p_i * r.p_j
            matrix[j, i] = r.p_joint
            gap[i, j] = r.delta
            gap[j, i] = r.delta
    return matrix, gap
