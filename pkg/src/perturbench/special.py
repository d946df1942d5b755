"""Regularized incomplete gamma functions, implemented from scratch.

Only the upper tail Q(a, x) is needed here (chi-square survival values),
but P is exposed too since the series computes it naturally.  Algorithm is
the classic split: for x < a + 1 the power series for P converges quickly;
for x >= a + 1 the Lentz-evaluated continued fraction for Q does.  Both
carry the gamma prefactor in log space via ``math.lgamma`` to avoid
overflow.  Double-precision accuracy is ~1e-14 relative, comfortably
inside the 1e-9 the statistics layer requires.
"""

from __future__ import annotations

import math

_MAX_ITERATIONS = 500
_EPS = 1e-16
_TINY = 1e-300


def _gamma_series(a: float, x: float) -> float:
    """P(a, x) by power series; requires 0 <= x < a + 1."""
    if x == 0.0:
        return 0.0
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITERATIONS):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    return total * math.exp(log_prefactor)


def _gamma_continued_fraction(a: float, x: float) -> float:
    """Q(a, x) by continued fraction (modified Lentz); requires x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITERATIONS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    return math.exp(log_prefactor) * h


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be non-negative, got {x}")
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_continued_fraction(a, x)


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be non-negative, got {x}")
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_continued_fraction(a, x)


def chi_square_sf(statistic: float, dof: int = 1) -> float:
    """Survival function P(X >= statistic) of the chi-square distribution.

    For dof = 1 this equals erfc(sqrt(statistic / 2)).
    """
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    if statistic < 0.0:
        raise ValueError(f"chi-square statistic must be >= 0, got {statistic}")
    return gammainc_upper(dof / 2.0, statistic / 2.0)
