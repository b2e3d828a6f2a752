"""Exact Wigner 3j symbols by the Racah single-sum formula.

All factorials and the alternating sum are evaluated in exact integer and
rational arithmetic, so the square of the symbol is an exact rational and
the only floating-point rounding is one final square root.  This is
feasible for the small truncation sizes where the closed-form basis is
used as an oracle; for large arguments the factorials grow beyond any
sensible floating-point evaluation, which is exactly why the production
basis is built from tridiagonal eigenproblems instead.

Arguments may be integers or half-integers, passed as int, float, or
Fraction.  Selection-rule violations return exactly 0.0; arguments that
are not half-integral raise ValueError.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, sqrt

__all__ = ["threej"]


def _twice(x, name: str) -> int:
    t = Fraction(x) * 2
    if t.denominator != 1:
        raise ValueError(f"{name} must be an integer or half-integer, got {x!r}")
    return int(t)


def _fact2(two_k: int) -> int:
    """(k)! for a doubled argument known to be even and nonnegative."""
    return factorial(two_k // 2)


def threej(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3), exact up to one square root."""
    tj1, tj2, tj3 = _twice(j1, "j1"), _twice(j2, "j2"), _twice(j3, "j3")
    tm1, tm2, tm3 = _twice(m1, "m1"), _twice(m2, "m2"), _twice(m3, "m3")
    if tj1 < 0 or tj2 < 0 or tj3 < 0:
        raise ValueError("j values must be nonnegative")

    # selection rules
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tj3 + tm3) % 2:
        return 0.0  # m not integral relative to j
    if tj1 + tj2 - tj3 < 0 or tj1 - tj2 + tj3 < 0 or -tj1 + tj2 + tj3 < 0:
        return 0.0

    # alternating single sum; every factorial argument below is an integer
    t_min = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    t_max = min(
        (tj1 + tj2 - tj3) // 2,
        (tj1 - tm1) // 2,
        (tj2 + tm2) // 2,
    )
    if t_max < t_min:
        return 0.0
    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        den = (
            factorial(t)
            * factorial((tj3 - tj2 + tm1) // 2 + t)
            * factorial((tj3 - tj1 - tm2) // 2 + t)
            * factorial((tj1 + tj2 - tj3) // 2 - t)
            * factorial((tj1 - tm1) // 2 - t)
            * factorial((tj2 + tm2) // 2 - t)
        )
        total += Fraction(-1 if t % 2 else 1, den)
    if total == 0:
        return 0.0

    delta = Fraction(
        _fact2(tj1 + tj2 - tj3) * _fact2(tj1 - tj2 + tj3) * _fact2(-tj1 + tj2 + tj3),
        _fact2(tj1 + tj2 + tj3 + 2),
    )
    norm = (
        _fact2(tj1 + tm1)
        * _fact2(tj1 - tm1)
        * _fact2(tj2 + tm2)
        * _fact2(tj2 - tm2)
        * _fact2(tj3 + tm3)
        * _fact2(tj3 - tm3)
    )
    square = delta * norm * total * total  # exact value of the squared symbol

    sign = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    if total < 0:
        sign = -sign
    return sign * sqrt(float(square))
