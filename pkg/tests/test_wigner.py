"""Exact 3j oracle: frozen values, symmetries, and a sympy cross-check."""

import math
from fractions import Fraction

import pytest

from zeitlin.wigner import threej


def closed_form_j1j(j, m):
    """(j 1 j; m 0 -m) = (-1)^(j+m+1) m / sqrt(j (j+1) (2j+1))."""
    return (-1.0) ** int(j + m + 1) * m / math.sqrt(j * (j + 1) * (2 * j + 1))


def closed_form_jj0(j, m):
    """(j j 0; m -m 0) = (-1)^(j-m) / sqrt(2j+1)."""
    return (-1.0) ** int(j - m) / math.sqrt(2 * j + 1)


def test_frozen_values():
    assert threej(1, 1, 2, 0, 0, 0) == pytest.approx(math.sqrt(2.0 / 15.0), abs=1e-15)
    assert threej(1, 1, 0, 0, 0, 0) == pytest.approx(-1.0 / math.sqrt(3.0), abs=1e-15)
    assert threej(2, 6, 4, 0, 0, 0) == pytest.approx(math.sqrt(715.0) / 143.0, abs=1e-15)
    assert threej(2, 6, 4, 0, 0, 1) == 0.0


@pytest.mark.parametrize("j", [0.5, 1, 1.5, 2, 3.5, 5])
def test_closed_form_families(j):
    two_j = int(2 * j)
    for two_m in range(-two_j, two_j + 1, 2):
        m = two_m / 2.0
        assert threej(j, 1, j, m, 0, -m) == pytest.approx(closed_form_j1j(j, m), abs=1e-14)
        assert threej(j, j, 0, m, -m, 0) == pytest.approx(closed_form_jj0(j, m), abs=1e-14)


def test_selection_rules():
    assert threej(1, 1, 1, 1, 1, 1) == 0.0  # m sum nonzero
    assert threej(1, 1, 3, 0, 0, 0) == 0.0  # triangle violated
    assert threej(1, 2, 1, 2, -2, 0) == 0.0  # |m| > j
    assert threej(1, 1, 2, 0.5, -0.5, 0) == 0.0  # m not integral relative to j
    assert threej(1, 1, 2, 1, 1, -2) != 0.0


def test_invalid_arguments():
    with pytest.raises(ValueError):
        threej(0.3, 1, 1, 0, 0, 0)
    with pytest.raises(ValueError):
        threej(1, 1, 1, 0.25, -0.25, 0)
    with pytest.raises(ValueError):
        threej(-1, 1, 1, 0, 0, 0)


def test_fraction_arguments():
    a = threej(Fraction(3, 2), 2, Fraction(3, 2), Fraction(-1, 2), 1, Fraction(-1, 2))
    b = threej(1.5, 2, 1.5, -0.5, 1, -0.5)
    assert a == b


def test_even_permutation_invariance(rng):
    cases = [(1, 2, 3, 0, 1, -1), (1.5, 1, 1.5, 0.5, 0, -0.5), (2, 2, 2, 1, -1, 0)]
    for j1, j2, j3, m1, m2, m3 in cases:
        v = threej(j1, j2, j3, m1, m2, m3)
        assert threej(j2, j3, j1, m2, m3, m1) == pytest.approx(v, abs=1e-15)
        assert threej(j3, j1, j2, m3, m1, m2) == pytest.approx(v, abs=1e-15)


def test_odd_permutation_and_inversion_sign():
    cases = [(1, 2, 3, 0, 1, -1), (1.5, 1, 1.5, 0.5, 0, -0.5), (2, 2, 2, 1, -1, 0)]
    for j1, j2, j3, m1, m2, m3 in cases:
        v = threej(j1, j2, j3, m1, m2, m3)
        sign = (-1.0) ** int(j1 + j2 + j3)
        assert threej(j2, j1, j3, m2, m1, m3) == pytest.approx(sign * v, abs=1e-15)
        assert threej(j1, j2, j3, -m1, -m2, -m3) == pytest.approx(sign * v, abs=1e-15)


@pytest.mark.parametrize("j1,j2,j3", [(1, 1, 2), (1.5, 1, 1.5), (2, 3, 4), (2.5, 2, 1.5)])
def test_orthogonality_sum(j1, j2, j3):
    # sum over m1, m3 of (2 j2 + 1) threej^2 at fixed m2 equals 1
    for two_m2 in range(-int(2 * j2), int(2 * j2) + 1, 2):
        m2 = two_m2 / 2.0
        total = 0.0
        for two_m1 in range(-int(2 * j1), int(2 * j1) + 1, 2):
            m1 = two_m1 / 2.0
            total += (2 * j2 + 1) * threej(j1, j2, j3, m1, m2, -m1 - m2) ** 2
        assert total == pytest.approx(1.0, abs=1e-13)


def test_against_sympy():
    sympy_wigner = pytest.importorskip("sympy.physics.wigner")
    from sympy import Rational

    cases = [
        (1, 1, 2, 0, 0, 0),
        (2, 3, 4, 1, -2, 1),
        (5, 4, 3, 2, -2, 0),
        (Rational(7, 2), 3, Rational(5, 2), Rational(1, 2), -1, Rational(1, 2)),
        (Rational(15, 2), 8, Rational(15, 2), Rational(-3, 2), 2, Rational(-1, 2)),
    ]
    for args in cases:
        want = float(sympy_wigner.wigner_3j(*args))
        got = threej(*[Fraction(str(a)) if not isinstance(a, int) else a for a in args])
        assert got == pytest.approx(want, abs=1e-14)
