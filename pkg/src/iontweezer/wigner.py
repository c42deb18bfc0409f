"""Wigner 3j and 6j symbols from the Racah closed forms, in exact rational arithmetic.

Each symbol is carried as ``sign * S * sqrt(P)`` with rational ``S`` and
``P`` so that squared symbols (all that line strengths need) stay exact.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


def half_int(x) -> Fraction:
    f = Fraction(x)
    if f.denominator not in (1, 2):
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return f


def _fact(x: Fraction) -> int:
    if x.denominator != 1 or x < 0:
        raise ValueError("negative or fractional factorial argument")
    return math.factorial(int(x))


def _triangle(a: Fraction, b: Fraction, c: Fraction) -> bool:
    return (a + b + c).denominator == 1 and abs(a - b) <= c <= a + b


def _delta(a, b, c) -> Fraction:
    return Fraction(_fact(a + b - c) * _fact(a - b + c) * _fact(-a + b + c), _fact(a + b + c + 1))


def _check_j(*js):
    for j in js:
        if j < 0:
            raise ValueError(f"negative angular momentum {j}")


def _check_jm(j, m):
    if abs(m) > j or (j - m).denominator != 1:
        raise ValueError(f"invalid projection m={m} for j={j}")


@lru_cache(maxsize=None)
def wigner_3j_exact(j1, j2, j3, m1, m2, m3) -> tuple[Fraction, Fraction]:
    """Return (S, P) with (j1 j2 j3; m1 m2 m3) = S * sqrt(P)."""
    j1, j2, j3, m1, m2, m3 = map(half_int, (j1, j2, j3, m1, m2, m3))
    _check_j(j1, j2, j3)
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        _check_jm(j, m)
    if m1 + m2 + m3 != 0 or not _triangle(j1, j2, j3):
        return Fraction(0), Fraction(1)
    p = _delta(j1, j2, j3) * (
        _fact(j1 + m1) * _fact(j1 - m1) * _fact(j2 + m2) * _fact(j2 - m2) * _fact(j3 + m3) * _fact(j3 - m3)
    )
    kmin = max(0, int(j2 - j3 - m1), int(j1 - j3 + m2))
    kmax = min(int(j1 + j2 - j3), int(j1 - m1), int(j2 + m2))
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            math.factorial(k)
            * _fact(j3 - j2 + k + m1)
            * _fact(j3 - j1 + k - m2)
            * _fact(j1 + j2 - j3 - k)
            * _fact(j1 - k - m1)
            * _fact(j2 - k + m2)
        )
        s += Fraction((-1) ** k, den)
    phase = j1 - j2 - m3
    if int(phase) % 2:
        s = -s
    return s, p


@lru_cache(maxsize=None)
def wigner_6j_exact(j1, j2, j3, j4, j5, j6) -> tuple[Fraction, Fraction]:
    """Return (S, P) with {j1 j2 j3; j4 j5 j6} = S * sqrt(P)."""
    j1, j2, j3, j4, j5, j6 = map(half_int, (j1, j2, j3, j4, j5, j6))
    _check_j(j1, j2, j3, j4, j5, j6)
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(_triangle(*t) for t in triads):
        return Fraction(0), Fraction(1)
    p = Fraction(1)
    for t in triads:
        p *= _delta(*t)
    sums = [sum(t) for t in triads]
    tops = [j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4]
    s = Fraction(0)
    for t in range(int(max(sums)), int(min(tops)) + 1):
        den = math.prod(_fact(t - a) for a in sums) * math.prod(_fact(b - t) for b in tops)
        s += Fraction((-1) ** t * math.factorial(t + 1), den)
    return s, p


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    s, p = wigner_3j_exact(j1, j2, j3, m1, m2, m3)
    return float(s) * math.sqrt(p)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    s, p = wigner_6j_exact(j1, j2, j3, j4, j5, j6)
    return float(s) * math.sqrt(p)


def wigner_3j_sq(*args) -> Fraction:
    s, p = wigner_3j_exact(*args)
    return s * s * p


def wigner_6j_sq(*args) -> Fraction:
    s, p = wigner_6j_exact(*args)
    return s * s * p
