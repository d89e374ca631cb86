"""Small arithmetic helpers shared by the exact (Fraction) and float backends."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

Number = Union[Fraction, float]

FLOAT_TOL = 1e-12


def num(x) -> Number:
    """Coerce ints and rationals to Fraction, leave floats alone."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        return parse_number(x)
    return float(x)


def is_exact(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact(v) for v in values)


def rising(x, k: int):
    """Rising factorial (x)_k = x (x+1) ... (x+k-1); (x)_0 = 1."""
    out = Fraction(1) if is_exact(x) else 1.0
    for i in range(k):
        out *= x + i
    return out


def binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def parse_number(s: str) -> Number:
    """'1/2' and '3' parse exactly; anything with a decimal point or exponent is a float."""
    s = s.strip()
    if "/" in s:
        a, b = s.split("/", 1)
        return Fraction(int(a), int(b))
    try:
        return Fraction(int(s))
    except ValueError:
        return float(s)


def fmt(x) -> str:
    if is_exact(x):
        x = Fraction(x)
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return format(float(x), ".17g")


def close(a, b, tol: float = FLOAT_TOL) -> bool:
    """Exact equality when both sides are exact, absolute tolerance otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= tol


def harmonic(theta, n: int):
    """Generalised harmonic number sum_{k=1}^n 1/(theta+k-1)."""
    out = Fraction(0) if is_exact(theta) else 0.0
    for k in range(1, n + 1):
        out += 1 / (theta + k - 1) if not is_exact(theta) else Fraction(1) / (theta + k - 1)
    return out
