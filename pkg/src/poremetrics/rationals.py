"""Exact rational parsing, formatting and power helpers.

All cube geometry and 1-D integral bookkeeping runs on
:class:`fractions.Fraction`.  Floats appear only when a rational power of a
rational is irrational, and callers are expected to widen such values into
explicit brackets.
"""

from __future__ import annotations

import math
from fractions import Fraction


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, an integer literal, or a terminating decimal, exactly."""
    s = text.strip()
    if not s:
        raise ValueError("empty rational literal")
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num.strip()), int(den.strip()))
    # Fraction parses decimal strings exactly ("0.125" -> 1/8).
    return Fraction(s)


def format_rational(x: Fraction) -> str:
    """Canonical ``"p/q"`` form used by every file format in this package."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def int_nth_root(m: int, k: int) -> int | None:
    """Exact integer k-th root of ``m`` if one exists, else ``None``."""
    if m < 0 or k <= 0:
        raise ValueError("int_nth_root needs m >= 0, k >= 1")
    if m in (0, 1) or k == 1:
        return m
    if k == 2:
        r = math.isqrt(m)
        return r if r * r == m else None
    # Newton iteration on integers, seeded from a float estimate.
    r = max(1, int(round(m ** (1.0 / k))))
    while r**k > m:
        r = ((k - 1) * r + m // r ** (k - 1)) // k
    while (r + 1) ** k <= m:
        r += 1
    return r if r**k == m else None


def rational_pow(x: Fraction, e: Fraction) -> Fraction | None:
    """``x**e`` as an exact Fraction when the result is rational, else None.

    Requires ``x >= 0``; ``0**e`` is defined for ``e >= 0`` only (callers must
    intercept the divergent ``0**negative`` case themselves).
    """
    x = Fraction(x)
    e = Fraction(e)
    if x < 0:
        raise ValueError("rational_pow requires a nonnegative base")
    if x == 0:
        if e > 0:
            return Fraction(0)
        if e == 0:
            return Fraction(1)
        raise ZeroDivisionError("0 raised to a negative power")
    a, b = e.numerator, e.denominator
    if b == 1:
        return x**a
    rn = int_nth_root(x.numerator, b)
    if rn is None:
        return None
    rd = int_nth_root(x.denominator, b)
    if rd is None:
        return None
    return Fraction(rn, rd) ** a


def power_value(x: Fraction, e: Fraction) -> Fraction | float:
    """``x**e`` exactly when rational, otherwise as a float."""
    exact = rational_pow(x, e)
    if exact is not None:
        return exact
    return float(x) ** float(e)


def sqrt_bracket(x: Fraction, bits: int = 60) -> tuple[Fraction, Fraction]:
    """Rational ``(lo, hi)`` with ``lo <= sqrt(x) <= hi`` and relative width ~2**-bits."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt_bracket requires x >= 0")
    if x == 0:
        return Fraction(0), Fraction(0)
    scale = 1 << bits
    n = (x.numerator * scale * scale) // x.denominator
    r = math.isqrt(n)
    lo = Fraction(r, scale)
    hi = Fraction(r + 1, scale)
    return lo, hi
