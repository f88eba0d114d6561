from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator

import flint
import mpmath


@contextmanager
def working_precision(bits: int) -> Iterator[int]:
    """Temporarily set the python-flint working precision."""
    saved = flint.ctx.prec
    flint.ctx.prec = bits
    try:
        yield bits
    finally:
        flint.ctx.prec = saved


def log_abs(value: Fraction) -> mpmath.mpf:
    """log |value| for a non-zero rational, without converting through floats."""
    if value == 0:
        raise ValueError("log of zero")
    return mpmath.log(abs(value.numerator)) - mpmath.log(value.denominator)


def to_arb(value: mpmath.mpf, digits: int = 60, slack_bits: int = 8) -> flint.arb:
    """Ball around an mpmath real computed at ``mp.prec``; the radius covers its rounding."""
    text = mpmath.nstr(value, digits, strip_zeros=False)
    center = flint.arb(text)
    relative = flint.arb(2) ** (slack_bits - mpmath.mp.prec) + flint.arb(10) ** (1 - digits)
    return center + flint.arb(0, abs(center) * relative)


def _parse_slack() -> mpmath.mpf:
    # 40 printed digits, then parsing at mp.prec
    return mpmath.mpf(10) ** -38 + mpmath.ldexp(1, 2 - mpmath.mp.prec)


def arb_upper(value: flint.arb) -> mpmath.mpf:
    """Upper endpoint of a ball as an mpmath real."""
    text = value.upper().str(40, radius=False)
    result = mpmath.mpf(text)
    return result + abs(result) * _parse_slack()


def arb_lower(value: flint.arb) -> mpmath.mpf:
    text = value.lower().str(40, radius=False)
    result = mpmath.mpf(text)
    return result - abs(result) * _parse_slack()
