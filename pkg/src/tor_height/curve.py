"""Weierstrass invariants, reduction mod p, Frobenius traces and j-height thresholds."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, Tuple

import mpmath
import sympy
from pydantic import BaseModel, ConfigDict

from tor_height.arith import is_prime
from tor_height.exceptions import (
    BadReductionError,
    InvalidArgumentError,
    SingularModelError,
    UnsupportedPrimeError,
)
from tor_height.models import CurveInvariants, Real, WeierstrassModel

logger = logging.getLogger(__name__)

MIN_CONDUCTOR = 11

# The 13 rational j-invariants of curves with complex multiplication.
CM_J_INVARIANTS = frozenset(
    Fraction(j)
    for j in (
        0,
        1728,
        -3375,
        8000,
        -32768,
        54000,
        287496,
        -884736,
        -12288000,
        16581375,
        -884736000,
        -147197952000,
        -262537412640768000,
    )
)

NAIVE_COUNT_LIMIT = 2000


def parse_model(text: str) -> WeierstrassModel:
    """Parse ``a1,a2,a3,a4,a6`` with integer or ``p/q`` entries."""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 5 or any(not part for part in parts):
        raise InvalidArgumentError(f"expected five comma-separated coefficients, got {text!r}")
    try:
        values = [Fraction(part) for part in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidArgumentError(f"invalid rational coefficient in {text!r}") from exc
    return WeierstrassModel(a1=values[0], a2=values[1], a3=values[2], a4=values[3], a6=values[4])


def _b_invariants(a1, a2, a3, a4, a6) -> Dict[str, Fraction]:
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    delta = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return {"b2": b2, "b4": b4, "b6": b6, "b8": b8, "c4": c4, "c6": c6, "delta": delta}


def discriminant(model: WeierstrassModel) -> Fraction:
    return _b_invariants(*model.coefficients())["delta"]


def j_height(j: Fraction) -> mpmath.mpf:
    """h(num/den) = log max(|num|, |den|)."""
    return mpmath.log(max(abs(j.numerator), abs(j.denominator)))


def is_cm_j(j: Fraction) -> bool:
    return j in CM_J_INVARIANTS


def compute_invariants(
    model: WeierstrassModel, conductor: int, *, cm: bool = False
) -> CurveInvariants:
    if conductor < MIN_CONDUCTOR:
        raise InvalidArgumentError(
            f"conductor {conductor} is impossible; every elliptic curve over Q has N >= 11"
        )
    inv = _b_invariants(*model.coefficients())
    if inv["delta"] == 0:
        raise SingularModelError(f"model {model.label()} is singular")

    j = inv["c4"] ** 3 / inv["delta"]
    h_j = max(mpmath.log(2), j_height(j))
    return CurveInvariants(**inv, j=j, conductor=conductor, h_j=h_j, has_cm=cm or is_cm_j(j))


def integral_model(model: WeierstrassModel) -> Tuple[Tuple[int, ...], int]:
    """Scale by the least u with u**i * a_i integral; returns the integer a_i and u."""
    u = 1
    weights = (1, 2, 3, 4, 6)
    primes = set()
    for coefficient in model.coefficients():
        primes.update(int(p) for p in sympy.primefactors(coefficient.denominator))
    for p in primes:
        exponent = 0
        for weight, coefficient in zip(weights, model.coefficients()):
            valuation = sympy.multiplicity(p, coefficient.denominator)
            exponent = max(exponent, -(-valuation // weight))
        u *= p ** exponent

    scaled = [a * u**weight for weight, a in zip(weights, model.coefficients())]
    return tuple(int(a) for a in scaled), u


def has_good_reduction(model: WeierstrassModel, p: int) -> bool:
    coefficients, _ = integral_model(model)
    return _b_invariants(*(Fraction(a) for a in coefficients))["delta"] % p != 0


def _check_odd_prime(p: int) -> None:
    if p < 3 or not is_prime(p):
        raise InvalidArgumentError(f"{p} is not an odd prime")


def trace_of_frobenius(model: WeierstrassModel, p: int) -> int:
    """a_p = p + 1 - #E(F_p) by summing Legendre symbols of 4x^3 + b2 x^2 + 2 b4 x + b6."""
    _check_odd_prime(p)
    coefficients, _ = integral_model(model)
    inv = _b_invariants(*(Fraction(a) for a in coefficients))
    if inv["delta"] % p == 0:
        raise BadReductionError(f"{p} divides the discriminant of the integral model")

    logger.debug(f"counting points of {model.label()} mod {p}")
    b2, b4, b6 = (int(inv[name]) % p for name in ("b2", "b4", "b6"))
    two_b4 = 2 * b4 % p

    is_square = bytearray(p)
    for x in range(1, (p + 1) // 2):
        is_square[x * x % p] = 1

    total = 0
    for x in range(p):
        value = (((4 * x + b2) * x + two_b4) * x + b6) % p
        if value:
            total += 1 if is_square[value] else -1
    return -total


def count_points_naive(model: WeierstrassModel, p: int) -> int:
    """#E(F_p) by enumerating every affine pair plus the point at infinity."""
    _check_odd_prime(p)
    if p > NAIVE_COUNT_LIMIT:
        raise InvalidArgumentError(f"naive counting is limited to p <= {NAIVE_COUNT_LIMIT}")
    a1, a2, a3, a4, a6 = (a % p for a in integral_model(model)[0])
    count = 1
    for x in range(p):
        rhs = (((x + a2) * x + a4) * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                count += 1
    return count


def is_supersingular(model: WeierstrassModel, p: int) -> bool:
    if p < 5:
        raise UnsupportedPrimeError(f"supersingularity via a_p = 0 is only used for p >= 5, got {p}")
    return trace_of_frobenius(model, p) == 0


def b_e_threshold(j: Fraction) -> mpmath.mpf:
    """B_E above which P_ell(j) > 0 and P_4ell(j) < 0."""
    if j == 0:
        return mpmath.mpf(0)
    log_abs = mpmath.log(abs(j.numerator)) - mpmath.log(j.denominator)
    if j > 0:
        return (log_abs / (2 * mpmath.pi)) ** 2
    return (log_abs / mpmath.pi + 1) ** 2


def surjectivity_threshold(h_j) -> int:
    """ceil(10**7 max{985, h_j/12 + 3}**2), quoted from Le Fourn."""
    if h_j < 0:
        raise InvalidArgumentError("h_j must be non-negative")
    with mpmath.workprec(256):
        inner = mpmath.mpf(h_j) / 12 + 3
        if inner <= 985:
            return 10**7 * 985**2
        return int(mpmath.ceil(10**7 * inner**2))


class ConductorHeight(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    conductor: int
    h_E: Real
    chain: Real
    cap: Real


def j_height_from_conductor(N: int) -> ConductorHeight:
    """Von Kaenel's chain for max(log 2, h(j_E)) and the simplified cap 10 N log N."""
    if N < MIN_CONDUCTOR:
        raise InvalidArgumentError(f"conductor {N} < 11 does not occur")
    log_n = mpmath.log(N)
    # log log log N is negative for N <= 15 and is kept as is
    h_e = (
        N / mpmath.mpf(12) * log_n
        + N / mpmath.mpf(32) * mpmath.log(mpmath.log(log_n))
        + N / mpmath.mpf(18)
        + 2 * mpmath.pi
        + mpmath.log(163 / mpmath.pi) / 2
    )
    chain = 12 * h_e + 6 * mpmath.log(max(mpmath.mpf(1), h_e)) + mpmath.mpf("75.84")
    return ConductorHeight(conductor=N, h_E=h_e, chain=chain, cap=10 * N * log_n)
