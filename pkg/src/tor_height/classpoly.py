"""Hilbert class polynomials with certified integer coefficients.

The roots j((-b + sqrt(-D)) / 2a) are evaluated from the Eisenstein series E4 and E6 in
complex ball arithmetic (python-flint ``acb``); each series is truncated with a rigorous
geometric tail bound, and the expanded product is rounded coefficient by coefficient only
when every ball pins down a single integer.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple

import mpmath
import sympy
from flint import acb, arb

from tor_height.exceptions import InvalidArgumentError, PrecisionExhaustedError
from tor_height.models import ClassPolynomial, QuadraticForm
from tor_height.utils import log_abs, working_precision

logger = logging.getLogger(__name__)

MIN_EVAL_PRECISION = 64
DEFAULT_MAX_PRECISION = 1 << 16
MAX_SERIES_TERMS = 10**6

# sigma_k(n) <= zeta(k) n^k < 2 n^k for k = 3, 5
_SIGMA_MAJORANT = 2


def is_valid_discriminant(D: int) -> bool:
    return D > 0 and D % 4 in (0, 3)


def reduced_forms(D: int) -> List[QuadraticForm]:
    """Reduced primitive forms (a, b, c) with b^2 - 4ac = -D."""
    if not is_valid_discriminant(D):
        raise InvalidArgumentError(f"-{D} is not a discriminant (need D = 0 or 3 mod 4)")

    forms: List[QuadraticForm] = []
    a = 1
    while 3 * a * a <= D:
        for b in range(a, -a, -1):
            if (b - D) % 2:
                continue
            numerator = b * b + D
            if numerator % (4 * a):
                continue
            c = numerator // (4 * a)
            if c < a or (b < 0 and a == c):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            forms.append(QuadraticForm(a=a, b=b, c=c))
        a += 1
    return forms


def class_number(D: int) -> int:
    return len(reduced_forms(D))


# =============================================================================
# Modular j-function
# =============================================================================


@lru_cache(maxsize=None)
def _sigma(n: int, k: int) -> int:
    return int(sympy.divisor_sigma(n, k))


def _truncation_order(precision: int, imag_part: float) -> int:
    """Least K whose Eisenstein tail sits below 2**-precision."""
    decay = 2 * math.pi * imag_part
    target = precision * math.log(2) + 16
    K = max(1, int(target / decay))
    while decay * (K + 1) - 6 * math.log(K + 2) < target:
        K += 1
        if K > MAX_SERIES_TERMS:
            raise PrecisionExhaustedError(f"Im(tau) = {imag_part} needs too many series terms")
    return K


def _eisenstein_sum(q: acb, K: int, k: int) -> acb:
    """sum_{n>=1} sigma_k(n) q^n with the tail past K folded into the ball."""
    total = acb(0)
    for n in range(K, 0, -1):
        total = (total + _sigma(n, k)) * q

    r = abs(q)
    ratio = (arb(K + 2) / (K + 1)) ** k * r
    if not ratio < 1:
        raise PrecisionExhaustedError("series ratio bound is not below 1")
    tail = _SIGMA_MAJORANT * arb(K + 1) ** k * r ** (K + 1) / (1 - ratio)
    error = tail.union(-tail)
    return total + acb(error, error)


def cm_point(a: int, b: int, D: int) -> acb:
    """tau = (-b + i sqrt(D)) / 2a at the current working precision."""
    return acb(arb(-b) / (2 * a), arb(D).sqrt() / (2 * a))


def eval_j(tau, precision: int) -> acb:
    """Certified enclosure of j(tau) = 1728 E4^3 / (E4^3 - E6^2)."""
    if precision < MIN_EVAL_PRECISION:
        raise InvalidArgumentError(f"precision must be at least {MIN_EVAL_PRECISION} bits")
    with working_precision(precision):
        tau = acb(tau)
        if not tau.imag > 0:
            raise InvalidArgumentError("tau must lie in the upper half plane")
        K = _truncation_order(precision, float(tau.imag.mid()))
        q = (2 * arb.pi() * acb(0, 1) * tau).exp()

        e4 = 1 + 240 * _eisenstein_sum(q, K, 3)
        e6 = 1 - 504 * _eisenstein_sum(q, K, 5)
        e4_cubed = e4 ** 3
        denominator = e4_cubed - e6 ** 2
        if not abs(denominator) > 0:
            raise PrecisionExhaustedError(f"E4^3 - E6^2 not separated from 0 at {precision} bits")
        return 1728 * e4_cubed / denominator


def eval_j_at_form(form: QuadraticForm, precision: int) -> acb:
    with working_precision(precision):
        tau = cm_point(form.a, form.b, -form.discriminant)
    return eval_j(tau, precision)


# =============================================================================
# Class polynomials
# =============================================================================


def _starting_precision(D: int, forms: Sequence[QuadraticForm]) -> int:
    size = math.pi * math.sqrt(D) * (sum(1 / f.a for f in forms) + 1)
    return max(MIN_EVAL_PRECISION, int(size / math.log(2)) + 64)


def _expand(roots: Sequence[acb]) -> List[acb]:
    coefficients = [acb(1)]
    for root in roots:
        shifted = [acb(0)] + coefficients
        for i, c in enumerate(coefficients):
            shifted[i] -= root * c
        coefficients = shifted
    return coefficients


def _round_certified(coefficients: Sequence[acb]) -> List[int] | None:
    quarter = arb(1) / 4
    rounded: List[int] = []
    for c in coefficients:
        if not (c.real.rad() < quarter and c.imag.rad() < quarter):
            return None
        if abs(c.imag) > 0:
            return None
        integer = c.real.unique_fmpz()
        if integer is None:
            return None
        rounded.append(int(integer))
    return rounded


@lru_cache(maxsize=512)
def hilbert_class_polynomial(D: int, max_precision: int = DEFAULT_MAX_PRECISION) -> ClassPolynomial:
    """Monic P_D in Z[x], coefficients lowest degree first."""
    forms = reduced_forms(D)
    precision = _starting_precision(D, forms)
    while precision <= max_precision:
        try:
            with working_precision(precision):
                roots = [eval_j_at_form(form, precision) for form in forms]
                coefficients = _round_certified(_expand(roots))
        except PrecisionExhaustedError:
            coefficients = None
        if coefficients is not None:
            logger.debug(f"P_{D}: degree {len(forms)} certified at {precision} bits")
            return ClassPolynomial(D=D, coefficients=coefficients, precision_bits=precision)
        logger.info(f"P_{D}: rounding not certified at {precision} bits, doubling")
        precision *= 2
    raise PrecisionExhaustedError(f"P_{D} not certified below {max_precision} bits")


def evaluate_at_rational(P: ClassPolynomial, j: Fraction) -> Fraction:
    value = Fraction(0)
    for c in reversed(P.coefficients):
        value = value * j + c
    return value


def real_root_count(P: ClassPolynomial) -> int:
    """Number of distinct real roots, from the Sturm sequence of the exact polynomial."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(P.coefficients)), x)
    chain = sympy.sturm(poly)

    def sign_changes(signs: Sequence[int]) -> int:
        nonzero = [s for s in signs if s]
        return sum(1 for s, t in zip(nonzero, nonzero[1:]) if s != t)

    at_plus = [sympy.sign(f.LC()) for f in chain]
    at_minus = [sympy.sign(f.LC()) * (-1) ** f.degree() for f in chain]
    return sign_changes(at_minus) - sign_changes(at_plus)


def class_number_bound(ell: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """(2 sqrt(ell) / 2 pi)(2 + log ell) and the coarser 3 sqrt(ell) log(ell) / pi."""
    root = mpmath.sqrt(ell)
    log_ell = mpmath.log(ell)
    return root / mpmath.pi * (2 + log_ell), 3 * root * log_ell / mpmath.pi


def fouvry_murty_log_bound(j: Fraction, ell: int, h_ell: int) -> mpmath.mpf:
    """3 C sqrt(ell) (log ell)^2 + 4 h_ell with C = 10^10 log(|j| + 745)."""
    abs_j = mpmath.mpf(abs(j.numerator)) / j.denominator
    C = mpmath.mpf(10) ** 10 * mpmath.log(abs_j + 745)
    return 3 * C * mpmath.sqrt(ell) * mpmath.log(ell) ** 2 + 4 * h_ell


def log_abs_product(j: Fraction, ell: int) -> mpmath.mpf:
    """log |P_ell(j) P_4ell(j)|; -inf when j is a root."""
    value = evaluate_at_rational(hilbert_class_polynomial(ell), j) * evaluate_at_rational(
        hilbert_class_polynomial(4 * ell), j
    )
    if value == 0:
        return mpmath.ninf
    return log_abs(value)
