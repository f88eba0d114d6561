"""Algebraic numbers given by minimal polynomials, for testing the sum and height bounds.

Roots come from ``fmpz_poly.complex_roots`` (certified isolating enclosures), so heights
and conjugate sums are arb balls rather than floating point guesses.
"""

from __future__ import annotations

import logging
import random
from functools import lru_cache
from math import gcd
from typing import List, Optional, Tuple

import mpmath
import sympy
from flint import acb, arb, fmpz_poly
from pydantic import BaseModel, ConfigDict, Field

from tor_height.exceptions import InvalidArgumentError, PrecisionExhaustedError
from tor_height.models import Real
from tor_height.utils import arb_lower, arb_upper, to_arb, working_precision

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_PRECISION = 128
COEFFICIENT_RANGE = (-20, 20)
DEGREE_RANGE = (2, 8)
MAX_ATTEMPT_FACTOR = 200


@lru_cache(maxsize=None)
def _cyclotomic_coefficients(m: int) -> Tuple[int, ...]:
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.cyclotomic_poly(m, x), x)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def is_cyclotomic(coefficients: List[int]) -> bool:
    """True when the primitive polynomial is +-Phi_m for some m."""
    d = len(coefficients) - 1
    sign = 1 if coefficients[-1] > 0 else -1
    normalized = tuple(sign * c for c in coefficients)
    # phi(m) >= sqrt(m / 2)
    for m in range(1, 2 * d * d + 3):
        if int(sympy.totient(m)) == d and _cyclotomic_coefficients(m) == normalized:
            return True
    return False


def _max_zero_log(log_modulus: arb) -> arb:
    """Enclosure of max(0, log|r|)."""
    if log_modulus > 0:
        return log_modulus
    if log_modulus < 0:
        return arb(0)
    return arb(0).union(log_modulus.upper())


class AlgebraicSample(BaseModel):
    """beta with primitive irreducible minimal polynomial, coefficients lowest degree first."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    coefficients: List[int]
    precision_bits: int = DEFAULT_SAMPLE_PRECISION
    height: Real
    height_lower: Real
    height_upper: Real
    roots: List[acb] = Field(default_factory=list, exclude=True)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> int:
        return self.coefficients[-1]

    def value_at_one(self) -> int:
        return sum(self.coefficients)

    @classmethod
    def from_coefficients(
        cls,
        coefficients: List[int],
        *,
        precision: int = DEFAULT_SAMPLE_PRECISION,
        check_irreducible: bool = True,
    ) -> "AlgebraicSample":
        coefficients = [int(c) for c in coefficients]
        while coefficients and coefficients[-1] == 0:
            coefficients.pop()
        if len(coefficients) < 2:
            raise InvalidArgumentError("a minimal polynomial has degree at least 1")
        if coefficients[0] == 0:
            raise InvalidArgumentError("beta = 0 is excluded")
        content = 0
        for c in coefficients:
            content = gcd(content, c)
        if coefficients[-1] < 0:
            content = -content
        coefficients = [c // content for c in coefficients]

        poly = fmpz_poly(coefficients)
        if check_irreducible:
            _, factors = poly.factor()
            if len(factors) != 1 or factors[0][1] != 1:
                raise InvalidArgumentError(f"{poly} is reducible")
        if is_cyclotomic(coefficients):
            raise InvalidArgumentError(f"{poly} is cyclotomic; its roots are roots of unity")

        with working_precision(precision):
            roots = [root for root, multiplicity in poly.complex_roots() for _ in range(multiplicity)]
            d = len(coefficients) - 1
            total = arb(abs(coefficients[-1])).log()
            for root in roots:
                total += _max_zero_log(abs(root).log())
            height = total / d
            return cls(
                coefficients=coefficients,
                precision_bits=precision,
                height=mpmath.mpf(height.mid().str(40, radius=False)),
                height_lower=max(mpmath.mpf(0), arb_lower(height)),
                height_upper=arb_upper(height),
                roots=roots,
            )


def sum_oracle(sample: AlgebraicSample) -> arb:
    """(1/d) sum over conjugates of log|beta_i - 1|, as a certified ball."""
    with working_precision(sample.precision_bits):
        total = arb(0)
        for root in sample.roots:
            distance = abs(root - 1)
            if not distance > 0:
                raise PrecisionExhaustedError(f"a root of {sample.coefficients} touches 1")
            total += distance.log()
        return total / sample.degree


def sum_identity_value(sample: AlgebraicSample) -> mpmath.mpf:
    """(1/d) log(|F(1)| / |a_d|), the exact value of ``sum_oracle``."""
    value = sample.value_at_one()
    if value == 0:
        raise InvalidArgumentError("1 is a root of the minimal polynomial")
    return (mpmath.log(abs(value)) - mpmath.log(abs(sample.leading))) / sample.degree


def sum_identity_holds(sample: AlgebraicSample) -> bool:
    with working_precision(sample.precision_bits):
        return sum_oracle(sample).overlaps(to_arb(sum_identity_value(sample)))


def _draw(
    rng: random.Random,
    degree_range: Tuple[int, int],
    coefficient_choices: Optional[List[int]],
) -> List[int]:
    d = rng.randint(*degree_range)
    if coefficient_choices is None:
        low, high = COEFFICIENT_RANGE
        coefficients = [rng.randint(low, high) for _ in range(d + 1)]
    else:
        coefficients = [rng.choice(coefficient_choices) for _ in range(d + 1)]
    while coefficients[-1] == 0:
        coefficients[-1] = rng.choice(coefficient_choices or range(1, COEFFICIENT_RANGE[1] + 1))
    return coefficients


def random_samples(
    count: int,
    seed: int = 0,
    *,
    degree_range: Tuple[int, int] = DEGREE_RANGE,
    coefficient_choices: Optional[List[int]] = None,
    precision: int = DEFAULT_SAMPLE_PRECISION,
) -> List[AlgebraicSample]:
    """``count`` irreducible, non-cyclotomic samples drawn deterministically from ``seed``."""
    rng = random.Random(seed)
    samples: List[AlgebraicSample] = []
    attempts = 0
    while len(samples) < count:
        attempts += 1
        if attempts > MAX_ATTEMPT_FACTOR * max(count, 1):
            raise InvalidArgumentError(f"only {len(samples)} of {count} samples after {attempts} draws")
        coefficients = _draw(rng, degree_range, coefficient_choices)
        if coefficients[0] == 0 or sum(coefficients) == 0:
            continue
        try:
            samples.append(AlgebraicSample.from_coefficients(coefficients, precision=precision))
        except InvalidArgumentError:
            continue
    logger.debug(f"drew {count} samples in {attempts} attempts (seed {seed})")
    return samples


def littlewood_samples(
    count: int, seed: int = 0, *, degree_range: Tuple[int, int] = (16, 24)
) -> List[AlgebraicSample]:
    """High-degree samples with coefficients in {-1, 0, 1}; their heights stay small."""
    return random_samples(
        count, seed, degree_range=degree_range, coefficient_choices=[-1, 0, 1]
    )
