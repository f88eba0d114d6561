"""Pydantic data types shared by the tor-height modules."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Annotated, Any, Dict, List, Literal, Optional

import mpmath
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    model_validator,
)

from tor_height.exceptions import InvalidArgumentError


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValueError("rationals must be given exactly, not as floats")
    return Fraction(str(value).strip()) if isinstance(value, str) else Fraction(value)


def _to_mpf(value: Any) -> mpmath.mpf:
    if isinstance(value, mpmath.mpf):
        return value
    return mpmath.mpf(value)


def format_real(value: mpmath.mpf, digits: int = 20) -> str:
    return mpmath.nstr(value, digits, min_fixed=-6, max_fixed=15)


def format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


Rational = Annotated[Fraction, BeforeValidator(_to_fraction), PlainSerializer(format_rational)]
Real = Annotated[mpmath.mpf, BeforeValidator(_to_mpf), PlainSerializer(format_real)]


# =============================================================================
# Arithmetic
# =============================================================================


class PrimeList(BaseModel):
    limit: int = Field(..., ge=0)
    primes: List[int]

    @model_validator(mode="after")
    def _check_ascending(self) -> "PrimeList":
        if any(a >= b for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("primes must be strictly increasing")
        if self.primes and self.primes[-1] > self.limit:
            raise ValueError("primes exceed the limit")
        return self

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)


class LegendreCondition(BaseModel):
    prime: int
    required: Literal[-1, 1]
    modulus: int
    residue: int
    source: Literal["rad(6N)", "p <= n", "ell = 7 mod 8"]


class CongruenceSystem(BaseModel):
    residue: int
    modulus: int
    conditions: List[LegendreCondition]
    encodes_seven_mod_eight: bool = True

    @model_validator(mode="after")
    def _check_invariants(self) -> "CongruenceSystem":
        if not 0 <= self.residue < self.modulus:
            raise ValueError("residue must lie in [0, modulus)")
        if math.gcd(self.residue, self.modulus) != 1:
            raise ValueError("residue and modulus must be coprime")
        if self.modulus % 8:
            raise ValueError("modulus must be divisible by 8")
        return self

    def conditioned_primes(self) -> List[int]:
        return [c.prime for c in self.conditions if c.source != "ell = 7 mod 8"]


class ThetaValue(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    value: Real
    error_bound: Real
    method: Literal["summed", "upper-bound"]
    primorial: Optional[int] = Field(default=None, exclude=True)

    def exp_is_exact(self) -> bool:
        return self.primorial is not None


# =============================================================================
# Curves
# =============================================================================


class WeierstrassModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a1: Rational = Fraction(0)
    a2: Rational = Fraction(0)
    a3: Rational = Fraction(0)
    a4: Rational = Fraction(0)
    a6: Rational = Fraction(0)

    def coefficients(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def label(self) -> str:
        return ",".join(format_rational(a) for a in self.coefficients())


class CurveInvariants(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    b2: Rational
    b4: Rational
    b6: Rational
    b8: Rational
    c4: Rational
    c6: Rational
    delta: Rational
    j: Rational
    conductor: int = Field(..., ge=11)
    h_j: Real
    has_cm: bool = False

    @model_validator(mode="after")
    def _check_identities(self) -> "CurveInvariants":
        if self.delta == 0:
            raise ValueError("discriminant must be nonzero")
        if 1728 * self.delta != self.c4**3 - self.c6**2:
            raise ValueError("invariants violate 1728 delta = c4^3 - c6^2")
        if self.j != self.c4**3 / self.delta:
            raise ValueError("j must equal c4^3 / delta")
        return self


# =============================================================================
# Class polynomials
# =============================================================================


class QuadraticForm(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: int = Field(..., gt=0)
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not abs(b) <= a <= c:
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return math.gcd(math.gcd(a, b), c) == 1

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


class ClassPolynomial(BaseModel):
    D: int = Field(..., gt=0)
    coefficients: List[int]
    precision_bits: int = 0

    @model_validator(mode="after")
    def _check_monic(self) -> "ClassPolynomial":
        if not self.coefficients or self.coefficients[-1] != 1:
            raise ValueError("class polynomial must be monic")
        return self

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def to_json(self) -> Dict[str, Any]:
        return {
            "D": self.D,
            "degree": self.degree,
            "coefficients": [str(c) for c in self.coefficients],
            "precision_bits": self.precision_bits,
        }


# =============================================================================
# Supersingular search
# =============================================================================


class SupersingularCertificate(BaseModel):
    p: int
    ell: Optional[int] = None
    witness: Literal["p = ell", "legendre(p, ell) = -1", "direct-scan"]
    a_p: int
    n: int
    q: Optional[int] = None
    a: Optional[int] = None
    nl_digits: Optional[int] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    timings: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_shape(self) -> "SupersingularCertificate":
        if self.p < 5:
            raise ValueError("certified primes are at least 5")
        if self.a_p != 0:
            raise ValueError("a supersingular certificate records a_p = 0")
        if self.witness != "direct-scan" and self.ell is None:
            raise ValueError("Elkies certificates name ell")
        return self

    def to_json(self) -> Dict[str, Any]:
        payload = self.model_dump()
        for key in ("q", "a"):
            if payload[key] is not None and payload[key].bit_length() > 53:
                payload[key] = str(payload[key])
        return payload


# =============================================================================
# Bound values
# =============================================================================

_MEANINGS = {
    "tiny": ("h", "-ln h", "ln(-ln h)"),
    "huge": ("x", "ln x", "ln(ln x)"),
}

# Stored values beyond this magnitude move to the next level.
_FLOAT_SAFE = mpmath.mpf("1e300")
_GUARD_BITS = 6


def _round(value: mpmath.mpf, up: bool) -> mpmath.mpf:
    slack = abs(value) * mpmath.ldexp(1, _GUARD_BITS - mpmath.mp.prec)
    if value == 0:
        slack = mpmath.ldexp(1, -mpmath.mp.prec)
    return value + slack if up else value - slack


@total_ordering
class BoundValue(BaseModel):
    """Iterated-log number for bounds outside floating range.

    ``orientation="tiny"`` stores a lower bound h at level 0, ``-ln h`` at level 1 and
    ``ln(-ln h)`` at level 2. ``orientation="huge"`` stores an upper bound x as x,
    ``ln x`` or ``ln ln x``. Level changes round in the direction that keeps the bound valid.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    level: Literal[0, 1, 2]
    value: Real
    orientation: Literal["tiny", "huge"] = "tiny"
    exact: Optional[str] = None

    @property
    def meaning(self) -> str:
        return _MEANINGS[self.orientation][self.level]

    # ---- constructors -------------------------------------------------------

    @classmethod
    def tiny_from_neg_log(cls, neg_log: Any, exact: Optional[str] = None) -> "BoundValue":
        return cls(level=1, value=neg_log, orientation="tiny", exact=exact).normalize()

    @classmethod
    def huge_from_log(cls, log_value: Any) -> "BoundValue":
        return cls(level=1, value=log_value, orientation="huge").normalize()

    # ---- level conversion ---------------------------------------------------

    def _step(self, target: int) -> "BoundValue":
        v = self.value
        tiny = self.orientation == "tiny"
        with mpmath.workprec(mpmath.mp.prec + 2 * _GUARD_BITS):
            if target == self.level + 1:
                if self.level == 0:
                    if v <= 0:
                        raise InvalidArgumentError("non-positive values have no logarithm")
                    new = _round(-mpmath.log(v) if tiny else mpmath.log(v), up=True)
                else:
                    if v <= 0:
                        raise InvalidArgumentError(f"{self.meaning} <= 0 cannot be lifted")
                    new = _round(mpmath.log(v), up=True)
            else:
                if self.level == 1:
                    new = _round(mpmath.exp(-v), up=False) if tiny else _round(mpmath.exp(v), up=True)
                else:
                    new = _round(mpmath.exp(v), up=True)
        return BoundValue(level=target, value=new, orientation=self.orientation, exact=self.exact)

    def to_level(self, level: int) -> "BoundValue":
        current = self
        while current.level < level:
            current = current._step(current.level + 1)
        while current.level > level:
            current = current._step(current.level - 1)
        return current

    def normalize(self) -> "BoundValue":
        """Move to the lowest level whose stored value stays in float range."""
        current = self
        while current.level > 0:
            lower = current.to_level(current.level - 1)
            magnitude = abs(lower.value)
            if magnitude > _FLOAT_SAFE or (lower.level == 0 and 0 < magnitude < 1 / _FLOAT_SAFE):
                break
            current = lower
        while current.level < 2:
            magnitude = abs(current.value)
            too_small = current.level == 0 and 0 < magnitude < 1 / _FLOAT_SAFE
            if not (magnitude > _FLOAT_SAFE or too_small):
                break
            current = current.to_level(current.level + 1)
        return current

    # ---- ordering -----------------------------------------------------------

    def _level_one(self) -> mpmath.mpf:
        return self.to_level(1).value

    def compare(self, other: "BoundValue") -> int:
        """Order by the bounded quantity itself (h or x)."""
        if self.orientation != other.orientation:
            raise InvalidArgumentError("cannot compare tiny and huge bound values")
        if self.level == other.level == 0:
            a, b = self.value, other.value
            return (a > b) - (a < b)
        # a non-positive level-0 value sits below every value with a logarithm
        for sign, bound in ((-1, self), (1, other)):
            if bound.level == 0 and bound.value <= 0:
                return sign
        if self.level == other.level == 2:
            a, b = self.value, other.value
        else:
            a, b = self._level_one(), other._level_one()
        sign = (a > b) - (a < b)
        return -sign if self.orientation == "tiny" else sign

    def __lt__(self, other: "BoundValue") -> bool:
        return self.compare(other) < 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoundValue):
            return NotImplemented
        return self.orientation == other.orientation and self.compare(other) == 0

    def __hash__(self) -> int:
        return hash((self.orientation, self.level, str(self.value)))

    def log10(self) -> Optional[float]:
        """Approximate log10 of the bounded quantity, when it fits in a float."""
        if self.level == 2:
            return None
        v = self._level_one()
        if abs(v) > _FLOAT_SAFE:
            return None
        scaled = float(v / mpmath.log(10))
        return -scaled if self.orientation == "tiny" else scaled

    def to_json(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "level": self.level,
            "value": format_real(self.value),
            "meaning": self.meaning,
            "orientation": self.orientation,
            "log10": self.log10(),
        }
        if self.exact is not None:
            payload["exact"] = self.exact
        return payload


# =============================================================================
# Reports
# =============================================================================


class RunReport(BaseModel):
    command: str
    inputs: Dict[str, Any]
    outputs: Dict[str, Any]
    certificate: Optional[Dict[str, Any]] = None
    timings: Dict[str, float] = Field(default_factory=dict)
    tool_version: str
    seed: Optional[int] = None
    schema_version: str = "1"
