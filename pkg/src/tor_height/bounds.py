"""Explicit lower bounds for the Weil height on Q(E_tor).

Bounds below double precision are carried as ``BoundValue``s (``-ln h`` or ``ln(-ln h)``).
Inputs are validated against the stated domains; nothing is clamped.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Dict, Literal, Optional

import mpmath
from pydantic import BaseModel, ConfigDict, Field

from tor_height.arith import is_prime, radical, theta_bounds
from tor_height.curve import MIN_CONDUCTOR, b_e_threshold, surjectivity_threshold
from tor_height.exceptions import InvalidArgumentError
from tor_height.models import BoundValue, format_real
from tor_height.ssearch import DEFAULT_LNUM_CONSTANT, boundpnoj_threshold, prime_bound_constant

logger = logging.getLogger(__name__)

WORKING_PRECISION = 128

CurveClass = Literal["non-CM", "CM", "small-degree", "semistable"]
ConductorMode = Literal["explicit", "semistable", "effective", "cm"]

CM_EXPONENT = 14
CM_EXACT = "1/4782969"
SMALL_DEGREE_LIMIT = 10**10
SMALL_DEGREE_FLOOR = mpmath.mpf("6e-14")
DISPLAYED_THRESHOLD = 10**7 * 985
INNER_EXPONENT_CHECK = mpmath.mpf("1.001e10")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidArgumentError(message)


def _mpf(value: Any) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


class HeightBound(BaseModel):
    """A bound with the intermediate quantities that produced it."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mode: str
    bound: BoundValue
    informative: bool = True
    details: Dict[str, Any] = Field(default_factory=dict)
    alternates: Dict[str, BoundValue] = Field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        details: Dict[str, Any] = {}
        for key, value in self.details.items():
            if isinstance(value, mpmath.mpf):
                details[key] = format_real(value)
            elif isinstance(value, int) and not isinstance(value, bool) and value.bit_length() > 53:
                details[key] = str(value)
            else:
                details[key] = value
        return {
            "mode": self.mode,
            "bound": self.bound.to_json(),
            "informative": self.informative,
            "details": details,
            "alternates": {name: value.to_json() for name, value in self.alternates.items()},
        }


# =============================================================================
# Auxiliary inequalities
# =============================================================================


def habegger_c(p: int) -> mpmath.mpf:
    _require(p >= 5 and is_prime(p), f"habegger_c needs a prime p >= 5, got {p}")
    return mpmath.log(p) / (10 * mpmath.mpf(p) ** 8)


def mignotte_sum_bound(eps, d: int, h) -> mpmath.mpf:
    """2(eps|log eps| + |log(1 - eps)|) + (2/(eps d)) log d + (1 + 1/eps) h."""
    eps, h = _mpf(eps), _mpf(h)
    _require(0 < eps < mpmath.mpf(1) / 2, f"eps must lie in (0, 1/2), got {eps}")
    _require(d >= 2, "degree must be at least 2")
    _require(h >= 0, "height must be non-negative")
    return (
        2 * (eps * abs(mpmath.log(eps)) + abs(mpmath.log(1 - eps)))
        + 2 / (eps * d) * mpmath.log(d)
        + (1 + 1 / eps) * h
    )


def aux_L1(x) -> mpmath.mpf:
    x = _mpf(x)
    _require(0 < x <= mpmath.mpf(1) / 2, f"x must lie in (0, 1/2], got {x}")
    return -x * mpmath.log(x) * (2 + 4 / mpmath.log(2))


def aux_C1(x, gamma) -> mpmath.mpf:
    x, gamma = _mpf(x), _mpf(gamma)
    _require(0 < x <= mpmath.mpf(1) / 2, f"x must lie in (0, 1/2], got {x}")
    _require(0 < gamma < 1, f"gamma must lie in (0, 1), got {gamma}")
    return 8 * x ** (1 - gamma) / (gamma * mpmath.e)


def dobrowolski_floor(d: int) -> mpmath.mpf:
    """(1/4d)(log log d / log d)^3, a lower bound for h of non-torsion algebraic numbers."""
    _require(d >= 16, f"the degree floor needs d >= 16, got {d}")
    log_d = mpmath.log(d)
    return (mpmath.log(log_d) / log_d) ** 3 / (4 * d)


def aux_L2(d: int, eta, x) -> mpmath.mpf:
    eta, x = _mpf(eta), _mpf(x)
    _require(d >= 16, f"d must be at least 16, got {d}")
    _require(0 < eta < 1, f"eta must lie in (0, 1), got {eta}")
    _require(x > dobrowolski_floor(d), "x must exceed the degree floor")
    return 19 / eta**4 * x ** (1 - eta)


def sum_bound_explicit(delta, h) -> mpmath.mpf:
    """(40/delta^4) h^(1/2 - delta) for sqrt(h) <= 1/2."""
    delta, h = _mpf(delta), _mpf(h)
    _require(0 < delta < mpmath.mpf(1) / 2, f"delta must lie in (0, 1/2), got {delta}")
    _require(0 <= h <= mpmath.mpf(1) / 4, "need 0 <= h with sqrt(h) <= 1/2")
    if h == 0:
        return mpmath.mpf(0)
    return 40 / delta**4 * h ** (mpmath.mpf(1) / 2 - delta)


# =============================================================================
# Main theorem and its branches
# =============================================================================


def small_degree_floor() -> mpmath.mpf:
    """Degree floor at d = 10^10; every non-torsion beta of degree <= 10^10 lies above it."""
    return dobrowolski_floor(SMALL_DEGREE_LIMIT)


def small_degree_bound(p: int) -> BoundValue:
    """6 10^-14 / (10 p^4)."""
    _require(p >= 5 and is_prime(p), f"p must be a prime >= 5, got {p}")
    with mpmath.workprec(WORKING_PRECISION):
        neg_log = mpmath.log(10) - mpmath.log(SMALL_DEGREE_FLOOR) + 4 * mpmath.log(p)
        return BoundValue.tiny_from_neg_log(neg_log)


def cm_height_bound() -> BoundValue:
    with mpmath.workprec(WORKING_PRECISION):
        return BoundValue.tiny_from_neg_log(CM_EXPONENT * mpmath.log(3), exact=CM_EXACT)


def _main_neg_log(p: int, constant_exponent: int) -> mpmath.mpf:
    log_p = mpmath.log(p)
    return constant_exponent * mpmath.log(10) + 44 * log_p - 5 * mpmath.log(log_p)


def main_height_bound(
    p: Optional[int],
    curve_class: CurveClass = "non-CM",
    constant_exponent: int = 21,
) -> BoundValue:
    """Lower bound for h on Q(E_tor) given a supersingular, surjective prime p.

    non-CM and semistable give (log p)^5 / (10^e p^44); CM gives 3^-14 for every p;
    small-degree gives 6 10^-14 / (10 p^4).
    """
    if curve_class == "CM":
        return cm_height_bound()
    _require(p is not None and p >= 5 and is_prime(p), f"p must be a prime >= 5, got {p}")
    _require(constant_exponent in (21, 31), "constant_exponent must be 21 or 31")
    if curve_class == "small-degree":
        return small_degree_bound(p)
    if curve_class == "semistable":
        _require(p >= 11, "the semistable branch needs p >= 11")
    elif curve_class != "non-CM":
        raise InvalidArgumentError(f"unknown curve class {curve_class!r}")
    with mpmath.workprec(WORKING_PRECISION):
        return BoundValue.tiny_from_neg_log(_main_neg_log(p, constant_exponent))


# =============================================================================
# Bounds in terms of the conductor
# =============================================================================


def _log_supersingular_bound(N: int, theta, constant: mpmath.mpf, trailing) -> mpmath.mpf:
    """log of constant e^{0.018 sqrt(Q) (log Q)^3} N e^theta (log Q)^6 * trailing."""
    L = mpmath.log(8 * N) + theta
    return (
        mpmath.log(constant)
        + mpmath.mpf("0.018") * mpmath.exp(L / 2) * L**3
        + mpmath.log(N)
        + theta
        + 6 * mpmath.log(L)
        + mpmath.log(trailing)
    )


def _theta_window(n: int, theta_caps: Dict[str, int]) -> Dict[str, mpmath.mpf]:
    lower, upper = theta_bounds(n, **theta_caps)
    return {"theta_lower": lower, "theta_upper": upper}


def _explicit_chain(
    N: int, n: int, theta_caps: Dict[str, int], constant: mpmath.mpf
) -> tuple[BoundValue, Dict[str, Any]]:
    window = _theta_window(n, theta_caps)
    log_n_cond = mpmath.log(N)
    log_b = _log_supersingular_bound(
        N, window["theta_upper"], constant, log_n_cond
    )
    log_q_lower = mpmath.log(8 * N) + window["theta_lower"]
    details = {
        "n": n,
        **window,
        "log_Q_lower": log_q_lower,
        "log_Q_exceeds_1.001e10": bool(log_q_lower >= INNER_EXPONENT_CHECK),
    }
    return BoundValue.tiny_from_neg_log(44 * log_b), details


def _intro_form(N: int, theta_caps: Dict[str, int]) -> BoundValue:
    """((Q)^{N e^theta (log Q)^5} 18 N log N)^-44 with n from 18 N log N."""
    log_n_cond = mpmath.log(N)
    n = surjectivity_threshold(18 * N * log_n_cond)
    theta = _theta_window(n, theta_caps)["theta_upper"]
    L = mpmath.log(8 * N) + theta
    inner = mpmath.exp(log_n_cond + theta) * L**6 + mpmath.log(18 * N * log_n_cond)
    return BoundValue.tiny_from_neg_log(44 * inner)


def conductor_height_report(
    N: int,
    mode: ConductorMode = "explicit",
    *,
    j: Optional[Fraction] = None,
    h_j=None,
    c=None,
    n: Optional[int] = None,
    constant_exponent: int = 21,
    theta_caps: Optional[Dict[str, int]] = None,
    lnum_constant: float = DEFAULT_LNUM_CONSTANT,
) -> HeightBound:
    """Height bound depending only on the conductor (and j or c where the mode needs them)."""
    if mode == "cm":
        return HeightBound(mode=mode, bound=cm_height_bound())

    _require(N >= MIN_CONDUCTOR, f"conductor {N} < 11 does not occur")
    _require(lnum_constant > 0, "lnum_constant must be positive")
    caps = theta_caps or {}

    with mpmath.workprec(WORKING_PRECISION):
        log_n_cond = mpmath.log(N)
        constant = prime_bound_constant("boundp", lnum_constant)

        if mode == "explicit":
            definitional_n = surjectivity_threshold(10 * N * log_n_cond)
            chosen_n = n if n is not None else definitional_n
            _require(chosen_n >= MIN_CONDUCTOR, "n must be at least 11")
            bound, details = _explicit_chain(N, chosen_n, caps, constant)
            details["definitional_n"] = definitional_n
            alternates = {"intro_18NlogN": _intro_form(N, caps)}
            if chosen_n != DISPLAYED_THRESHOLD:
                alternates["displayed_n"], displayed = _explicit_chain(
                    N, DISPLAYED_THRESHOLD, caps, constant
                )
                details["displayed_n_log_Q_exceeds_1.001e10"] = displayed[
                    "log_Q_exceeds_1.001e10"
                ]
            logger.debug(f"explicit conductor bound for N={N} with n={chosen_n}")
            return HeightBound(mode=mode, bound=bound, details=details, alternates=alternates)

        if mode == "semistable":
            if n is None:
                if j is not None:
                    n = max(MIN_CONDUCTOR, int(mpmath.ceil(b_e_threshold(j))))
                else:
                    n = boundpnoj_threshold(N)
            window = _theta_window(n, caps)
            log_b = _log_supersingular_bound(
                N, window["theta_upper"], constant, N * log_n_cond
            )
            neg_log = (
                44 * log_b
                - 5 * mpmath.log(mpmath.log(11))
                + constant_exponent * mpmath.log(10)
            )
            return HeightBound(
                mode=mode,
                bound=BoundValue.tiny_from_neg_log(neg_log),
                details={"n": n, **window},
            )

        if mode == "effective":
            _require(c is not None and _mpf(c) > 0, "effective mode needs a constant c > 0")
            q = 4 * radical(6 * N)
            if h_j is None:
                _require(j is not None, "effective mode needs j or h_j")
                h_j = max(
                    mpmath.log(2),
                    mpmath.log(max(abs(j.numerator), abs(j.denominator))),
                )
            h_j = _mpf(h_j)
            _require(h_j > 0, f"effective mode needs h_j > 0, got {h_j}")
            log_q = mpmath.log(q)
            _require(q * log_q * h_j > 1, "effective mode needs q log q h_j > 1")
            log_h = (
                mpmath.log(_mpf(c))
                + 5 * mpmath.log(mpmath.log(q * log_q * h_j))
                - 44 * (mpmath.mpf(5) / 2 * log_q + 2 * mpmath.log(log_q) + mpmath.log(h_j))
            )
            return HeightBound(
                mode=mode,
                bound=BoundValue.tiny_from_neg_log(-log_h),
                details={"q": q, "h_j": h_j},
            )

    raise InvalidArgumentError(f"unknown mode {mode!r}")


def conductor_height_bound(N: int, mode: ConductorMode = "explicit", **kwargs: Any) -> BoundValue:
    return conductor_height_report(N, mode, **kwargs).bound


# =============================================================================
# p-adic route
# =============================================================================


def padic_height_bound(p: int, lam: int) -> HeightBound:
    """(1/(2 p^lam p^2)) ((1 + lam) log p / p^6 - log 2), flagged when not positive."""
    _require(p >= 2 and is_prime(p), f"p must be prime, got {p}")
    _require(lam >= 1, "lambda must be a positive integer")
    with mpmath.workprec(WORKING_PRECISION):
        log_p = mpmath.log(p)
        bracket = (1 + lam) * log_p / mpmath.mpf(p) ** 6 - mpmath.log(2)
        details = {"p": p, "lambda": lam, "bracket": bracket}
        if bracket <= 0:
            value = bracket / (2 * mpmath.mpf(p) ** (lam + 2))
            logger.info(f"p-adic bound for p={p}, lambda={lam} is not positive")
            return HeightBound(
                mode="padic",
                bound=BoundValue(level=0, value=value),
                informative=False,
                details=details,
            )
        neg_log = mpmath.log(2) + (lam + 2) * log_p - mpmath.log(bracket)
        return HeightBound(
            mode="padic", bound=BoundValue.tiny_from_neg_log(neg_log), details=details
        )


def padic_corollary_bound(p: int) -> BoundValue:
    """log(p/2) / (2 p^(p^6 + 2))."""
    _require(p >= 3 and is_prime(p), f"p must be an odd prime, got {p}")
    with mpmath.workprec(WORKING_PRECISION):
        neg_log = (
            mpmath.log(2)
            + (p**6 + 2) * mpmath.log(p)
            - mpmath.log(mpmath.log(mpmath.mpf(p) / 2))
        )
        return BoundValue.tiny_from_neg_log(neg_log)
