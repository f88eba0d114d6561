"""Verification suites for the inequalities the height bounds rest on.

Every check ends as ``pass``, ``fail`` (certified violation) or ``undecided`` (the
enclosures overlap the boundary). Suites report counts and at most ``MAX_DETAILS``
problem records.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath
from flint import arb

from tor_height.arith import THETA_LOWER_FROM, THETA_UPPER_RATIO, primes_up_to
from tor_height.bounds import (
    aux_C1,
    aux_L1,
    aux_L2,
    dobrowolski_floor,
    mignotte_sum_bound,
    sum_bound_explicit,
)
from tor_height.classpoly import (
    class_number,
    class_number_bound,
    cm_point,
    eval_j,
    fouvry_murty_log_bound,
    hilbert_class_polynomial,
    is_valid_discriminant,
    log_abs_product,
    real_root_count,
    reduced_forms,
)
from tor_height.curve import (
    NAIVE_COUNT_LIMIT,
    count_points_naive,
    has_good_reduction,
    parse_model,
    trace_of_frobenius,
)
from tor_height.exceptions import InvalidArgumentError, PrecisionExhaustedError
from tor_height.samples import (
    DEFAULT_SAMPLE_PRECISION,
    AlgebraicSample,
    littlewood_samples,
    random_samples,
    sum_identity_holds,
    sum_oracle,
)
from tor_height.utils import to_arb, working_precision

logger = logging.getLogger(__name__)

MAX_DETAILS = 20
SUITES = ("lemma1", "fouvry-murty", "mignotte-sum", "aux", "classnum", "hasse", "theta")

Outcome = Tuple[str, Optional[Dict[str, Any]]]

DEFAULT_J_VALUES = (
    Fraction(-4096, 11),
    Fraction(-122023936, 161051),
    Fraction(1, 2),
    Fraction(3),
    Fraction(-1, 15),
)
DEFAULT_CURVES = (
    "0,-1,1,0,0",
    "0,-1,1,-10,-20",
    "1,0,0,-1,0",
    "1,0,1,4,-6",
    "1,1,1,-10,-10",
    "1,-1,1,-1,-14",
    "0,1,1,-9,-15",
    "0,1,0,4,4",
    "1,0,0,-4,-1",
    "0,-1,0,-4,4",
    "1,0,1,-5,-8",
    "0,0,1,-1,0",
    "0,1,1,-2,0",
)
GOLDEN_CLASS_POLYNOMIALS = {3: [0, 1], 4: [-1728, 1], 7: [3375, 1], 28: [-16581375, 1]}
EPS_GRID = tuple(mpmath.mpf(k) / 100 for k in range(5, 50, 5))


def _passed() -> Outcome:
    return "pass", None


def _compare(lhs: arb, rhs: arb, label: Dict[str, Any], *, strict: bool = False) -> Outcome:
    """Outcome of lhs <= rhs (lhs < rhs when ``strict``) for two balls."""
    holds = lhs < rhs if strict else lhs <= rhs
    violated = lhs >= rhs if strict else lhs > rhs
    if holds:
        return _passed()
    if violated:
        return "fail", label
    return "undecided", label


def _collect(
    suite: str,
    items: Iterable[Any],
    check: Callable[[Any], List[Outcome]],
    threads: int = 1,
    precision: Optional[int] = None,
) -> Dict[str, Any]:
    items = list(items)
    if threads > 1:
        # flint.ctx is process-wide, so workers share one precision
        with working_precision(precision or DEFAULT_SAMPLE_PRECISION):
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(check, items))
    else:
        results = [check(item) for item in items]

    checked = failures = undecided = 0
    details: List[Dict[str, Any]] = []
    for outcomes in results:
        for status, detail in outcomes:
            checked += 1
            if status == "pass":
                continue
            if status == "fail":
                failures += 1
            else:
                undecided += 1
            if len(details) < MAX_DETAILS:
                details.append({"status": status, **(detail or {})})

    if failures:
        logger.warning(f"suite {suite}: {failures} failures out of {checked}")
    return {
        "suite": suite,
        "checked": checked,
        "failures": failures,
        "undecided": undecided,
        "details": details,
    }


def _primes_three_mod_four(low: int, high: int) -> List[int]:
    return [p for p in primes_up_to(high) if p >= low and p % 4 == 3]


# =============================================================================
# Class polynomial suites
# =============================================================================


def lemma1_precision(lmax: int, precision: int = 128) -> int:
    """Bits needed to separate j(i sqrt(ell)) ~ e^{2 pi sqrt(ell)} from its leading term."""
    return max(precision, int(2 * mpmath.pi * mpmath.sqrt(lmax) / mpmath.log(2)) + 64)


def verify_lemma1(
    lmin: int = 11, lmax: int = 1000, *, precision: int = 128, threads: int = 1
) -> Dict[str, Any]:
    """j(i sqrt(ell)) > e^{2 pi sqrt(ell)} and j((1 + i sqrt(ell))/2) <= -0.82 e^{pi sqrt(ell)}."""
    bits = lemma1_precision(lmax, precision)

    def check(ell: int) -> List[Outcome]:
        with working_precision(bits):
            root = arb(ell).sqrt()
            at_root = eval_j(cm_point(1, 0, 4 * ell), bits)
            at_half = eval_j(cm_point(1, -1, ell), bits)
            return [
                _compare(
                    (2 * arb.pi() * root).exp(),
                    at_root.real,
                    {"ell": ell, "claim": "j(i sqrt ell)"},
                    strict=True,
                ),
                _compare(
                    at_half.real,
                    -arb("0.82") * (arb.pi() * root).exp(),
                    {"ell": ell, "claim": "j((1 + i sqrt ell)/2)"},
                ),
            ]

    return _collect(
        "lemma1", _primes_three_mod_four(lmin, lmax), check, threads, precision=bits
    )


def verify_fouvry_murty(
    lmax: int = 200,
    j_values: Sequence[Fraction] = DEFAULT_J_VALUES,
) -> Dict[str, Any]:
    """log |P_ell(j) P_4ell(j)| <= 3 C sqrt(ell) (log ell)^2 + 4 h_ell."""

    def check(ell: int) -> List[Outcome]:
        h_ell = class_number(ell)
        outcomes: List[Outcome] = []
        for j in j_values:
            lhs = log_abs_product(j, ell)
            rhs = fouvry_murty_log_bound(j, ell, h_ell)
            if lhs <= rhs:
                outcomes.append(_passed())
            else:
                outcomes.append(("fail", {"ell": ell, "j": str(j)}))
        return outcomes

    return _collect("fouvry-murty", _primes_three_mod_four(7, lmax), check)


def verify_classnum(
    lmax: int = 2000, *, poly_lmax: int = 100, dmax: int = 2000
) -> Dict[str, Any]:
    """h_ell against both bounds; degree, parity and real roots of P_ell, P_4ell; P_D degrees."""

    def check(ell: int) -> List[Outcome]:
        h_ell = class_number(ell)
        fine, coarse = class_number_bound(ell)
        label = {"ell": ell, "h": h_ell}
        outcomes: List[Outcome] = [
            _passed() if h_ell <= fine else ("fail", {**label, "claim": "h <= fine bound"}),
            _passed() if fine <= coarse else ("fail", {**label, "claim": "fine <= coarse"}),
        ]
        if ell <= poly_lmax:
            P = hilbert_class_polynomial(ell)
            P4 = hilbert_class_polynomial(4 * ell)
            # h(-4 ell) = h(-ell) for ell = 7 mod 8 and 3 h(-ell) for ell = 3 mod 8
            degree_4ell = h_ell if ell % 8 == 7 else 3 * h_ell
            shape = (
                P.degree == h_ell
                and P4.degree == degree_4ell
                and P.degree % 2 == 1
                and real_root_count(P) == 1
                and real_root_count(P4) == 1
            )
            outcomes.append(_passed() if shape else ("fail", {**label, "claim": "P_ell shape"}))
        return outcomes

    result = _collect("classnum", _primes_three_mod_four(7, lmax), check)
    degrees = verify_class_polynomial_degrees(dmax)
    for key in ("checked", "failures", "undecided"):
        result[key] += degrees[key]
    room = MAX_DETAILS - len(result["details"])
    result["details"].extend(degrees["details"][:room])
    return result


def verify_class_polynomial_degrees(dmax: int = 2000) -> Dict[str, Any]:
    """deg P_D = #reduced forms for every valid D <= dmax, plus the known small P_D."""

    def check(D: int) -> List[Outcome]:
        label = {"D": D}
        try:
            P = hilbert_class_polynomial(D)
        except PrecisionExhaustedError:
            return [("undecided", {**label, "claim": "P_D certified"})]
        outcomes: List[Outcome] = [
            _passed()
            if P.degree == len(reduced_forms(D))
            else ("fail", {**label, "claim": "degree", "degree": P.degree})
        ]
        golden = GOLDEN_CLASS_POLYNOMIALS.get(D)
        if golden is not None:
            matches = P.coefficients == golden
            outcomes.append(_passed() if matches else ("fail", {**label, "claim": "golden"}))
        return outcomes

    discriminants = [D for D in range(3, dmax + 1) if is_valid_discriminant(D)]
    return _collect("classnum", discriminants, check)


# =============================================================================
# Curve suite
# =============================================================================


def verify_hasse(
    pmax: int = 2000, curves: Sequence[str] = DEFAULT_CURVES, *, naive_limit: int = 200
) -> Dict[str, Any]:
    """a_p^2 <= 4p for good p in [5, pmax]; point counts agree with naive counting."""
    models = [parse_model(text) for text in curves]

    def check(p: int) -> List[Outcome]:
        outcomes: List[Outcome] = []
        for model in models:
            if not has_good_reduction(model, p):
                continue
            a_p = trace_of_frobenius(model, p)
            label = {"curve": model.label(), "p": p, "a_p": a_p}
            outcomes.append(_passed() if a_p * a_p <= 4 * p else ("fail", label))
            if p <= min(naive_limit, NAIVE_COUNT_LIMIT):
                agrees = count_points_naive(model, p) == p + 1 - a_p
                outcomes.append(_passed() if agrees else ("fail", {**label, "claim": "naive"}))
        return outcomes

    return _collect("hasse", [p for p in primes_up_to(pmax) if p >= 5], check)


# =============================================================================
# Chebyshev theta
# =============================================================================


def verify_theta(xmax: int = 10**6) -> Dict[str, Any]:
    """theta(x) < 1.01624 x for integers x <= xmax, with the lower bound for x >= 41.

    theta is constant between primes, so the upper bound is tightest at each prime and the
    lower bound just before the next one.
    """
    primes = list(primes_up_to(xmax))
    prec = 96
    outcomes: List[Outcome] = []
    with mpmath.workprec(prec):
        theta = mpmath.mpf(0)
        for index, p in enumerate(primes):
            theta += mpmath.log(p)
            error = (index + 2) * theta * mpmath.ldexp(1, 2 - prec)
            if theta + error < THETA_UPPER_RATIO * p:
                outcomes.append(_passed())
            elif theta - error >= THETA_UPPER_RATIO * p:
                outcomes.append(("fail", {"x": p, "claim": "upper"}))
            else:
                outcomes.append(("undecided", {"x": p, "claim": "upper"}))

            x = primes[index + 1] - 1 if index + 1 < len(primes) else xmax
            if x >= THETA_LOWER_FROM:
                lower = x * (1 - 1 / mpmath.log(x))
                if theta - error > lower:
                    outcomes.append(_passed())
                else:
                    outcomes.append(("fail", {"x": x, "claim": "lower"}))

    return _collect("theta", [outcomes], lambda batch: batch)


# =============================================================================
# Height-sum suites
# =============================================================================


def _sample_label(sample: AlgebraicSample, **extra: Any) -> Dict[str, Any]:
    return {"coefficients": sample.coefficients, **extra}


def _below_increasing_bound(
    oracle: arb, bound: Callable[[mpmath.mpf], mpmath.mpf], sample: AlgebraicSample, label
) -> Outcome:
    """oracle <= bound(h) for a bound increasing in h, judged across the height enclosure."""
    if oracle <= to_arb(bound(sample.height_lower)):
        return _passed()
    if oracle > to_arb(bound(sample.height_upper)):
        return "fail", label
    return "undecided", label


def verify_mignotte_sum(
    count: int = 500,
    seed: int = 0,
    *,
    high_degree_count: int = 20,
    threads: int = 1,
) -> Dict[str, Any]:
    """Conjugate sums against the Mignotte-route and explicit bounds, plus the F(1) identity."""
    samples = random_samples(count, seed)
    high_degree = littlewood_samples(high_degree_count, seed) if high_degree_count else []

    def check(sample: AlgebraicSample) -> List[Outcome]:
        try:
            with working_precision(sample.precision_bits):
                oracle = sum_oracle(sample)
                outcomes: List[Outcome] = []
                if not sum_identity_holds(sample):
                    outcomes.append(("fail", _sample_label(sample, claim="F(1) identity")))
                for eps in EPS_GRID:
                    outcomes.append(_below_increasing_bound(
                        oracle,
                        lambda h, eps=eps: mignotte_sum_bound(eps, sample.degree, h),
                        sample,
                        _sample_label(sample, claim="mignotte", eps=float(eps)),
                    ))
                if sample.degree >= 16:
                    outcomes.extend(_check_explicit(sample, oracle))
                return outcomes
        except PrecisionExhaustedError:
            return [("undecided", _sample_label(sample, claim="root near 1"))]

    return _collect(
        "mignotte-sum",
        samples + high_degree,
        check,
        threads,
        precision=DEFAULT_SAMPLE_PRECISION,
    )


def _check_explicit(sample: AlgebraicSample, oracle: arb) -> List[Outcome]:
    outcomes: List[Outcome] = []
    floor = dobrowolski_floor(sample.degree)
    if sample.height_lower > floor:
        outcomes.append(_passed())
    elif sample.height_upper <= floor:
        outcomes.append(("fail", _sample_label(sample, claim="degree floor")))
    else:
        outcomes.append(("undecided", _sample_label(sample, claim="degree floor")))

    if sample.height_upper > mpmath.mpf(1) / 4:
        return outcomes
    for delta in EPS_GRID:
        outcomes.append(_below_increasing_bound(
            oracle,
            lambda h, delta=delta: sum_bound_explicit(delta, h),
            sample,
            _sample_label(sample, claim="explicit", delta=float(delta)),
        ))
    return outcomes


def _grid(low, high, steps: int) -> List[mpmath.mpf]:
    low, high = mpmath.mpf(low), mpmath.mpf(high)
    return [low + (high - low) * k / steps for k in range(1, steps + 1)]


def verify_aux(points: int = 1000) -> Dict[str, Any]:
    """Grid checks of the three auxiliary inequalities, at least ``points`` evaluations each."""
    if points < 1:
        raise InvalidArgumentError("points must be positive")
    with mpmath.workprec(96):

        def lhs(x: mpmath.mpf) -> mpmath.mpf:
            return -2 * (x * mpmath.log(x) + mpmath.log(1 - x))

        outcomes: List[Outcome] = []
        for x in _grid(0, mpmath.mpf(1) / 2, points):
            passed = lhs(x) <= aux_L1(x)
            outcomes.append(_passed() if passed else ("fail", {"lemma": "L1", "x": float(x)}))

        side = math.isqrt(points - 1) + 1
        for x in _grid(0, mpmath.mpf(1) / 2, side):
            for gamma in _grid(0, 1, side + 1)[:-1]:
                passed = lhs(x) <= aux_C1(x, gamma)
                detail = {"lemma": "C1", "x": float(x), "gamma": float(gamma)}
                outcomes.append(_passed() if passed else ("fail", detail))

        cube = 1
        while cube**3 < points:
            cube += 1
        steps = max(cube - 1, 1)
        degrees = sorted({int(16 * mpmath.mpf(10) ** (5 * k / steps)) for k in range(cube)})
        for d in degrees:
            floor = dobrowolski_floor(d)
            for eta in _grid(0, 1, cube + 1)[:-1]:
                for t in range(1, cube + 1):
                    x = floor * (mpmath.mpf(1) / floor) ** (mpmath.mpf(t) / cube)
                    if x <= floor:
                        continue
                    passed = mpmath.log(d) / d <= aux_L2(d, eta, x)
                    detail = {"lemma": "L2", "d": d, "eta": float(eta), "x": float(x)}
                    outcomes.append(_passed() if passed else ("fail", detail))

    return _collect("aux", [outcomes], lambda batch: batch)


# =============================================================================
# Dispatch
# =============================================================================


def run_suite(name: str, **options: Any) -> Dict[str, Any]:
    runners: Dict[str, Callable[..., Dict[str, Any]]] = {
        "lemma1": verify_lemma1,
        "fouvry-murty": verify_fouvry_murty,
        "mignotte-sum": verify_mignotte_sum,
        "aux": verify_aux,
        "classnum": verify_classnum,
        "hasse": verify_hasse,
        "theta": verify_theta,
    }
    runner = runners.get(name)
    if runner is None:
        raise InvalidArgumentError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    logger.info(f"running suite {name} with {options}")
    return runner(**options)
