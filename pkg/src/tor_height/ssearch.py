"""Supersingular prime search along the Elkies route.

ell = a mod q forces (p/ell) = +1 for every odd prime p dividing 6N and every odd p <= n,
so any prime factor p of N_ell = -num(P_ell(j) P_4ell(j)) with p = ell or (p/ell) = -1 is
at least n and supersingular. The search assembles that congruence, finds ell, forms N_ell
and extracts a certified factor.
"""

from __future__ import annotations

import logging
import math
import time
from contextlib import contextmanager
from fractions import Fraction
from typing import Dict, Iterator, List, Literal, Optional, Tuple, Union

import mpmath
from pydantic import BaseModel, ConfigDict

from tor_height.arith import (
    crt_combine,
    is_prime,
    iter_primes,
    legendre_unchecked,
    odd_prime_divisors,
    primes_up_to,
    smallest_residue_with_symbol,
    theta_bounds,
)
from tor_height.classpoly import evaluate_at_rational, hilbert_class_polynomial
from tor_height.config import RuntimeConfig
from tor_height.curve import (
    b_e_threshold,
    has_good_reduction,
    trace_of_frobenius,
)
from tor_height.exceptions import (
    BadReductionError,
    CMCurveError,
    EffortExhaustedError,
    ExtractionIncompleteError,
    InvalidArgumentError,
    ModulusOverflowError,
    SearchInfeasibleError,
    TorHeightError,
)
from tor_height.models import (
    BoundValue,
    CongruenceSystem,
    CurveInvariants,
    LegendreCondition,
    PrimeList,
    Real,
    SupersingularCertificate,
    WeierstrassModel,
    format_real,
)

logger = logging.getLogger(__name__)

MIN_THRESHOLD = 11
DEFAULT_LNUM_CONSTANT = 2.4e11
# 2.5e9 is 8 * 0.036^2 * 2.4e11 rounded up; both prime-bound constants scale with lnum.
_BOUNDP_CONSTANT = mpmath.mpf("2.5e9")
_BOUNDPNOJ_CONSTANT = mpmath.mpf("2.5e10")
SEVEN_MOD_EIGHT = LegendreCondition(
    prime=2, required=1, modulus=8, residue=7, source="ell = 7 mod 8"
)

BoundVariant = Literal["boundp", "boundpnoj", "effectiveElkies"]
SearchMode = Literal["elkies", "direct"]


class SearchConfig(BaseModel):
    """Effort caps for one search, copied into every certificate."""

    theta_cap: int = 10**6
    theta_sum_cap: int = 10**7
    trial_division_bound: int = 10**7
    scan_effort: int = 10**6
    max_modulus_bits: int = 4096
    max_point_count_prime: int = 10**7
    max_precision_bits: int = 1 << 16
    lnum_constant: float = 2.4e11

    @classmethod
    def from_runtime(cls, config: RuntimeConfig) -> "SearchConfig":
        return cls(**{name: getattr(config, name) for name in cls.model_fields})

    def theta_caps(self) -> Dict[str, int]:
        return {"theta_cap": self.theta_cap, "sum_cap": self.theta_sum_cap}


class ProgressionPrime(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    ell: int
    scanned: int
    log_cap: Optional[Real] = None
    within_cap: Optional[bool] = None


@contextmanager
def _stage(name: str, timings: Dict[str, float]) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    except TorHeightError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    finally:
        timings[name] = round(time.perf_counter() - start, 6)


# =============================================================================
# Congruence assembly
# =============================================================================


def _required_symbol_mod_p(p: int) -> int:
    # With ell = 3 mod 4, reciprocity gives (p/ell) = (ell/p) (-1)^((p-1)/2).
    return 1 if p % 4 == 1 else -1


def assemble_congruence(
    N: int,
    n: int,
    prime_list: Optional[PrimeList] = None,
    *,
    max_modulus_bits: int = 4096,
) -> CongruenceSystem:
    """Single class ell = a mod q with ell = 7 mod 8 and (p/ell) = +1 for the conditioned p.

    The conditioned primes are the odd primes dividing 6N together with the odd primes <= n
    taken from ``prime_list``.
    """
    if N < 1 or n < 2:
        raise InvalidArgumentError("assemble_congruence needs N >= 1 and n >= 2")
    if prime_list is None:
        prime_list = primes_up_to(n)

    conditioned = sorted(
        set(odd_prime_divisors(6 * N)) | {p for p in prime_list if p != 2 and p <= n}
    )
    bits = 3 + sum(math.log2(p) for p in conditioned)
    if bits > max_modulus_bits:
        raise ModulusOverflowError(
            f"modulus for N={N}, n={n} needs about {bits:.0f} bits "
            f"(cap {max_modulus_bits}); only the symbolic bound is available"
        )

    conditions: List[LegendreCondition] = [SEVEN_MOD_EIGHT]
    for p in conditioned:
        required = _required_symbol_mod_p(p)
        conditions.append(
            LegendreCondition(
                prime=p,
                required=required,
                modulus=p,
                residue=smallest_residue_with_symbol(p, required),
                source="rad(6N)" if (6 * N) % p == 0 else "p <= n",
            )
        )

    a, q = crt_combine([(c.residue, c.modulus) for c in conditions])
    logger.debug(f"congruence for N={N}, n={n}: ell = {a} mod {q}")
    return CongruenceSystem(residue=a, modulus=q, conditions=conditions)


def bennett_log_cap(q: int) -> Optional[mpmath.mpf]:
    """log x0(q): some prime = a mod q lies below x0(q) for every a coprime to q."""
    if q < 3:
        return None
    if q <= 600:
        return mpmath.log(mpmath.mpf("7.94e9"))
    if q <= 10**5:
        return mpmath.log(mpmath.mpf("4.81e12") / q)
    log_q = mpmath.log(q)
    return mpmath.mpf("0.036") * mpmath.sqrt(q) * log_q**3


def find_prime_in_ap(
    system: Union[CongruenceSystem, Tuple[int, int]],
    *,
    effort: int = 10**6,
) -> ProgressionPrime:
    """Least prime ell = a mod q by ascending scan, with the theoretical cap beside it."""
    if isinstance(system, CongruenceSystem):
        a, q = system.residue, system.modulus
    else:
        a, q = system
    if q < 1 or math.gcd(a, q) != 1:
        raise InvalidArgumentError(f"no primes in {a} mod {q}: gcd(a, q) must be 1")

    log_cap = bennett_log_cap(q)
    candidate = a % q
    for scanned in range(1, effort + 1):
        if is_prime(candidate):
            within = None if log_cap is None else bool(mpmath.log(candidate) <= log_cap)
            if within is False:
                logger.warning(f"prime {candidate} = {a} mod {q} lies above the quoted cap")
            return ProgressionPrime(
                ell=candidate, scanned=scanned, log_cap=log_cap, within_cap=within
            )
        candidate += q
    raise EffortExhaustedError(f"no prime = {a} mod {q} among {effort} candidates")


# =============================================================================
# N_ell and extraction
# =============================================================================


def _check_ell(ell: int) -> None:
    if ell < 7 or ell % 4 != 3 or not is_prime(ell):
        raise InvalidArgumentError(f"ell must be a prime = 3 mod 4 with ell >= 7, got {ell}")


def numerator_N_ell(j: Fraction, ell: int, *, max_precision: int = 1 << 16) -> int:
    """N_ell = -num(P_ell(j) P_4ell(j))."""
    _check_ell(ell)
    value = evaluate_at_rational(
        hilbert_class_polynomial(ell, max_precision), j
    ) * evaluate_at_rational(hilbert_class_polynomial(4 * ell, max_precision), j)
    return -value.numerator


def prime_bound_constant(
    variant: Literal["boundp", "boundpnoj"], lnum_constant: float = DEFAULT_LNUM_CONSTANT
) -> mpmath.mpf:
    base = _BOUNDP_CONSTANT if variant == "boundp" else _BOUNDPNOJ_CONSTANT
    return base * mpmath.mpf(lnum_constant) / mpmath.mpf(DEFAULT_LNUM_CONSTANT)


def n_ell_log_bound(ell: int, h_j, constant: float = DEFAULT_LNUM_CONSTANT) -> mpmath.mpf:
    """Upper bound constant * sqrt(ell) (log ell)^2 * max(log 2, h(j)) for log N_ell."""
    return mpmath.mpf(constant) * mpmath.sqrt(ell) * mpmath.log(ell) ** 2 * mpmath.mpf(h_j)


def _witness(p: int, ell: int) -> Optional[str]:
    if p == ell:
        return "p = ell"
    if legendre_unchecked(p, ell) == -1:
        return "legendre(p, ell) = -1"
    return None


def _try_factor(
    model: WeierstrassModel, p: int, ell: int, max_point_count_prime: int
) -> Optional[Tuple[str, int]]:
    if p < 5:
        return None
    witness = _witness(p, ell)
    if witness is None:
        return None
    if p > max_point_count_prime:
        logger.info(f"factor {p} passes the witness test but exceeds the point-count cap")
        return None
    if not has_good_reduction(model, p):
        return None
    a_p = trace_of_frobenius(model, p)
    if a_p != 0:
        logger.warning(f"factor {p} with {witness} has a_p = {a_p}; skipping")
        return None
    return witness, a_p


def extract_supersingular(
    model: WeierstrassModel,
    invariants: CurveInvariants,
    N_ell: int,
    ell: int,
    *,
    trial_division_bound: int = 10**7,
    max_point_count_prime: int = 10**7,
    n: int = MIN_THRESHOLD,
) -> SupersingularCertificate:
    """Smallest certified supersingular prime factor of N_ell.

    Trial division by sieved primes up to ``trial_division_bound``, then a primality test
    on what is left; an unfactored composite cofactor ends in ExtractionIncompleteError.
    """
    if N_ell <= 0:
        raise InvalidArgumentError("N_ell must be positive")

    def certify(p: int, found: Tuple[str, int]) -> SupersingularCertificate:
        witness, a_p = found
        logger.info(f"certified supersingular prime {p} ({witness})")
        return SupersingularCertificate(
            p=p, ell=ell, witness=witness, a_p=a_p, n=n, nl_digits=len(str(N_ell))
        )

    remaining = N_ell
    for p in iter_primes(trial_division_bound):
        if p * p > remaining:
            break
        if remaining % p:
            continue
        while remaining % p == 0:
            remaining //= p
        if invariants.conductor % p == 0:
            continue
        found = _try_factor(model, p, ell, max_point_count_prime)
        if found is not None:
            return certify(p, found)

    if remaining > 1 and is_prime(remaining):
        found = _try_factor(model, remaining, ell, max_point_count_prime)
        if found is not None:
            return certify(remaining, found)
        remaining = 1

    raise ExtractionIncompleteError(
        f"no certified supersingular factor of N_{ell} within trial division to "
        f"{trial_division_bound}",
        cofactor=remaining,
    )


def validate_certificate(
    cert: SupersingularCertificate,
    model: WeierstrassModel,
    invariants: CurveInvariants,
    N_ell: Optional[int] = None,
) -> List[str]:
    """Problems found when re-checking ``cert`` from scratch; empty when it holds."""
    problems: List[str] = []
    if cert.p < 5 or not is_prime(cert.p):
        problems.append(f"{cert.p} is not a prime >= 5")
        return problems
    try:
        a_p = trace_of_frobenius(model, cert.p)
    except BadReductionError:
        problems.append(f"bad reduction at {cert.p}")
        return problems
    if a_p != 0:
        problems.append(f"a_{cert.p} = {a_p}")

    if cert.witness == "direct-scan":
        return problems

    ell = cert.ell
    if ell is None or ell < 7 or ell % 4 != 3 or not is_prime(ell):
        problems.append(f"ell = {ell} is not a prime = 3 mod 4")
        return problems
    if _witness(cert.p, ell) != cert.witness:
        problems.append(f"witness {cert.witness!r} does not hold for p={cert.p}, ell={ell}")
    if N_ell is None:
        N_ell = numerator_N_ell(invariants.j, ell)
    if N_ell % cert.p:
        problems.append(f"{cert.p} does not divide N_{ell}")
    if cert.q is not None and cert.a is not None and ell % cert.q != cert.a:
        problems.append(f"ell = {ell} is not {cert.a} mod {cert.q}")
    return problems


# =============================================================================
# Explicit bounds for the supersingular prime
# =============================================================================


def boundpnoj_threshold(N: int, M: int = 0) -> int:
    log_n = mpmath.log(N)
    return max(M, int(mpmath.ceil((6 * N * log_n) ** 2)))


def ss_prime_log_bound(
    N: int,
    n: Optional[int],
    h_j=None,
    variant: BoundVariant = "boundp",
    *,
    M: int = 0,
    c=None,
    q: Optional[int] = None,
    theta_caps: Optional[Dict[str, int]] = None,
    lnum_constant: float = DEFAULT_LNUM_CONSTANT,
) -> BoundValue:
    """log of the explicit upper bound for the supersingular prime, as a huge BoundValue.

    ``boundp`` needs n and h_j; ``boundpnoj`` derives n from M and N; ``effectiveElkies``
    needs c, q and h_j. The boundp and boundpnoj constants scale with ``lnum_constant``.
    """
    if lnum_constant <= 0:
        raise InvalidArgumentError("lnum_constant must be positive")
    if N < MIN_THRESHOLD:
        raise InvalidArgumentError(f"conductor {N} < 11 does not occur")
    caps = theta_caps or {}

    if variant == "effectiveElkies":
        if c is None or q is None or h_j is None:
            raise InvalidArgumentError("effectiveElkies needs c, q and h_j")
        if c <= 0 or q < 3 or h_j <= 0:
            raise InvalidArgumentError("effectiveElkies needs c > 0, q >= 3 and h_j > 0")
        log_q = mpmath.log(q)
        return BoundValue.huge_from_log(
            mpmath.log(c) + mpmath.mpf(5) / 2 * log_q + 2 * mpmath.log(log_q)
            + mpmath.log(h_j)
        )

    log_n_cond = mpmath.log(N)
    if variant == "boundpnoj":
        n = boundpnoj_threshold(N, M)
        constant = prime_bound_constant("boundpnoj", lnum_constant)
        trailing = mpmath.log(N * log_n_cond)
    elif variant == "boundp":
        if n is None or h_j is None:
            raise InvalidArgumentError("boundp needs n and h_j")
        constant = prime_bound_constant("boundp", lnum_constant)
        trailing = mpmath.log(h_j)
    else:
        raise InvalidArgumentError(f"unknown bound variant {variant!r}")
    if n < MIN_THRESHOLD:
        raise InvalidArgumentError("n must be at least 11")

    _, theta = theta_bounds(n, **caps)
    L = mpmath.log(8) + log_n_cond + theta
    log_x = (
        mpmath.log(constant)
        + mpmath.mpf("0.018") * mpmath.exp(L / 2) * L**3
        + log_n_cond
        + theta
        + 6 * mpmath.log(L)
        + trailing
    )
    return BoundValue.huge_from_log(log_x)


# =============================================================================
# End-to-end search
# =============================================================================


def elkies_threshold(invariants: CurveInvariants, M: int = 0) -> int:
    return max(MIN_THRESHOLD, M, int(mpmath.ceil(b_e_threshold(invariants.j))))


def direct_scan(
    model: WeierstrassModel,
    start: int,
    *,
    effort: int = 10**6,
    max_point_count_prime: int = 10**7,
) -> Tuple[int, int]:
    """Least p >= max(5, start) of good reduction with a_p = 0, and the count scanned."""
    p = max(5, start)
    scanned = 0
    while scanned < effort:
        if p > max_point_count_prime:
            break
        if is_prime(p):
            scanned += 1
            if has_good_reduction(model, p) and trace_of_frobenius(model, p) == 0:
                return p, scanned
        p += 1
    raise EffortExhaustedError(f"no supersingular prime found in {scanned} primes from {start}")


def search_supersingular_prime(
    model: WeierstrassModel,
    invariants: CurveInvariants,
    M: int = 0,
    config: Optional[SearchConfig] = None,
    *,
    mode: SearchMode = "elkies",
) -> SupersingularCertificate:
    config = config or SearchConfig()
    timings: Dict[str, float] = {}
    settings = config.model_dump()
    settings.update({"M": M, "mode": mode})

    if mode == "direct":
        with _stage("direct-scan", timings):
            p, scanned = direct_scan(
                model,
                M,
                effort=config.scan_effort,
                max_point_count_prime=config.max_point_count_prime,
            )
        logger.info(f"direct scan found supersingular prime {p} after {scanned} primes")
        return SupersingularCertificate(
            p=p, witness="direct-scan", a_p=0, n=max(5, M), config=settings, timings=timings
        )

    if invariants.has_cm:
        raise CMCurveError(
            "curve has complex multiplication; use the CM height bound 3^-14 instead",
            stage="guard",
        )

    n = elkies_threshold(invariants, M)
    if n > config.theta_cap:
        bound = ss_prime_log_bound(
            invariants.conductor,
            n,
            invariants.h_j,
            "boundp",
            theta_caps=config.theta_caps(),
            lnum_constant=config.lnum_constant,
        )
        raise SearchInfeasibleError(
            f"threshold n = {n} exceeds theta_cap = {config.theta_cap}; "
            "only the symbolic bound is available",
            log_bound=bound,
            stage="threshold",
        )

    with _stage("congruence", timings):
        system = assemble_congruence(
            invariants.conductor, n, max_modulus_bits=config.max_modulus_bits
        )
    with _stage("progression", timings):
        found = find_prime_in_ap(system, effort=config.scan_effort)
    ell = found.ell
    logger.info(f"ell = {ell} found after {found.scanned} candidates (q = {system.modulus})")

    with _stage("numerator", timings):
        N_ell = numerator_N_ell(invariants.j, ell, max_precision=config.max_precision_bits)
    if N_ell <= 0:
        raise InvalidArgumentError(
            f"N_{ell} = {N_ell} is not positive; ell must exceed B_E", stage="numerator"
        )
    log_cap = n_ell_log_bound(ell, max(mpmath.log(2), invariants.h_j), config.lnum_constant)
    settings["log_N_ell_cap"] = format_real(log_cap)
    if mpmath.log(N_ell) > log_cap:
        logger.warning(f"log N_{ell} exceeds the cap {format_real(log_cap, 8)}")

    with _stage("extraction", timings):
        cert = extract_supersingular(
            model,
            invariants,
            N_ell,
            ell,
            trial_division_bound=config.trial_division_bound,
            max_point_count_prime=config.max_point_count_prime,
            n=n,
        )
    return cert.model_copy(
        update={
            "q": system.modulus,
            "a": system.residue,
            "config": settings,
            "timings": timings,
        }
    )
