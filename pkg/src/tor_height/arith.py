"""Integer and rational primitives: Legendre symbols, CRT, sieving and Chebyshev theta."""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Iterator, List, Sequence, Tuple

import mpmath
import sympy
from sympy.ntheory import jacobi_symbol
from sympy.ntheory.modular import crt

from tor_height.exceptions import InvalidArgumentError
from tor_height.models import PrimeList, ThetaValue

logger = logging.getLogger(__name__)

# Rosser and Schoenfeld: theta(x) < 1.01624 x for x > 0, theta(x) > x (1 - 1/log x) for x >= 41.
THETA_UPPER_RATIO = mpmath.mpf("1.01624")
THETA_LOWER_FROM = 41

DEFAULT_THETA_CAP = 10**6
DEFAULT_THETA_SUM_CAP = 10**7


def is_prime(n: int) -> bool:
    """Deterministic below 2**64, strong BPSW probable-prime test above."""
    return n >= 2 and bool(sympy.isprime(n))


def legendre_symbol(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p."""
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise InvalidArgumentError(f"legendre_symbol needs an odd prime, got {p}")
    return int(jacobi_symbol(a % p, p))


def legendre_unchecked(a: int, p: int) -> int:
    """(a/p) by reciprocity, for callers that already know p is an odd prime."""
    return int(jacobi_symbol(a % p, p))


def crt_combine(congruences: Sequence[Tuple[int, int]]) -> Tuple[int, int]:
    """Combine ``x = r mod m`` pairs with pairwise coprime moduli into ``(a, q)``."""
    if not congruences:
        return 0, 1
    moduli = [m for _, m in congruences]
    if any(m < 1 for m in moduli):
        raise InvalidArgumentError("moduli must be positive")
    for i, m in enumerate(moduli):
        for other in moduli[i + 1:]:
            if math.gcd(m, other) != 1:
                raise InvalidArgumentError(f"moduli {m} and {other} are not coprime")

    result = crt(moduli, [r % m for r, m in congruences], check=False)
    q = math.prod(moduli)
    a = int(result[0]) % q if result is not None else 0
    return a, q


@lru_cache(maxsize=8)
def _sieve(limit: int) -> Tuple[int, ...]:
    return tuple(int(p) for p in sympy.primerange(2, limit + 1))


def iter_primes(limit: int) -> Iterator[int]:
    """Lazy ascending primes <= limit, for scans that usually stop early."""
    for p in sympy.primerange(2, limit + 1):
        yield int(p)


def primes_up_to(limit: int) -> PrimeList:
    if limit < 0:
        raise InvalidArgumentError("limit must be non-negative")
    return PrimeList.model_construct(limit=limit, primes=list(_sieve(limit)))


def product_tree(values: Sequence[int]) -> int:
    """Balanced product, much faster than a running product for long prime lists."""
    if not values:
        return 1
    layer = list(values)
    while len(layer) > 1:
        paired = [layer[i] * layer[i + 1] for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            paired.append(layer[-1])
        layer = paired
    return layer[0]


def primorial(n: int) -> int:
    """Product of all primes <= n."""
    return product_tree(_sieve(max(n, 0)))


def chebyshev_theta(
    n: int,
    *,
    theta_cap: int = DEFAULT_THETA_CAP,
    sum_cap: int = DEFAULT_THETA_SUM_CAP,
) -> ThetaValue:
    """theta(n) = sum of log p over primes p <= n.

    Summed prime by prime at ``mp.prec + 32`` bits up to ``sum_cap``; the error bound covers
    rounding of every logarithm and the summation. Beyond ``sum_cap`` the quoted upper
    bound 1.01624 n is returned instead and ``method`` says so. The exact primorial is kept
    for n <= ``theta_cap``.
    """
    if n < 0:
        raise InvalidArgumentError("n must be non-negative")
    if n > sum_cap:
        logger.info(f"theta({n}) exceeds the summation cap, using the upper bound 1.01624 n")
        return ThetaValue(n=n, value=THETA_UPPER_RATIO * n, error_bound=0, method="upper-bound")

    primes = _sieve(n)
    prec = mpmath.mp.prec + 32
    with mpmath.workprec(prec):
        value = mpmath.fsum(mpmath.log(p) for p in primes)
        error = (len(primes) + 1) * abs(value) * mpmath.ldexp(1, 2 - prec)
    primorial_value = product_tree(primes) if n <= theta_cap else None
    return ThetaValue(
        n=n,
        value=+value,
        error_bound=+error,
        method="summed",
        primorial=primorial_value,
    )


def theta_bounds(n: int, **caps: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """Certified ``(lower, upper)`` for theta(n)."""
    theta = chebyshev_theta(n, **caps)
    if theta.method == "summed":
        return theta.value - theta.error_bound, theta.value + theta.error_bound
    lower = n * (1 - 1 / mpmath.log(n)) if n >= THETA_LOWER_FROM else mpmath.mpf(0)
    return lower, theta.value


def radical(n: int) -> int:
    if n == 0:
        raise InvalidArgumentError("radical(0) is undefined")
    return math.prod(int(p) for p in sympy.primefactors(abs(n)))


def euler_phi(q: int) -> int:
    if q < 1:
        raise InvalidArgumentError("euler_phi needs q >= 1")
    return int(sympy.totient(q))


def odd_prime_divisors(n: int) -> List[int]:
    return [int(p) for p in sympy.primefactors(abs(n)) if p != 2]


def smallest_residue_with_symbol(p: int, required: int) -> int:
    """Least r in [1, p) with (r/p) == required."""
    for r in range(1, p):
        if legendre_unchecked(r, p) == required:
            return r
    raise InvalidArgumentError(f"no residue mod {p} has symbol {required}")
