"""Exact integer and rational primitives.

Rationals are :class:`fractions.Fraction` values, which are always kept in
lowest terms with a positive denominator.  This module adds the combinatorial
helpers used by the coefficient formulas and a factored rendering of
rationals (``61/(2^5·3^2·5·7)``) matching the way the tables are printed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError

Rational = Fraction

SEP = "·"

_factorials: list[int] = [1]


def factorial(n: int) -> int:
    """Return ``n!``, memoizing every factorial up to the largest ``n`` seen."""
    if n < 0:
        raise InputError(f"factorial of negative integer {n}")
    cache = _factorials
    while len(cache) <= n:
        cache.append(cache[-1] * len(cache))
    return cache[n]


def multinomial(total: int, parts: Sequence[int]) -> int:
    if any(p < 0 for p in parts):
        raise InputError(f"negative part in {list(parts)}")
    if sum(parts) != total:
        raise InputError(f"parts {list(parts)} do not sum to {total}")
    out = factorial(total)
    for p in parts:
        out //= factorial(p)
    return out


def binomial(a: int, m: int) -> Fraction:
    """Generalized binomial ``a(a-1)...(a-m+1)/m!`` for any integer ``a``.

    Agrees with ``math.comb`` for ``a >= 0``; for negative ``a`` it is the
    polynomial continuation (e.g. ``binomial(-1, 2) == 1``).
    """
    if m < 0:
        return Fraction(0)
    if a >= 0:
        return Fraction(math.comb(a, m))
    num = 1
    for t in range(m):
        num *= a - t
    return Fraction(num, factorial(m))


# ---------------------------------------------------------------------------
# primes

_sieve_cache: dict[int, list[int]] = {}


def primes_upto(bound: int) -> list[int]:
    """All primes ``p <= bound`` (sieve of Eratosthenes, cached per bound)."""
    if bound < 2:
        return []
    cached = _sieve_cache.get(bound)
    if cached is not None:
        return cached
    flags = bytearray([1]) * (bound + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(bound) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(range(p * p, bound + 1, p)))
    out = [i for i, f in enumerate(flags) if f]
    _sieve_cache[bound] = out
    return out


# Miller-Rabin with these bases is deterministic below this bound.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool | None:
    """Primality with certainty, or ``None`` when undecided.

    Deterministic Miller-Rabin below ~3.3e24.  Above that a composite is still
    detected reliably, but a number passing every base is reported as
    ``None`` (undecided) rather than claimed prime.
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True if n < _MR_DETERMINISTIC_LIMIT else None


# ---------------------------------------------------------------------------
# factored rationals


@dataclass(frozen=True)
class FactoredRational:
    """Prime factorization of a rational, possibly with unfactored cofactors.

    ``residual_numerator`` / ``residual_denominator`` hold whatever trial
    division could not split (1 when the factorization is complete).
    """

    sign: int
    numerator_factors: tuple[tuple[int, int], ...]
    denominator_factors: tuple[tuple[int, int], ...]
    residual_numerator: int = 1
    residual_denominator: int = 1

    def value(self) -> Fraction:
        num = self.residual_numerator
        for p, e in self.numerator_factors:
            num *= p**e
        den = self.residual_denominator
        for p, e in self.denominator_factors:
            den *= p**e
        return Fraction(self.sign * num, den)

    def __str__(self) -> str:
        if self.sign == 0:
            return "0"
        num = _join(self.numerator_factors, self.residual_numerator)
        text = ("-" if self.sign < 0 else "") + num
        if self.denominator_factors or self.residual_denominator != 1:
            text += "/(" + _join(self.denominator_factors, self.residual_denominator) + ")"
        return text


def _join(factors: Iterable[tuple[int, int]], residual: int) -> str:
    items = [f"{p}^{e}" if e > 1 else str(p) for p, e in factors]
    if residual != 1:
        items.append(str(residual))
    return SEP.join(items) if items else "1"


def _factor_int(n: int, trial_bound: int) -> tuple[tuple[tuple[int, int], ...], int]:
    factors = []
    for p in primes_upto(trial_bound):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
    if n > 1 and (n <= trial_bound or n < trial_bound * trial_bound or is_prime(n)):
        # n has no factor <= min(trial_bound, sqrt(n)) here, so it is prime
        # whenever it lies below trial_bound**2
        factors.append((n, 1))
        n = 1
    return tuple(factors), n


def factor_rational(q: Fraction, trial_bound: int = 10**6) -> FactoredRational:
    """Factor numerator and denominator by trial division up to ``trial_bound``.

    A leftover cofactor is listed as a prime only when it is certified prime;
    otherwise it is kept as a residual.  Reconstruction is always exact.
    """
    if trial_bound < 2:
        raise InputError("trial_bound must be >= 2")
    q = Fraction(q)
    if q == 0:
        return FactoredRational(0, (), ())
    nf, nr = _factor_int(abs(q.numerator), trial_bound)
    df, dr = _factor_int(q.denominator, trial_bound)
    return FactoredRational(1 if q > 0 else -1, nf, df, nr, dr)


def format_plain(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def format_factored(q: Fraction, trial_bound: int = 10**6) -> str:
    return str(factor_rational(q, trial_bound))


_TOKEN = re.compile(r"^(\d+)(?:\^(\d+))?$")


def _parse_product(text: str) -> list[tuple[int, int]]:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    out = []
    for tok in re.split(r"[·*]", text):
        m = _TOKEN.match(tok.strip())
        if not m:
            raise InputError(f"cannot parse factor {tok!r}")
        out.append((int(m.group(1)), int(m.group(2) or 1)))
    return out


def parse_factored_parts(text: str) -> tuple[int, list[tuple[int, int]], list[tuple[int, int]]]:
    """Split ``[-]a^e·b/(c^f·d)`` into sign, numerator and denominator factors.

    Factors are returned as written (they need not be prime or sorted).
    """
    text = text.strip()
    sign = 1
    if text.startswith("-"):
        sign, text = -1, text[1:]
    num, _, den = text.partition("/")
    return sign, _parse_product(num), _parse_product(den) if den else []


def parse_factored(text: str) -> Fraction:
    """Inverse of :func:`format_factored`; also accepts plain ``num/den``."""
    sign, num, den = parse_factored_parts(text)
    n = math.prod(p**e for p, e in num)
    d = math.prod(p**e for p, e in den)
    if d == 0:
        raise InputError("zero denominator")
    return Fraction(sign * n, d)
