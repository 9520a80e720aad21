"""The arithmetic factor ``a_k`` and the conjectured leading terms.

The local factor at a prime is

    F_k(x) = (1-x)^(k^2) sum_m C(m+k-1, m)^2 x^m,    x = 1/p,

and by Euler's transformation of 2F1(k, k; 1; x) this equals the finite form
``(1-x)^((k-1)^2) Q_k(x)`` with ``Q_k(x) = sum_{m<k} C(k-1, m)^2 x^m``.
Primes up to a cutoff ``P`` are multiplied directly.  The tail ``p > P`` is
handled through ``log F_k(x) = sum_n c_n x^n`` with exact rational ``c_n`` and
``sum_{p>P} p^-n = primezeta(n) - sum_{p<=P} p^-n``.

Tail certificate: ``Q_k`` has only negative real roots ``-r_j`` (it is a
Legendre polynomial in disguise) and ``sum 1/r_j = (k-1)^2``, hence
``|c_n| <= ((k-1)^2 + (k-1)^(2n))/n``; together with
``sum_{p>P} p^-n <= P^(1-n)/(n-1)`` the dropped terms ``n > M`` are bounded
by a geometric series of ratio ``max(1, (k-1)^2)/P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath

from . import config
from .errors import InputError, ResourceError
from .exactnum import primes_upto
from .moments_det import bk_det, bkprime_det

MAX_TAIL_TERMS = 5000


@dataclass(frozen=True)
class AkResult:
    value: mpmath.mpf
    error_bound: mpmath.mpf
    prime_cutoff: int
    # terms of the 1/p expansion used for the prime tail
    per_prime_terms: int


def local_poly(k: int) -> list[int]:
    """Coefficients of ``Q_k(x) = sum_{m<k} C(k-1, m)^2 x^m``."""
    return [math.comb(k - 1, m) ** 2 for m in range(k)]


def log_local_coefficients(k: int, count: int) -> list[Fraction]:
    """``c_0 .. c_count`` with ``log F_k(x) = sum c_n x^n`` (exact)."""
    Q = local_poly(k)
    Q += [0] * (count + 1 - len(Q))
    # (log Q)' Q = Q'  =>  n q_n = n Q_n - sum_{j=1}^{n-1} j q_j Q_{n-j}
    q = [Fraction(0)] * (count + 1)
    for n in range(1, count + 1):
        s = Fraction(n * Q[n])
        for j in range(1, n):
            if q[j] and Q[n - j]:
                s -= j * q[j] * Q[n - j]
        q[n] = s / n
    a = (k - 1) ** 2
    return [Fraction(0)] + [q[n] - Fraction(a, n) for n in range(1, count + 1)]


def _remainder_bound(k: int, P: int, M: int) -> float:
    a = (k - 1) ** 2
    if a == 0:
        return 0.0
    rho = max(1, a) / P
    n = M + 1
    # log-space so huge (k-1)^(2n) does not overflow
    lead = math.log(a + 0.0) - (n - 1) * math.log(P)
    lead2 = n * math.log(a) - (n - 1) * math.log(P)
    term = (math.exp(lead) + math.exp(lead2)) / (n * (n - 1))
    return term / (1 - rho)


def _default_cutoff(k: int) -> int:
    return max(1000, 4 * max(1, (k - 1) ** 2) + 1)


def ak(
    k: int,
    tolerance: float = 1e-20,
    *,
    prime_cutoff: int | None = None,
    digits: int = config.AK_DIGITS,
    prime_cap: int = config.PRIME_CAP,
) -> AkResult:
    """``a_k`` with a certified error bound not exceeding ``tolerance``."""
    if not isinstance(k, int) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if not tolerance > 0:
        raise InputError("tolerance must be positive")
    P = _default_cutoff(k) if prime_cutoff is None else int(prime_cutoff)
    a = (k - 1) ** 2
    if P > prime_cap:
        raise ResourceError(f"prime cutoff {P} exceeds the cap {prime_cap}")
    if P <= 2 * max(1, a):
        raise InputError(f"prime_cutoff must exceed {2 * max(1, a)} for k={k}")

    # smallest M whose dropped tail is below half the tolerance
    M = 1
    while _remainder_bound(k, P, M) > tolerance / 2:
        M += 1
        if M > MAX_TAIL_TERMS:
            raise ResourceError(f"tolerance {tolerance} needs more than {MAX_TAIL_TERMS} tail terms")
    if a == 0:
        M = 0
    digits = max(digits, int(-math.log10(tolerance)) + 10)
    primes = primes_upto(P)
    wp = digits + int(M * math.log10(P)) + 10
    Q = local_poly(k)

    with mpmath.workdps(wp):
        log_sum = mpmath.mpf(0)
        for p in primes:
            x = mpmath.mpf(1) / p
            log_sum += a * mpmath.log1p(-x) + mpmath.log(mpmath.polyval(Q[::-1], x))
        if M:
            c = log_local_coefficients(k, M)
            for n in range(2, M + 1):
                if not c[n]:
                    continue
                partial = mpmath.fsum(mpmath.mpf(p) ** (-n) for p in primes)
                tail = mpmath.primezeta(n) - partial
                log_sum += mpmath.mpf(c[n].numerator) / c[n].denominator * tail
        value = mpmath.exp(log_sum)
        rounding = mpmath.mpf(10) ** (-(wp - 5)) * (len(primes) + M + 1) * (1 + abs(log_sum))
        log_err = mpmath.mpf(_remainder_bound(k, P, M)) + rounding
        bound = value * mpmath.expm1(log_err) * mpmath.mpf("1.01")
        # express at the requested precision, leaving room for the rounding
        value = +value
    with mpmath.workdps(digits):
        return AkResult(+value, +bound + mpmath.mpf(10) ** (-digits), P, M)


class LeadingTerm(NamedTuple):
    value: mpmath.mpf
    error_bound: mpmath.mpf


WHICH = ("zeta_prime", "z_prime")


def conjectured_leading(
    k: int, logT: float, which: str = "zeta_prime", tolerance: float = 1e-30,
    digits: int = config.AK_DIGITS,
) -> LeadingTerm:
    """``a_k b_k (log T)^(k^2+2k)`` or the same with ``b_k'``."""
    if which not in WHICH:
        raise InputError(f"which must be one of {WHICH}")
    if not logT > 0:
        raise InputError("logT must be positive")
    res = ak(k, tolerance, digits=digits)
    b = bk_det(k) if which == "zeta_prime" else bkprime_det(k)
    with mpmath.workdps(digits):
        scale = mpmath.mpf(b.numerator) / b.denominator * mpmath.mpf(logT) ** (k * k + 2 * k)
        return LeadingTerm(res.value * scale, res.error_bound * scale)
