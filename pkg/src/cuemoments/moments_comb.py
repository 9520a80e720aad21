"""Combinatorial cross-checks for ``b_k'``.

* :func:`bkprime_comb` sums over compositions ``m = (m_0, ..., m_k)`` of
  ``2k`` the terms ``binom(2k; m) (-1/2)^{m_0} prod 1/(2k-i+m_i)!`` times the
  Vandermonde-type product ``prod_{i<j} (m_j - m_i + i - j)``.
* :func:`hughes_B` evaluates Hughes' constant ``B(h, k)`` as the
  ``beta^{2h}`` coefficient of a finite-difference sum of determinants.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Iterator

import mpmath

from . import config
from .errors import ConsistencyError, InputError, ResourceError
from .exactnum import binomial, factorial, multinomial
from .moments_det import bk_det, sign_k
from .series import TruncatedSeries, coefficient, exp_series, series_det

Composition = tuple[int, ...]


def compositions(total: int, parts: int) -> Iterator[Composition]:
    """Ordered tuples of ``parts`` non-negative ints summing to ``total``.

    Yielded in lexicographic order; there are ``C(total+parts-1, parts-1)``.
    """
    if total < 0 or parts < 1:
        raise InputError("need total >= 0 and parts >= 1")
    prefix = [0] * parts

    def rec(pos: int, rem: int):
        if pos == parts - 1:
            prefix[pos] = rem
            yield tuple(prefix)
            return
        for v in range(rem + 1):
            prefix[pos] = v
            yield from rec(pos + 1, rem - v)

    yield from rec(0, total)


def comb_term(m: Composition) -> Fraction:
    """Single summand of the composition sum (without the overall sign)."""
    k = len(m) - 1
    vand = 1
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            vand *= m[j] - m[i] + i - j
    if not vand:
        return Fraction(0)
    den = 1
    for i in range(1, k + 1):
        den *= factorial(2 * k - i + m[i])
    return Fraction(multinomial(2 * k, m) * vand, den) * Fraction(-1, 2) ** m[0]


def _comb_partial(k: int, first_parts: tuple[int, ...]) -> int:
    """Integer-scaled partial sum over compositions whose ``m_1`` is listed.

    Every factor is rescaled to an integer: ``W[i][m] = L/(m! (2k-i+m)!)``
    with ``L = (2k)! (4k-1)!`` and ``head[m0] = (2k)!/m0! (-1)^m0 2^(2k-m0)``.
    The true sum is the returned value over ``2^(2k) L^k``.  Writing
    ``l_i = m_i - i`` the Vandermonde factor is ``prod_{i<j} (l_j - l_i)``,
    so a branch is pruned as soon as two ``l`` values coincide.
    """
    K2 = 2 * k
    L = factorial(K2) * factorial(4 * k - 1)
    W = [None] + [
        [L // (factorial(m) * factorial(K2 - i + m)) for m in range(K2 + 1)]
        for i in range(1, k + 1)
    ]
    head = [
        factorial(K2) // factorial(m0) * (-1) ** m0 * 2 ** (K2 - m0) for m0 in range(K2 + 1)
    ]
    ls = [0] * (k + 1)
    total = 0

    def rec(j: int, rem: int, prod: int) -> None:
        nonlocal total
        Wj = W[j]
        prev = ls[1:j]
        if j == k:
            s = 0
            for m in range(rem + 1):
                lj = m - j
                v = 1
                for x in prev:
                    v *= lj - x
                    if not v:
                        break
                if v:
                    s += Wj[m] * head[rem - m] * v
            total += s * prod
            return
        for m in range(rem + 1):
            lj = m - j
            v = 1
            for x in prev:
                v *= lj - x
                if not v:
                    break
            if v:
                ls[j] = lj
                rec(j + 1, rem - m, prod * Wj[m] * v)

    if k == 1:
        # only m_1 is free; it is also the last part
        for m1 in first_parts:
            total += W[1][m1] * head[K2 - m1]
        return total
    for m1 in first_parts:
        ls[1] = m1 - 1
        rec(2, K2 - m1, W[1][m1])
    return total


def comb_term_count(k: int) -> int:
    """Number of compositions of 2k into k+1 parts, ``C(3k, k)``."""
    return math.comb(3 * k, k)


def bkprime_comb(k: int, k_max: int = config.K_COMB_MAX, jobs: int = 1) -> Fraction:
    """``b_k'`` from the composition sum.

    The compositions are split by their ``m_1`` value into ``jobs``
    contiguous ranges that are summed independently (in worker processes
    when ``jobs > 1``) and added in a fixed order.
    """
    if not isinstance(k, int) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if k > k_max:
        raise ResourceError(
            f"k={k} exceeds K_comb_max={k_max}: the composition sum has "
            f"C({3 * k},{k}) = {comb_term_count(k):.3e} terms; use the det method"
        )
    values = list(range(2 * k + 1))
    jobs = max(1, min(jobs, len(values)))
    chunks = [tuple(values[w::jobs]) for w in range(jobs)]
    if jobs == 1:
        partials = [_comb_partial(k, chunks[0])]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            partials = list(pool.map(_comb_partial, [k] * jobs, chunks))
    L = factorial(2 * k) * factorial(4 * k - 1)
    return sign_k(k) * Fraction(sum(partials), 2 ** (2 * k) * L**k)


def fk(k: int) -> Fraction:
    """``prod_{j=0}^{k-1} j!/(k+j)!``."""
    if k < 1:
        raise InputError("k must be >= 1")
    out = Fraction(1)
    for j in range(k):
        out *= Fraction(factorial(j), factorial(k + j))
    return out


# ---------------------------------------------------------------------------
# Hughes' constant

HUGHES_FORMS = ("corrected", "printed")


def _hughes_entry(form: str, n: int, i: int, j: int, m: int, k: int) -> Fraction:
    if form == "printed":
        a = 2 * k - n + i - 1
    else:
        a = i + k - 1
    return (
        Fraction(factorial(a), factorial(a + m))
        * binomial(i + k - n - 1 + m, m)
        * binomial(i + m - 1, j - 1)
    )


def hughes_sum(h: int, k: int, form: str = "corrected") -> TruncatedSeries:
    """The full finite-difference sum as a series in beta of order ``2h``.

    ``sum_n (-1)^(n-h) C(2h, n) exp(s n beta/2) det[b_ij(beta)]`` with
    ``s = +1`` for the corrected form and ``s = -1`` for the printed one.
    """
    if form not in HUGHES_FORMS:
        raise InputError(f"unknown form {form!r}; choose from {HUGHES_FORMS}")
    if not (0 <= h <= k) or k < 1:
        raise InputError(f"need 0 <= h <= k and k >= 1, got h={h}, k={k}")
    d = 2 * h
    s = 1 if form == "corrected" else -1
    total = TruncatedSeries.zero(d)
    for n in range(2 * h + 1):
        matrix = [
            [
                TruncatedSeries(tuple(_hughes_entry(form, n, i, j, m, k) for m in range(d + 1)))
                for j in range(1, k + 1)
            ]
            for i in range(1, k + 1)
        ]
        det = series_det(matrix, d)
        weight = (-1) ** abs(n - h) * math.comb(2 * h, n)
        total = total + exp_series(Fraction(s * n, 2), d) * det * weight
    return total


def hughes_B(
    h: int, k: int, form: str = "corrected", k_max: int = config.HUGHES_K_MAX
) -> Fraction:
    """Hughes' constant ``B(h, k) = lim beta^(-2h) (finite-difference sum)``.

    The limit exists only if every coefficient below ``beta^(2h)`` cancels;
    a surviving one raises :class:`ConsistencyError`.  ``form="printed"``
    uses the entries exactly as usually quoted, which do not cancel (kept for
    reference); the default ``"corrected"`` form takes the factorial ratio
    ``(i+k-1)!/(i+k-1+m)!`` and ``exp(+n beta/2)`` instead.
    """
    if k > k_max:
        raise ResourceError(f"k={k} exceeds the Hughes limit {k_max}")
    total = hughes_sum(h, k, form)
    leftover = [(j, c) for j, c in enumerate(total.coefficients[: 2 * h]) if c]
    if leftover:
        j, c = leftover[0]
        raise ConsistencyError(
            f"B({h},{k}) [{form}]: coefficient of beta^{j} is {c}, not 0; "
            "the beta -> 0 limit does not exist for these entries"
        )
    return coefficient(total, 2 * h)


def ratio_4k_exact(k: int) -> Fraction:
    return 4**k * bk_det(k) / fk(k)


def ratio_4k(k: int, digits: int = 30) -> mpmath.mpf:
    """``4^k b_k / f_k`` converted from the exact value to ``digits`` digits."""
    q = ratio_4k_exact(k)
    with mpmath.workdps(digits):
        return +(mpmath.mpf(q.numerator) / q.denominator)
