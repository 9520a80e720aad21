"""Truncated power series with exact rational coefficients.

A :class:`TruncatedSeries` of order ``d`` knows the coefficients of
``x^0 .. x^d``; anything above is unknown, never zero.  Products keep the
smaller order.  Determinants of matrices of series are computed on integer
coefficient vectors (each row scaled by a common denominator) so that the
inner loops run on Python ints instead of fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError, OutOfRangeError
from .exactnum import factorial


@dataclass(frozen=True)
class TruncatedSeries:
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise InputError("a series needs at least the constant coefficient")
        object.__setattr__(
            self, "coefficients", tuple(Fraction(c) for c in self.coefficients)
        )

    @classmethod
    def zero(cls, order: int) -> "TruncatedSeries":
        return cls((Fraction(0),) * (order + 1))

    @classmethod
    def one(cls, order: int) -> "TruncatedSeries":
        return cls((Fraction(1),) + (Fraction(0),) * order)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def valuation(self) -> int:
        for j, c in enumerate(self.coefficients):
            if c:
                return j
        return self.order + 1

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OutOfRangeError(
                f"cannot extend a series of order {self.order} to order {order}"
            )
        return TruncatedSeries(self.coefficients[: order + 1])

    def _check_same_order(self, other: "TruncatedSeries") -> None:
        if self.order != other.order:
            raise InputError(
                f"series orders differ ({self.order} vs {other.order})"
            )

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_same_order(other)
        return TruncatedSeries(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_same_order(other)
        return TruncatedSeries(tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(tuple(-a for a in self.coefficients))

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            c = Fraction(other)
            return TruncatedSeries(tuple(c * a for a in self.coefficients))
        d = min(self.order, other.order)
        a, b = self.coefficients, other.coefficients
        out = [Fraction(0)] * (d + 1)
        for i in range(d + 1):
            if a[i]:
                ai = a[i]
                for j in range(d + 1 - i):
                    out[i + j] += ai * b[j]
        return TruncatedSeries(tuple(out))

    __rmul__ = __mul__

    def __getitem__(self, j: int) -> Fraction:
        return coefficient(self, j)


def coefficient(s: TruncatedSeries, j: int) -> Fraction:
    """Exact coefficient of ``x^j``; asking beyond the truncation is an error."""
    if j < 0 or j > s.order:
        raise OutOfRangeError(f"coefficient x^{j} requested from a series of order {s.order}")
    return s.coefficients[j]


def exp_series(c, order: int) -> TruncatedSeries:
    """Maclaurin series of ``exp(c x)``."""
    if order < 0:
        raise InputError("order must be >= 0")
    c = Fraction(c)
    return TruncatedSeries(tuple(c**j / factorial(j) for j in range(order + 1)))


def bessel_g(n: int, order: int) -> TruncatedSeries:
    """Series ``g_n`` with ``I_n(2 sqrt(x)) = x^(n/2) g_n(x)``.

    The coefficient of ``x^j`` is ``1/((n+j)! j!)``.
    """
    if n < 0 or order < 0:
        raise InputError("need n >= 0 and order >= 0")
    return TruncatedSeries(
        tuple(Fraction(1, factorial(n + j) * factorial(j)) for j in range(order + 1))
    )


# ---------------------------------------------------------------------------
# integer kernels; a series is a list of d+1 ints


def _imul(a: list[int], b: list[int], d: int) -> list[int]:
    out = [0] * (d + 1)
    for i in range(d + 1):
        ai = a[i]
        if ai:
            for j in range(d + 1 - i):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
    return out


def _iexact_div(num: list[int], den: list[int], d: int) -> list[int]:
    # den[0] != 0 and the quotient is known to have integer coefficients
    q = [0] * (d + 1)
    d0 = den[0]
    for m in range(d + 1):
        s = num[m]
        for l in range(1, m + 1):
            if den[l]:
                s -= den[l] * q[m - l]
        qm, r = divmod(s, d0)
        if r:
            raise ArithmeticError("inexact division in fraction-free elimination")
        q[m] = qm
    return q


def _det_bareiss(M: list[list[list[int]]], d: int) -> list[int] | None:
    """Fraction-free elimination; returns None if no unit pivot exists.

    Pivots are required to have a nonzero constant term, i.e. to be units of
    the truncated ring, which makes every Bareiss division exact.
    """
    k = len(M)
    M = [row[:] for row in M]
    sign = 1
    prev: list[int] | None = None
    for p in range(k):
        r = next((r for r in range(p, k) if M[r][p][0] != 0), None)
        if r is None:
            return None
        if r != p:
            M[p], M[r] = M[r], M[p]
            sign = -sign
        piv = M[p][p]
        for i in range(p + 1, k):
            mip = M[i][p]
            row_i = M[i]
            row_p = M[p]
            for j in range(p + 1, k):
                a = _imul(piv, row_i[j], d)
                b = _imul(mip, row_p[j], d)
                num = [x - y for x, y in zip(a, b)]
                row_i[j] = num if prev is None else _iexact_div(num, prev, d)
        prev = piv
    det = M[k - 1][k - 1]
    return det if sign > 0 else [-c for c in det]


def _det_subsets(M: list[list[list[int]]], d: int) -> list[int]:
    """Division-free expansion by minors over column subsets.

    ``minors[S]`` is the minor formed by the first ``|S|`` rows and the
    columns in bitmask ``S``; row ``r`` extends every subset of size ``r``.
    """
    k = len(M)
    minors: dict[int, list[int]] = {0: [1] + [0] * d}
    for r in range(k):
        nxt: dict[int, list[int]] = {}
        row = M[r]
        for S, minor in minors.items():
            for c in range(k):
                if S >> c & 1:
                    continue
                term = _imul(row[c], minor, d)
                # Laplace sign: columns of S to the right of c
                if bin(S >> (c + 1)).count("1") & 1:
                    term = [-t for t in term]
                T = S | (1 << c)
                acc = nxt.get(T)
                nxt[T] = term if acc is None else [x + y for x, y in zip(acc, term)]
        minors = nxt
    return minors[(1 << k) - 1]


def series_det(
    matrix: Sequence[Sequence[TruncatedSeries]], order: int, method: str = "auto"
) -> TruncatedSeries:
    """Determinant of a square matrix of series, exact up to ``x^order``.

    ``method`` is ``"bareiss"`` (fraction-free elimination with unit
    pivots), ``"subsets"`` (division-free minor expansion, O(2^k k) products)
    or ``"auto"``: Bareiss, falling back to subsets when no unit pivot exists.
    """
    k = len(matrix)
    if k == 0:
        return TruncatedSeries.one(order)
    if any(len(row) != k for row in matrix):
        raise InputError("series_det needs a square matrix")
    if method not in ("auto", "bareiss", "subsets"):
        raise InputError(f"unknown determinant method {method!r}")
    for row in matrix:
        for entry in row:
            if entry.order < order:
                raise InputError(
                    f"entry of order {entry.order} cannot give a determinant of order {order}"
                )
    # scale each row to integer coefficients
    M: list[list[list[int]]] = []
    scale = 1
    for row in matrix:
        coeffs = [entry.coefficients[: order + 1] for entry in row]
        lcm = 1
        for cs in coeffs:
            for c in cs:
                lcm = math.lcm(lcm, c.denominator)
        scale *= lcm
        M.append([[int(c * lcm) for c in cs] for cs in coeffs])

    det = None
    if method in ("auto", "bareiss"):
        det = _det_bareiss(M, order)
        if det is None and method == "bareiss":
            raise InputError("no pivot with nonzero constant term; use method='subsets'")
    if det is None:
        det = _det_subsets(M, order)
    return TruncatedSeries(tuple(Fraction(c, scale) for c in det))
