"""Leading moment coefficients from the Bessel determinant.

With ``I_n(2 sqrt x) = x^(n/2) g_n(x)`` every term of
``det[I_{i+j-1}(2 sqrt x)]`` carries ``x^(k^2/2)``, which cancels the
``x^(-k^2/2)`` prefactor exactly.  What remains is an ordinary Maclaurin
series, and ``(d/dx)^m f(0) = m! [x^m] f``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

from . import config
from .errors import InputError, ResourceError
from .exactnum import factorial
from .series import TruncatedSeries, bessel_g, coefficient, exp_series, series_det


def _check_k(k: int, k_max: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if k > k_max:
        raise ResourceError(
            f"k={k} exceeds K_max={k_max}; raise the limit explicitly to go further"
        )


def sign_k(k: int) -> int:
    return -1 if (k * (k + 1) // 2) % 2 else 1


@lru_cache(maxsize=None)
def bessel_det_series(k: int, order: int | None = None) -> TruncatedSeries:
    """``det[g_{i+j-1}(x)]_{i,j=1..k}`` truncated at ``order`` (default 2k)."""
    if order is None:
        order = 2 * k
    matrix = [[bessel_g(i + j - 1, order) for j in range(1, k + 1)] for i in range(1, k + 1)]
    return series_det(matrix, order)


def bk_det(k: int, k_max: int = config.K_MAX) -> Fraction:
    """Leading coefficient ``b_k`` of the 2k-th moment of ``|Lambda_A'(1)|``."""
    _check_k(k, k_max)
    d = 2 * k
    D = exp_series(-1, d) * bessel_det_series(k)
    total = sum(
        comb(k, h) * factorial(k + h) * coefficient(D, k + h) for h in range(k + 1)
    )
    return sign_k(k) * total


def bkprime_det(k: int, k_max: int = config.K_MAX) -> Fraction:
    """Leading coefficient ``b_k'`` of the 2k-th moment of ``|Z_A'(1)|``."""
    _check_k(k, k_max)
    d = 2 * k
    E = exp_series(Fraction(-1, 2), d) * bessel_det_series(k)
    return sign_k(k) * factorial(d) * coefficient(E, d)
