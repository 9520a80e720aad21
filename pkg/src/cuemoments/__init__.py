"""Exact and Monte Carlo moments of CUE characteristic polynomial derivatives."""

from .arith import AkResult, LeadingTerm, ak, conjectured_leading
from .cue_mc import (
    MomentEstimate,
    ShiftVector,
    SpectrumSample,
    estimate_moment,
    lambda_at_one,
    lambda_prime_at_one,
    sample_weyl_mcmc,
    shifted_moment,
    z_prime_abs_at_one,
)
from .errors import (
    ConsistencyError,
    CueMomentsError,
    InputError,
    OutOfRangeError,
    PrecisionError,
    ResourceError,
)
from .exactnum import FactoredRational, Rational, factor_rational, format_factored, parse_factored
from .moments_comb import bkprime_comb, compositions, fk, hughes_B, ratio_4k
from .moments_det import bk_det, bkprime_det
from .series import TruncatedSeries, series_det

__version__ = "0.1.0"

__all__ = [
    "AkResult",
    "ConsistencyError",
    "CueMomentsError",
    "FactoredRational",
    "InputError",
    "LeadingTerm",
    "MomentEstimate",
    "OutOfRangeError",
    "PrecisionError",
    "Rational",
    "ResourceError",
    "ShiftVector",
    "SpectrumSample",
    "TruncatedSeries",
    "ak",
    "bk_det",
    "bkprime_comb",
    "bkprime_det",
    "compositions",
    "conjectured_leading",
    "estimate_moment",
    "factor_rational",
    "fk",
    "format_factored",
    "hughes_B",
    "lambda_at_one",
    "lambda_prime_at_one",
    "parse_factored",
    "ratio_4k",
    "sample_weyl_mcmc",
    "series_det",
    "shifted_moment",
    "z_prime_abs_at_one",
]
