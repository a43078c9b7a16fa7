"""Exact classification of stable patterns of cyclic matrices.

Subpackages cover exact cyclotomic arithmetic, pattern stability
classification, exhaustive enumeration, closed-form families, and degree
growth of the associated birational maps.
"""

from .cyclotomic import CycEl, IntPoly, convolution, cyclotomic_poly, fourier, gauss_sum, root_power
from .patterns import (
    Pattern,
    SignedPattern,
    StabilityClass,
    StabilityReport,
    classify,
    parse_bracket,
)

__all__ = [
    "CycEl",
    "IntPoly",
    "Pattern",
    "SignedPattern",
    "StabilityClass",
    "StabilityReport",
    "classify",
    "convolution",
    "cyclotomic_poly",
    "fourier",
    "gauss_sum",
    "parse_bracket",
    "root_power",
]
