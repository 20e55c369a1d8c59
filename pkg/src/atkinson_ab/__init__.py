"""Inequality impact analysis for A/B experiments using the Atkinson index."""

__version__ = "0.1.0"

from .core import (
    AtkinsonEstimate,
    AversionParam,
    MomentAccumulator,
    MomentSums,
    atkinson,
    atkinson_share,
    estimate,
    estimate_from_sums,
    merge,
    moment_sums,
    utility,
)
from .errors import (
    DataFormatError,
    DegenerateVarianceError,
    EmptyInputError,
    EpsilonMismatchError,
    NegativeValueError,
    NoRootError,
    ValidationError,
    ZeroTotalError,
)
from .inference import ComparisonResult, compare, normal_two_sided_p
from .sitewide import SitewideInputs, extrapolate, sitewide_compare

__all__ = [
    "AtkinsonEstimate",
    "AversionParam",
    "ComparisonResult",
    "DataFormatError",
    "DegenerateVarianceError",
    "EmptyInputError",
    "EpsilonMismatchError",
    "MomentAccumulator",
    "MomentSums",
    "NegativeValueError",
    "NoRootError",
    "SitewideInputs",
    "ValidationError",
    "ZeroTotalError",
    "atkinson",
    "atkinson_share",
    "compare",
    "estimate",
    "estimate_from_sums",
    "extrapolate",
    "merge",
    "moment_sums",
    "normal_two_sided_p",
    "sitewide_compare",
    "utility",
]
