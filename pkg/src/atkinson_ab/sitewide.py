"""Extrapolation of an experiment's inequality impact to the full member base.

A variant observed on n_v members of a targeted segment of size n_seg is
hypothetically ramped to the whole segment; the untargeted rest of the
population enters through its precomputed totals of x and x^(1-eps). The
resulting index estimate carries the delta-method variance built from the
in-segment sample, scaled by (n_seg / n_all)^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .core import AtkinsonEstimate, AversionParam, MomentSums
from .errors import EpsilonMismatchError, ValidationError, ZeroTotalError
from .inference import ComparisonResult, compare

TREATMENT = "treatment"
CONTROL = "control"


@dataclass(frozen=True)
class SitewideInputs:
    """Rest-of-population totals plus per-variant segment buffers.

    ``x_rest`` and ``y_rest`` are the totals of x and x^(1-eps) over members
    NOT in the targeted segment; ``y_rest`` must have been computed at the
    same eps as the analysis.
    """

    epsilon: AversionParam
    x_rest: float
    y_rest: float
    n_all: int
    n_seg: int
    variants: Mapping[str, MomentSums]

    def __post_init__(self) -> None:
        if self.n_all < 1:
            raise ValidationError(f"n_all must be >= 1, got {self.n_all}")
        if not 0 <= self.n_seg <= self.n_all:
            raise ValidationError(
                f"need 0 <= n_seg <= n_all, got n_seg={self.n_seg}, n_all={self.n_all}"
            )
        for name, v in (("x_rest", self.x_rest), ("y_rest", self.y_rest)):
            if not math.isfinite(v) or v < 0.0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")
        if self.n_seg == self.n_all and (self.x_rest != 0.0 or self.y_rest != 0.0):
            raise ValidationError("n_seg == n_all implies empty rest totals")
        if (self.x_rest == 0.0) != (self.y_rest == 0.0):
            raise ValidationError("x_rest and y_rest must be zero together")
        if not self.variants:
            raise ValidationError("at least one variant buffer is required")
        for name, ms in self.variants.items():
            if ms.epsilon != self.epsilon:
                raise EpsilonMismatchError(
                    f"variant {name!r} buffer was accumulated at a different eps"
                )
            if ms.n < 1:
                raise ValidationError(f"variant {name!r} has no members")


def extrapolate(inputs: SitewideInputs, variant: str) -> AtkinsonEstimate:
    """Site-wide index estimate under a 100% ramp of ``variant`` to its segment."""
    if variant not in inputs.variants:
        raise ValidationError(f"unknown variant {variant!r}")
    ms = inputs.variants[variant]
    eps = inputs.epsilon.epsilon
    a = 1.0 - eps
    ramp = inputs.n_seg / ms.n
    x_sw = inputs.x_rest + ramp * ms.s1
    y_sw = inputs.y_rest + ramp * ms.s_pow
    if x_sw <= 0.0:
        raise ZeroTotalError("site-wide metric total is zero; index undefined")
    xbar = x_sw / inputs.n_all
    ybar = y_sw / inputs.n_all
    index = max(0.0, 1.0 - ybar ** (1.0 / a) / xbar)

    n_v = float(ms.n)
    mu1 = ms.s1 / n_v
    mu_pow = ms.s_pow / n_v
    sig11 = ms.s_pow2 / n_v - mu_pow * mu_pow
    sig12 = ms.s_cross / n_v - mu1 * mu_pow
    sig22 = ms.s2 / n_v - mu1 * mu1
    scale = (inputs.n_seg / inputs.n_all) ** 2
    sigma2 = scale * (
        sig11 * ybar ** (2.0 * eps / a) / (a * a * xbar * xbar)
        - 2.0 * sig12 * ybar ** ((1.0 + eps) / a) / (a * xbar**3)
        + sig22 * ybar ** (2.0 / a) / xbar**4
    )
    clamped = sigma2 < 0.0
    if clamped:
        sigma2 = 0.0
    return AtkinsonEstimate(
        index=index,
        sigma2=sigma2,
        n=ms.n,
        epsilon=inputs.epsilon,
        variance_clamped=clamped,
    )


def sitewide_compare(
    inputs: SitewideInputs,
    treatment: str = TREATMENT,
    control: str = CONTROL,
    alpha: float = 0.05,
) -> ComparisonResult:
    """Compare the treatment and control site-wide universes.

    The two universes are treated as independent; the shared rest totals are
    observed constants, so only the in-segment sampling variance (already
    scaled by (n_seg/n_all)^2) enters each side.
    """
    for name in (treatment, control):
        if name not in inputs.variants:
            raise ValidationError(f"variant {name!r} missing from inputs")
    return compare(
        extrapolate(inputs, treatment),
        extrapolate(inputs, control),
        alpha=alpha,
    )
