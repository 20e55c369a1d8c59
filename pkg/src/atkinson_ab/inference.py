"""Treatment-vs-control hypothesis testing on Atkinson index estimates.

The difference delta = A_T - A_C is compared to a normal reference using
t = delta / sqrt(var_delta) with var_delta = sigma2_T/n_T + sigma2_C/n_C.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import AtkinsonEstimate
from .errors import DegenerateVarianceError, EpsilonMismatchError, ValidationError

INEQUALITY_INCREASING = "inequality-increasing"
INEQUALITY_DECREASING = "inequality-decreasing"
NO_DIRECTION = "none"

_ALTERNATIVES = ("two-sided", "greater", "less")


@dataclass(frozen=True)
class ComparisonResult:
    """Outcome of one treatment/control inequality comparison."""

    delta: float
    var_delta: float
    t_stat: float
    p_value: float
    alpha: float
    significant: bool
    direction: str


def normal_two_sided_p(t: float) -> float:
    """Two-sided tail probability 2*(1 - Phi(|t|)) via the complementary error function."""
    if not math.isfinite(t):
        raise ValidationError(f"test statistic must be finite, got {t!r}")
    return math.erfc(abs(t) / math.sqrt(2.0))


def _one_sided_upper_p(t: float) -> float:
    return 0.5 * math.erfc(t / math.sqrt(2.0))


def compare(
    treatment: AtkinsonEstimate,
    control: AtkinsonEstimate,
    alpha: float = 0.05,
    alternative: str = "two-sided",
) -> ComparisonResult:
    """Test whether treatment and control differ in inequality.

    ``alternative`` may be "two-sided" (default), "greater" (treatment more
    unequal), or "less".
    """
    if treatment.epsilon != control.epsilon:
        raise EpsilonMismatchError(
            "treatment and control were estimated at different aversion parameters"
        )
    if treatment.n < 2 or control.n < 2:
        raise ValidationError("both arms need n >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    if alternative not in _ALTERNATIVES:
        raise ValidationError(f"alternative must be one of {_ALTERNATIVES}")

    delta = treatment.index - control.index
    var_delta = treatment.variance + control.variance
    if var_delta == 0.0:
        if delta != 0.0:
            raise DegenerateVarianceError(
                f"delta={delta} with zero estimated variance; cannot form a test statistic"
            )
        t_stat = 0.0
    else:
        t_stat = delta / math.sqrt(var_delta)

    if alternative == "two-sided":
        p_value = normal_two_sided_p(t_stat)
    elif alternative == "greater":
        p_value = _one_sided_upper_p(t_stat)
    else:
        p_value = _one_sided_upper_p(-t_stat)

    significant = p_value < alpha
    if significant and delta > 0.0:
        direction = INEQUALITY_INCREASING
    elif significant and delta < 0.0:
        direction = INEQUALITY_DECREASING
    else:
        direction = NO_DIRECTION
    return ComparisonResult(
        delta=delta,
        var_delta=var_delta,
        t_stat=t_stat,
        p_value=p_value,
        alpha=alpha,
        significant=significant,
        direction=direction,
    )
