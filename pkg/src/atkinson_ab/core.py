"""Atkinson index, mergeable moment buffers, and the asymptotic variance.

The index for a sample x_1..x_n at aversion epsilon in (0, 1) is

    A = 1 - (mean(x^(1-eps)))^(1/(1-eps)) / mean(x)

Everything needed to finalize the index and its delta-method variance is
carried by six power sums (plus the count), so partial buffers can be
accumulated independently and merged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyInputError,
    EpsilonMismatchError,
    NegativeValueError,
    ValidationError,
    ZeroTotalError,
)


@dataclass(frozen=True)
class AversionParam:
    """Inequality-aversion parameter, restricted to the open interval (0, 1).

    Values outside (0, 1) are rejected at construction: eps >= 1 makes
    zero-valued metrics singular, and engagement metrics are full of zeros.
    """

    epsilon: float

    def __post_init__(self) -> None:
        eps = float(self.epsilon)
        if not math.isfinite(eps) or not 0.0 < eps < 1.0:
            raise ValidationError(
                f"aversion parameter must lie strictly in (0, 1), got {self.epsilon!r}"
            )
        object.__setattr__(self, "epsilon", eps)


def _as_aversion(eps: AversionParam | float) -> AversionParam:
    return eps if isinstance(eps, AversionParam) else AversionParam(eps)


@dataclass(frozen=True)
class MomentSums:
    """Mergeable buffer of the power sums behind one index at a fixed epsilon.

    Fields hold raw (unnormalized) sums:
      s1 = sum x, s_pow = sum x^(1-eps), s2 = sum x^2,
      s_pow2 = sum x^(2-2eps), s_cross = sum x^(2-eps).
    """

    epsilon: AversionParam
    n: int = 0
    s1: float = 0.0
    s_pow: float = 0.0
    s2: float = 0.0
    s_pow2: float = 0.0
    s_cross: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValidationError(f"count must be >= 0, got {self.n}")
        for name in ("s1", "s_pow", "s2", "s_pow2", "s_cross"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")
            if self.n == 0 and v != 0.0:
                raise ValidationError(f"empty buffer must have {name} == 0, got {v!r}")

    @classmethod
    def empty(cls, eps: AversionParam | float) -> "MomentSums":
        return cls(epsilon=_as_aversion(eps))


@dataclass(frozen=True)
class AtkinsonEstimate:
    """An index estimate with its asymptotic variance scale.

    ``sigma2`` is the per-observation variance from the delta method; the
    variance of the index estimate itself is ``sigma2 / n``.
    """

    index: float
    sigma2: float
    n: int
    epsilon: AversionParam
    variance_clamped: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.index < 1.0:
            raise ValidationError(f"index must lie in [0, 1), got {self.index!r}")
        if not math.isfinite(self.sigma2) or self.sigma2 < 0.0:
            raise ValidationError(f"sigma2 must be finite and >= 0, got {self.sigma2!r}")

    @property
    def variance(self) -> float:
        """Variance of the index estimate, sigma2 / n."""
        return self.sigma2 / self.n


def _validate_values(values: Sequence[float] | np.ndarray, *, allow_empty: bool) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        x = x.reshape(-1)
    if x.size == 0:
        if allow_empty:
            return x
        raise EmptyInputError("metric vector is empty")
    if not np.all(np.isfinite(x)):
        raise ValidationError("metric values must be finite")
    if np.any(x < 0.0):
        raise NegativeValueError("metric values must be >= 0")
    return x


def atkinson(values: Sequence[float] | np.ndarray, eps: AversionParam | float) -> float:
    """Atkinson index of a metric vector; 0 means perfect equality.

    Raises a distinct error for empty input, negative values, and an
    all-zero vector (mean 0).
    """
    eps = _as_aversion(eps)
    x = _validate_values(values, allow_empty=False)
    mean_x = float(np.mean(x))
    if mean_x <= 0.0:
        raise ZeroTotalError("all metric values are zero; index undefined")
    if x.min() == x.max():
        return 0.0
    a = 1.0 - eps.epsilon
    mean_pow = float(np.mean(x**a))
    return max(0.0, 1.0 - mean_pow ** (1.0 / a) / mean_x)


def moment_sums(values: Sequence[float] | np.ndarray, eps: AversionParam | float) -> MomentSums:
    """Single-pass accumulation of all power sums for one buffer."""
    eps = _as_aversion(eps)
    x = _validate_values(values, allow_empty=True)
    if x.size == 0:
        return MomentSums.empty(eps)
    xp = x ** (1.0 - eps.epsilon)
    return MomentSums(
        epsilon=eps,
        n=int(x.size),
        s1=float(np.sum(x)),
        s_pow=float(np.sum(xp)),
        s2=float(np.sum(x * x)),
        s_pow2=float(np.sum(xp * xp)),
        s_cross=float(np.sum(x * xp)),
    )


def merge(a: MomentSums, b: MomentSums) -> MomentSums:
    """Componentwise sum of two buffers; the identity element is an empty buffer."""
    if a.epsilon != b.epsilon:
        raise EpsilonMismatchError(
            f"cannot merge buffers at eps={a.epsilon.epsilon} and eps={b.epsilon.epsilon}"
        )
    return MomentSums(
        epsilon=a.epsilon,
        n=a.n + b.n,
        s1=a.s1 + b.s1,
        s_pow=a.s_pow + b.s_pow,
        s2=a.s2 + b.s2,
        s_pow2=a.s_pow2 + b.s_pow2,
        s_cross=a.s_cross + b.s_cross,
    )


def estimate_from_sums(ms: MomentSums) -> AtkinsonEstimate:
    """Finalize a buffer into an index and its delta-method variance scale.

    sigma2 is the plug-in estimate built from the three covariance terms of
    the bivariate CLT for (mean x^(1-eps), mean x); a tiny negative value
    arising from cancellation on near-degenerate data is clamped to zero and
    flagged.
    """
    if ms.n < 2:
        raise ValidationError(f"need n >= 2 to estimate a variance, got n={ms.n}")
    if ms.s1 <= 0.0:
        raise ZeroTotalError("total metric is zero; index undefined")
    eps = ms.epsilon.epsilon
    a = 1.0 - eps
    n = float(ms.n)
    mu1 = ms.s1 / n
    mu_pow = ms.s_pow / n

    sig11 = ms.s_pow2 / n - mu_pow * mu_pow
    sig12 = ms.s_cross / n - mu1 * mu_pow
    sig22 = ms.s2 / n - mu1 * mu1
    if sig22 <= 0.0:
        # zero metric variance at double precision: the sample is equal up
        # to rounding, where the true index is below representable noise
        return AtkinsonEstimate(index=0.0, sigma2=0.0, n=ms.n, epsilon=ms.epsilon)

    index = max(0.0, 1.0 - mu_pow ** (1.0 / a) / mu1)
    sigma2 = (
        sig11 * mu_pow ** (2.0 * eps / a) / (a * a * mu1 * mu1)
        - 2.0 * sig12 * mu_pow ** ((1.0 + eps) / a) / (a * mu1**3)
        + sig22 * mu_pow ** (2.0 / a) / mu1**4
    )
    clamped = sigma2 < 0.0
    if clamped:
        sigma2 = 0.0
    return AtkinsonEstimate(
        index=index,
        sigma2=sigma2,
        n=ms.n,
        epsilon=ms.epsilon,
        variance_clamped=clamped,
    )


def estimate(values: Sequence[float] | np.ndarray, eps: AversionParam | float) -> AtkinsonEstimate:
    """Index plus variance in one call: ``estimate_from_sums(moment_sums(...))``."""
    return estimate_from_sums(moment_sums(values, eps))


def utility(total: float, index: float) -> float:
    """Equally-distributed-equivalent total: the index acts as a discount factor."""
    if not math.isfinite(total) or total < 0.0:
        raise ValidationError(f"total must be finite and >= 0, got {total!r}")
    if not 0.0 <= index < 1.0:
        raise ValidationError(f"index must lie in [0, 1), got {index!r}")
    return total * (1.0 - index)


def atkinson_share(total: float, s1: float, eps: AversionParam | float) -> float:
    """Two-person index written over the total and the richest individual's share.

    Computed on the normalized pair (s1, 1 - s1), so the result is exactly
    independent of ``total``; the total is still validated because a scenario
    with a nonpositive total is meaningless.
    """
    if not math.isfinite(total) or total <= 0.0:
        raise ValidationError(f"total must be > 0, got {total!r}")
    if not 0.5 <= s1 < 1.0:
        raise ValidationError(f"richest share must lie in [0.5, 1), got {s1!r}")
    return atkinson(np.array([s1, 1.0 - s1]), eps)


class MomentAccumulator:
    """Streaming, mergeable builder of one buffer's power sums.

    Uses Neumaier-compensated addition per field so results are stable to
    within ~1 ulp per merge regardless of how the input stream is
    partitioned across workers.
    """

    __slots__ = ("epsilon", "n", "_sums", "_comps")

    def __init__(self, eps: AversionParam | float) -> None:
        self.epsilon = _as_aversion(eps)
        self.n = 0
        self._sums = [0.0, 0.0, 0.0, 0.0, 0.0]
        self._comps = [0.0, 0.0, 0.0, 0.0, 0.0]

    def _add_term(self, i: int, v: float) -> None:
        s = self._sums[i]
        t = s + v
        if abs(s) >= abs(v):
            self._comps[i] += (s - t) + v
        else:
            self._comps[i] += (v - t) + s
        self._sums[i] = t

    def add(self, x: float) -> None:
        if not math.isfinite(x):
            raise ValidationError(f"metric value must be finite, got {x!r}")
        if x < 0.0:
            raise NegativeValueError(f"metric value must be >= 0, got {x!r}")
        xp = x ** (1.0 - self.epsilon.epsilon)
        self._add_term(0, x)
        self._add_term(1, xp)
        self._add_term(2, x * x)
        self._add_term(3, xp * xp)
        self._add_term(4, x * xp)
        self.n += 1

    def add_many(self, values: Iterable[float]) -> None:
        for x in values:
            self.add(x)

    def merge_from(self, other: "MomentAccumulator") -> None:
        if self.epsilon != other.epsilon:
            raise EpsilonMismatchError("cannot merge accumulators at different eps")
        self.n += other.n
        for i in range(5):
            self._add_term(i, other._sums[i])
            self._add_term(i, other._comps[i])

    def snapshot(self) -> MomentSums:
        s1, s_pow, s2, s_pow2, s_cross = (
            max(0.0, self._sums[i] + self._comps[i]) for i in range(5)
        )
        return MomentSums(
            epsilon=self.epsilon,
            n=self.n,
            s1=s1,
            s_pow=s_pow,
            s2=s2,
            s_pow2=s_pow2,
            s_cross=s_cross,
        )
