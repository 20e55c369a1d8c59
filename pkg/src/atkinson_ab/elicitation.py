"""Eliciting the inequality-aversion parameter from a decision-maker.

Two paths are exposed:

* ``solve_epsilon`` recovers eps from one free-response equivalence judgment
  ("total T2 at share s2 feels the same as total T1 at share s1").
* ``ElicitationSession`` runs an adaptive binary-choice protocol: each
  question is posed at the midpoint of the current eps interval, and the
  answer halves the interval.
"""
from __future__ import annotations

import math
import uuid
from dataclasses import dataclass
from typing import Callable

from .core import atkinson_share, utility
from .errors import NoRootError, ValidationError

EPS_LO_BOUND = 0.001
EPS_HI_BOUND = 0.999

DEFAULT_TOTAL = 100.0
DEFAULT_RICHEST_SHARE = 0.99
DEFAULT_ALT_SHARE = 0.6
DEFAULT_TOLERANCE = 0.02
DEFAULT_OFFSET = 0.02
MAX_QUESTIONS = 64

STATUS_ACTIVE = "active"
STATUS_CONVERGED = "converged"
STATUS_EXHAUSTED = "exhausted"

CHOICE_A = "A"
CHOICE_B = "B"


def _bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    trace: list[tuple[float, float]] | None = None,
) -> float:
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NoRootError(
            f"no sign change on [{lo}, {hi}] (f(lo)={f_lo:.3g}, f(hi)={f_hi:.3g})"
        )
    while hi - lo > tol:
        if trace is not None:
            trace.append((lo, hi))
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def solve_epsilon(
    t1: float,
    s1: float,
    t2: float,
    s2: float,
    *,
    tol: float = 1e-8,
    trace: list[tuple[float, float]] | None = None,
) -> float:
    """Solve for the eps at which (T1, s1) and (T2, s2) are equally preferred.

    The defining equation is utility equality, which reduces to a
    one-dimensional root in eps because the share-form index does not depend
    on the total. Solved by bisection on (0.001, 0.999).
    """
    for name, t in (("t1", t1), ("t2", t2)):
        if not math.isfinite(t) or t <= 0.0:
            raise ValidationError(f"{name} must be > 0, got {t!r}")
    for name, s in (("s1", s1), ("s2", s2)):
        if not 0.5 <= s < 1.0:
            raise ValidationError(f"{name} must lie in [0.5, 1), got {s!r}")
    if s1 == s2:
        raise ValidationError(
            "s1 == s2 makes the equivalence equation independent of eps"
        )
    ratio = t2 / t1

    def residual(eps: float) -> float:
        return (1.0 - atkinson_share(t1, s1, eps)) - ratio * (
            1.0 - atkinson_share(t2, s2, eps)
        )

    return _bisect(residual, EPS_LO_BOUND, EPS_HI_BOUND, tol, trace)


@dataclass(frozen=True)
class ChoiceScenario:
    """A two-person distribution shown to the respondent."""

    total: float
    richest_share: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.total) or self.total <= 0.0:
            raise ValidationError(f"total must be > 0, got {self.total!r}")
        if not 0.5 <= self.richest_share < 1.0:
            raise ValidationError(
                f"richest share must lie in [0.5, 1), got {self.richest_share!r}"
            )

    @property
    def values(self) -> tuple[float, float]:
        return (self.total * self.richest_share, self.total * (1.0 - self.richest_share))


@dataclass(frozen=True)
class Question:
    question_id: str
    epsilon_mid: float
    option_a: ChoiceScenario
    option_b: ChoiceScenario


class ElicitationSession:
    """One respondent's live eps interval and question history.

    Option A keeps the base scenario; option B is the more-equal alternative
    priced at the indifference total for the interval midpoint, inflated by a
    small visibility offset so the two options are never exactly indifferent.
    Choosing B narrows the interval upward, choosing A downward; the point
    estimate on convergence is the interval midpoint.
    """

    def __init__(
        self,
        session_id: str | None = None,
        total: float = DEFAULT_TOTAL,
        s1: float = DEFAULT_RICHEST_SHARE,
        s_alt: float = DEFAULT_ALT_SHARE,
        tolerance: float = DEFAULT_TOLERANCE,
        offset: float = DEFAULT_OFFSET,
        eps_lo: float = EPS_LO_BOUND,
        eps_hi: float = EPS_HI_BOUND,
        max_questions: int = MAX_QUESTIONS,
    ) -> None:
        self.base_scenario = ChoiceScenario(total=total, richest_share=s1)
        if not 0.5 <= s_alt < 1.0:
            raise ValidationError(f"s_alt must lie in [0.5, 1), got {s_alt!r}")
        if s_alt == s1:
            raise ValidationError("s_alt must differ from s1 for questions to be informative")
        if not 0.0 < tolerance < 1.0:
            raise ValidationError(f"tolerance must lie in (0, 1), got {tolerance!r}")
        if not 0.0 <= offset < 0.5:
            raise ValidationError(f"offset must lie in [0, 0.5), got {offset!r}")
        if not 0.0 < eps_lo < eps_hi < 1.0:
            raise ValidationError("need 0 < eps_lo < eps_hi < 1")
        self.session_id = session_id or uuid.uuid4().hex
        self.s_alt = s_alt
        self.tolerance = tolerance
        self.offset = offset
        self.initial_lo = eps_lo
        self.initial_hi = eps_hi
        self.eps_lo = eps_lo
        self.eps_hi = eps_hi
        self.max_questions = max_questions
        self.history: list[tuple[Question, str]] = []
        self.pending: Question | None = None
        self._question_count = 0
        self.status = STATUS_ACTIVE
        self.epsilon: float | None = None
        if self.width <= tolerance:
            self._converge()

    @property
    def width(self) -> float:
        return self.eps_hi - self.eps_lo

    @property
    def at_boundary(self) -> str | None:
        if self.status != STATUS_CONVERGED:
            return None
        if self.eps_lo <= self.initial_lo:
            return "low"
        if self.eps_hi >= self.initial_hi:
            return "high"
        return None

    def _converge(self) -> None:
        self.status = STATUS_CONVERGED
        self.epsilon = 0.5 * (self.eps_lo + self.eps_hi)
        self.pending = None

    def next_question(self) -> Question:
        """Pose (or re-serve) the question at the current interval midpoint."""
        if self.status != STATUS_ACTIVE:
            raise ValidationError(f"session is {self.status}; no further questions")
        if self.pending is not None:
            return self.pending
        mid = 0.5 * (self.eps_lo + self.eps_hi)
        t1 = self.base_scenario.total
        indifferent_total = (
            t1
            * (1.0 - atkinson_share(t1, self.base_scenario.richest_share, mid))
            / (1.0 - atkinson_share(t1, self.s_alt, mid))
        )
        self._question_count += 1
        self.pending = Question(
            question_id=f"q{self._question_count}",
            epsilon_mid=mid,
            option_a=self.base_scenario,
            option_b=ChoiceScenario(
                total=indifferent_total * (1.0 + self.offset),
                richest_share=self.s_alt,
            ),
        )
        return self.pending

    def answer(self, choice: str) -> "ElicitationSession":
        """Record a choice for the outstanding question and shrink the interval."""
        if self.pending is None:
            raise ValidationError("no outstanding question to answer")
        if choice not in (CHOICE_A, CHOICE_B):
            raise ValidationError(f"choice must be {CHOICE_A!r} or {CHOICE_B!r}, got {choice!r}")
        question = self.pending
        self.history.append((question, choice))
        self.pending = None
        if choice == CHOICE_B:
            self.eps_lo = question.epsilon_mid
        else:
            self.eps_hi = question.epsilon_mid
        if self.width <= self.tolerance:
            self._converge()
        elif len(self.history) >= self.max_questions:
            self.status = STATUS_EXHAUSTED
        return self


def simulate_respondent(true_epsilon: float, question: Question) -> str:
    """Answer a question by exact utility comparison at a known eps.

    Test/demo helper: picks the option with the higher equally-distributed
    equivalent.
    """
    a, b = question.option_a, question.option_b
    u_a = utility(a.total, atkinson_share(a.total, a.richest_share, true_epsilon))
    u_b = utility(b.total, atkinson_share(b.total, b.richest_share, true_epsilon))
    return CHOICE_A if u_a > u_b else CHOICE_B
