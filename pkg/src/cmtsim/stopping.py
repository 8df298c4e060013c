"""Stopping rules and terminal decisions for mastery classification.

Covers the sequential probability ratio test, its truncated form, the
fixed-length decision, and the modified Haybittle-Peto rule built on
generalized likelihood ratio statistics. Boundary ties resolve toward
stopping, matching the weak inequalities the rules are defined with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Decision(Enum):
    CONTINUE = "continue"
    ACCEPT_H0 = "accept_h0"   # classify as master
    REJECT_H0 = "reject_h0"   # classify as non-master


@dataclass(frozen=True)
class Hypotheses:
    """Mastery cut point with its indifference bounds and error targets.

    theta_implied is the alternative at which the fixed-length likelihood
    ratio test attains the (alpha, beta) pair; it is produced by
    calibration and may sit below theta_minus.
    """

    theta_plus: float
    theta_minus: float
    theta_cut: float
    alpha: float
    beta: float
    theta_implied: float | None = None

    def __post_init__(self) -> None:
        if not self.theta_minus < self.theta_plus:
            raise ValueError(f"theta_minus must be below theta_plus, got {self.theta_minus} >= {self.theta_plus}")
        if self.theta_implied is not None and not self.theta_implied < self.theta_plus:
            raise ValueError(f"theta_implied must be below theta_plus, got {self.theta_implied}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")

    def with_implied(self, theta_implied: float) -> "Hypotheses":
        return Hypotheses(self.theta_plus, self.theta_minus, self.theta_cut,
                          self.alpha, self.beta, theta_implied)


@dataclass(frozen=True)
class Thresholds:
    """Stopping thresholds plus the length limits they apply over.

    reject_bound/accept_bound gate early stopping, terminal_cutoff decides
    at truncation, and min_stage is the earliest stage at which the
    GLR-based rule is allowed to stop.
    """

    max_length: int
    terminal_cutoff: float
    reject_bound: float | None = None
    accept_bound: float | None = None
    min_stage: int = 1

    def __post_init__(self) -> None:
        if self.max_length < 1:
            raise ValueError(f"max_length must be positive, got {self.max_length}")
        if not 1 <= self.min_stage <= self.max_length:
            raise ValueError(f"min_stage must be in [1, {self.max_length}], got {self.min_stage}")


def min_stage_from_fraction(rho: float, max_length: int) -> int:
    """Smallest integer stage >= rho * max_length."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    return max(1, math.ceil(rho * max_length))


def wald_thresholds(alpha: float, beta: float) -> tuple[float, float]:
    """Classical SPRT boundary approximations.

    Returns (reject_bound, accept_bound) = (log((1-alpha)/beta),
    log((1-beta)/alpha)).
    """
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must be in (0, 1), got {v}")
    if (1.0 - alpha) / beta <= 1.0 or (1.0 - beta) / alpha <= 1.0:
        raise ValueError(f"error targets alpha={alpha}, beta={beta} give non-positive boundaries")
    return math.log((1.0 - alpha) / beta), math.log((1.0 - beta) / alpha)


def tsprt_truncation_cutoff(reject_bound: float, accept_bound: float) -> float:
    """Midpoint truncation cutoff (reject_bound - accept_bound) / 2."""
    return (reject_bound - accept_bound) / 2.0


def sprt_step(llr_value: float, reject_bound: float, accept_bound: float) -> Decision:
    """One SPRT stage: reject when llr >= reject_bound, accept when llr <= -accept_bound."""
    if reject_bound <= 0.0 or accept_bound <= 0.0:
        raise ValueError("SPRT boundaries must be positive")
    if llr_value >= reject_bound:
        return Decision.REJECT_H0
    if llr_value <= -accept_bound:
        return Decision.ACCEPT_H0
    return Decision.CONTINUE


def tsprt_step(k: int, max_length: int, llr_value: float,
               reject_bound: float, accept_bound: float, terminal_cutoff: float) -> Decision:
    """Truncated SPRT stage: SPRT through stage max_length - 1, then the
    terminal cutoff decides at truncation."""
    if k > max_length:
        raise ValueError(f"stage {k} exceeds the maximum test length {max_length}")
    if k < max_length:
        return sprt_step(llr_value, reject_bound, accept_bound)
    return fixed_length_decision(llr_value, terminal_cutoff)


def fixed_length_decision(llr_at_end: float, terminal_cutoff: float) -> Decision:
    """Terminal classification: reject mastery iff llr >= terminal_cutoff."""
    return Decision.REJECT_H0 if llr_at_end >= terminal_cutoff else Decision.ACCEPT_H0


def modhp_step(k: int, thresholds: Thresholds, hyps: Hypotheses,
               theta_hat: float, glr_vs_plus: float, glr_vs_implied: float) -> Decision:
    """One modified Haybittle-Peto stage.

    Before min_stage the test always continues. At interior stages the
    reject condition needs theta_hat strictly below theta_plus with the GLR
    against theta_plus at or above reject_bound; the accept condition needs
    theta_hat strictly above theta_implied with the GLR against the implied
    alternative at or above accept_bound. When both fire at once the test
    accepts (a false negative is the costly error here). At the final stage
    the terminal cutoff decides.
    """
    if hyps.theta_implied is None:
        raise ValueError("hypotheses must carry theta_implied for the modified Haybittle-Peto rule")
    if thresholds.reject_bound is None or thresholds.accept_bound is None:
        raise ValueError("modified Haybittle-Peto needs both reject_bound and accept_bound")
    if not 1 <= k <= thresholds.max_length:
        raise ValueError(f"stage {k} outside [1, {thresholds.max_length}]")
    if k == thresholds.max_length:
        if theta_hat < hyps.theta_plus and glr_vs_plus >= thresholds.terminal_cutoff:
            return Decision.REJECT_H0
        return Decision.ACCEPT_H0
    if k < thresholds.min_stage:
        return Decision.CONTINUE
    reject = theta_hat < hyps.theta_plus and glr_vs_plus >= thresholds.reject_bound
    accept = theta_hat > hyps.theta_implied and glr_vs_implied >= thresholds.accept_bound
    if accept:
        return Decision.ACCEPT_H0
    if reject:
        return Decision.REJECT_H0
    return Decision.CONTINUE
