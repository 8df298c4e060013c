"""Stopping rules and terminal decisions."""

import math

import numpy as np
import pytest

from cmtsim import (
    Decision,
    Hypotheses,
    Thresholds,
    fixed_length_decision,
    min_stage_from_fraction,
    modhp_step,
    sprt_step,
    tsprt_step,
    tsprt_truncation_cutoff,
    wald_thresholds,
)


class TestWaldThresholds:
    def test_symmetric_five_percent(self):
        rb, ab = wald_thresholds(0.05, 0.05)
        assert rb == pytest.approx(math.log(19.0), abs=1e-12)
        assert ab == pytest.approx(math.log(19.0), abs=1e-12)

    def test_asymmetric(self):
        rb, ab = wald_thresholds(0.05, 0.10)
        assert rb == pytest.approx(math.log(9.5))
        assert ab == pytest.approx(math.log(18.0))

    def test_degenerate_half(self):
        with pytest.raises(ValueError):
            wald_thresholds(0.5, 0.5)

    def test_rejects_out_of_range(self):
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                wald_thresholds(bad, 0.05)
            with pytest.raises(ValueError):
                wald_thresholds(0.05, bad)


class TestTruncationCutoff:
    def test_symmetric_gives_zero(self):
        assert tsprt_truncation_cutoff(2.0, 2.0) == 0.0
        assert tsprt_truncation_cutoff(math.log(19), math.log(19)) == 0.0

    def test_half_difference(self):
        assert tsprt_truncation_cutoff(3.0, 2.0) == pytest.approx(0.5)


class TestSprtStep:
    def test_boundary_ties_stop(self):
        assert sprt_step(2.0, 2.0, 3.0) is Decision.REJECT_H0
        assert sprt_step(-3.0, 2.0, 3.0) is Decision.ACCEPT_H0

    def test_interior_continues(self):
        assert sprt_step(0.0, 2.0, 3.0) is Decision.CONTINUE

    def test_requires_positive_bounds(self):
        with pytest.raises(ValueError):
            sprt_step(0.0, -1.0, 2.0)


class TestTsprtStep:
    def test_terminal_cutoff_tie_rejects(self):
        assert tsprt_step(50, 50, 0.7, 3.0, 3.0, 0.7) is Decision.REJECT_H0

    def test_terminal_below_cutoff_accepts(self):
        assert tsprt_step(50, 50, 0.7 - 1e-9, 3.0, 3.0, 0.7) is Decision.ACCEPT_H0

    def test_interior_stage_continues(self):
        assert tsprt_step(10, 50, 0.5, 3.0, 3.0, 0.0) is Decision.CONTINUE

    def test_stage_past_maximum_rejected(self):
        with pytest.raises(ValueError):
            tsprt_step(51, 50, 0.0, 3.0, 3.0, 0.0)

    def test_never_continues_at_maximum(self):
        for value in (-5.0, 0.0, 5.0):
            assert tsprt_step(50, 50, value, 3.0, 3.0, 0.0) is not Decision.CONTINUE


class TestFixedLengthDecision:
    def test_tie_rejects(self):
        assert fixed_length_decision(1.28, 1.28) is Decision.REJECT_H0

    def test_below_accepts(self):
        assert fixed_length_decision(-5.0, 1.28) is Decision.ACCEPT_H0


@pytest.fixture
def hyps():
    return Hypotheses(theta_plus=-1.07, theta_minus=-1.57, theta_cut=-1.32,
                      alpha=0.05, beta=0.05, theta_implied=-1.95)


@pytest.fixture
def thresholds():
    return Thresholds(max_length=50, terminal_cutoff=1.4, reject_bound=3.7,
                      accept_bound=3.3, min_stage=5)


class TestModhpStep:
    def test_before_min_stage_continues(self, hyps, thresholds):
        assert modhp_step(4, thresholds, hyps, -3.0, 10.0, 10.0) is Decision.CONTINUE

    def test_reject_condition(self, hyps, thresholds):
        assert modhp_step(10, thresholds, hyps, -3.0, 3.7, 0.0) is Decision.REJECT_H0

    def test_accept_condition(self, hyps, thresholds):
        assert modhp_step(10, thresholds, hyps, 0.0, 0.0, 3.3) is Decision.ACCEPT_H0

    def test_conflict_resolves_to_accept(self, hyps, thresholds):
        # estimate inside (theta_implied, theta_plus) with both statistics
        # over their bounds
        assert modhp_step(10, thresholds, hyps, -1.5, 4.0, 4.0) is Decision.ACCEPT_H0

    def test_interior_continue(self, hyps, thresholds):
        assert modhp_step(10, thresholds, hyps, -1.5, 1.0, 1.0) is Decision.CONTINUE

    def test_terminal_accepts_above_theta_plus(self, hyps, thresholds):
        assert modhp_step(50, thresholds, hyps, -1.0, 99.0, 0.0) is Decision.ACCEPT_H0

    def test_terminal_reject_needs_both_conditions(self, hyps, thresholds):
        assert modhp_step(50, thresholds, hyps, -1.5, 1.4, 0.0) is Decision.REJECT_H0
        assert modhp_step(50, thresholds, hyps, -1.5, 1.39, 0.0) is Decision.ACCEPT_H0

    def test_strict_estimate_comparisons(self, hyps, thresholds):
        # an estimate exactly at a bound fails that side's condition
        assert modhp_step(10, thresholds, hyps, hyps.theta_plus, 99.0, 0.0) is Decision.CONTINUE
        assert modhp_step(10, thresholds, hyps, hyps.theta_implied, 0.0, 99.0) is Decision.CONTINUE

    def test_never_continues_at_maximum(self, hyps, thresholds):
        for th in (-3.0, -1.5, 0.0):
            assert modhp_step(50, thresholds, hyps, th, 1.0, 1.0) is not Decision.CONTINUE

    def test_requires_implied_alternative(self, thresholds):
        bare = Hypotheses(theta_plus=-1.07, theta_minus=-1.57, theta_cut=-1.32,
                          alpha=0.05, beta=0.05)
        with pytest.raises(ValueError, match="theta_implied"):
            modhp_step(10, thresholds, bare, -1.5, 1.0, 1.0)


class TestMonotonicity:
    def test_raising_reject_bound_only_delays_rejects(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            path = np.cumsum(rng.normal(0, 1, 49))

            def first_reject(bound):
                for k, v in enumerate(path, start=1):
                    d = sprt_step(float(v), bound, 3.0)
                    if d is Decision.REJECT_H0:
                        return k
                    if d is Decision.ACCEPT_H0:
                        return None
                return None

            lo, hi = first_reject(2.0), first_reject(2.5)
            if lo is not None and hi is not None:
                assert hi >= lo

    def test_raising_accept_bound_only_delays_accepts(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            path = np.cumsum(rng.normal(0, 1, 49))

            def first_accept(bound):
                for k, v in enumerate(path, start=1):
                    d = sprt_step(float(v), 3.0, bound)
                    if d is Decision.ACCEPT_H0:
                        return k
                    if d is Decision.REJECT_H0:
                        return None
                return None

            lo, hi = first_accept(2.0), first_accept(2.5)
            if lo is not None and hi is not None:
                assert hi >= lo


class TestHypothesesValidation:
    def test_bounds_must_be_ordered(self):
        with pytest.raises(ValueError):
            Hypotheses(theta_plus=-1.57, theta_minus=-1.07, theta_cut=-1.32,
                       alpha=0.05, beta=0.05)

    def test_implied_below_plus(self):
        with pytest.raises(ValueError):
            Hypotheses(theta_plus=-1.07, theta_minus=-1.57, theta_cut=-1.32,
                       alpha=0.05, beta=0.05, theta_implied=-1.0)

    def test_implied_may_sit_below_theta_minus(self):
        h = Hypotheses(theta_plus=-1.07, theta_minus=-1.57, theta_cut=-1.32,
                       alpha=0.05, beta=0.05, theta_implied=-2.2)
        assert h.theta_implied == -2.2


class TestMinStage:
    def test_ceiling(self):
        assert min_stage_from_fraction(0.1, 50) == 5
        assert min_stage_from_fraction(0.09, 50) == 5
        assert min_stage_from_fraction(0.101, 50) == 6

    def test_thresholds_validate_min_stage(self):
        with pytest.raises(ValueError):
            Thresholds(max_length=50, terminal_cutoff=0.0, min_stage=51)
