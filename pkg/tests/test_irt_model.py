"""Response model, information measures, likelihoods, and the MLE."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmtsim import (
    Item,
    ItemPool,
    MleStatus,
    ResponseRecord,
    fisher_info,
    glr_stat,
    kl_info,
    llr,
    log_likelihood,
    mle,
    natural_param,
    prob_correct,
    psi,
    signed_root,
)

from conftest import random_items

item_params = st.tuples(
    st.floats(0.3, 2.4),        # a
    st.floats(-4.0, 4.0),       # b
    st.floats(0.0, 0.5),        # c
)
thetas = st.floats(-5.0, 5.0)


def make_item(params, item_id=1):
    a, b, c = params
    return Item(item_id, a, b, c)


class TestProbCorrect:
    def test_logistic_midpoint(self):
        assert prob_correct(Item(1, 1.0, 0.0, 0.0), 0.0) == pytest.approx(0.5)

    def test_guessing_shifts_midpoint(self):
        assert prob_correct(Item(1, 1.0, 0.0, 0.2), 0.0) == pytest.approx(0.6)

    def test_lower_asymptote_is_guessing_floor(self):
        assert prob_correct(Item(1, 2.0, -1.0, 0.25), -60.0) == pytest.approx(0.25, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(item_params, thetas, thetas)
    def test_strictly_increasing(self, params, t1, t2):
        lo, hi = sorted((t1, t2))
        if hi - lo < 1e-9:
            return
        item = make_item(params)
        assert prob_correct(item, lo) < prob_correct(item, hi)

    def test_range_is_open_interval(self):
        item = Item(1, 1.5, 0.5, 0.2)
        for theta in (-8.0, 0.0, 8.0):
            p = prob_correct(item, theta)
            assert item.c < p < 1.0


class TestItemValidation:
    def test_rejects_nonpositive_discrimination(self):
        with pytest.raises(ValueError):
            Item(1, 0.0, 0.0, 0.1)

    def test_rejects_guessing_of_one(self):
        with pytest.raises(ValueError):
            Item(1, 1.0, 0.0, 1.0)

    def test_pool_rejects_duplicate_ids(self):
        with pytest.raises(ValueError, match="duplicate"):
            ItemPool([Item(1, 1, 0, 0), Item(1, 1, 1, 0)])


def finite_diff_info(item, theta, h=1e-5):
    """Oracle: [p'(theta)]^2 / [p (1-p)] with a central-difference p'."""
    p_hi = prob_correct(item, theta + h)
    p_lo = prob_correct(item, theta - h)
    dp = (p_hi - p_lo) / (2 * h)
    p = prob_correct(item, theta)
    return dp * dp / (p * (1 - p))


class TestFisherInfo:
    def test_quarter_a_squared_at_difficulty(self):
        assert fisher_info(Item(1, 1.0, 0.0, 0.0), 0.0) == pytest.approx(0.25)
        assert fisher_info(Item(1, 2.0, 0.0, 0.0), 0.0) == pytest.approx(1.0)

    def test_matches_finite_difference_oracle(self):
        item = Item(1, 1.5, -1.0, 0.2)
        assert fisher_info(item, -0.5) == pytest.approx(finite_diff_info(item, -0.5), abs=1e-8)

    def test_oracle_over_random_items(self):
        rng = np.random.default_rng(7)
        for item in random_items(rng, 300):
            theta = float(rng.uniform(-4, 4))
            assert fisher_info(item, theta) == pytest.approx(
                finite_diff_info(item, theta), abs=1e-6)

    def test_positive_in_far_tails(self):
        assert fisher_info(Item(1, 2.0, 0.0, 0.2), 30.0) > 0.0
        assert fisher_info(Item(1, 2.0, 0.0, 0.2), -30.0) > 0.0


class TestKlInfo:
    def test_zero_at_equal_abilities(self):
        item = Item(1, 1.3, -0.7, 0.15)
        assert kl_info(item, 0.8, 0.8) == 0.0

    def test_direct_scalar_oracle(self):
        # p(theta) = 0.6 and p(theta') = 0.5 for the unit logistic item
        item = Item(1, 1.0, 0.0, 0.0)
        theta = math.log(0.6 / 0.4)
        expected = 0.6 * math.log(1.2) + 0.4 * math.log(0.8)
        assert kl_info(item, theta, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_second_order_taylor_identity(self):
        # kl(theta, theta + d) ~ d^2 * fisher(theta) / 2 for small d
        rng = np.random.default_rng(3)
        d = 1e-3
        for item in random_items(rng, 50):
            theta = float(rng.uniform(-2, 2))
            expected = d * d * fisher_info(item, theta) / 2.0
            assert kl_info(item, theta, theta + d) == pytest.approx(expected, rel=1e-2)

    @settings(max_examples=200, deadline=None)
    @given(item_params, thetas, thetas)
    def test_nonnegative(self, params, t1, t2):
        assert kl_info(make_item(params), t1, t2) >= 0.0


class TestExponentialFamilyForm:
    def test_natural_param_is_zero_at_midpoint(self):
        assert natural_param(Item(1, 1.0, 0.0, 0.0), 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_psi_at_zero(self):
        assert psi(0.0) == pytest.approx(math.log(2.0))

    def test_psi_of_natural_param_is_neg_log_1mp(self):
        rng = np.random.default_rng(11)
        for item in random_items(rng, 100):
            theta = float(rng.uniform(-4, 4))
            p = prob_correct(item, theta)
            # the direct -log(1-p) route loses absolute precision as p -> 1
            assert psi(natural_param(item, theta)) == pytest.approx(
                -math.log(1 - p), rel=1e-12, abs=1e-12)

    def test_per_response_loglik_identity(self):
        # u tau - psi(tau) reproduces log[p^u (1-p)^(1-u)] for u in {0, 1}
        rng = np.random.default_rng(13)
        for item in random_items(rng, 100):
            theta = float(rng.uniform(-4, 4))
            tau = natural_param(item, theta)
            p = prob_correct(item, theta)
            assert 1 * tau - psi(tau) == pytest.approx(math.log(p), abs=1e-12)
            assert 0 * tau - psi(tau) == pytest.approx(math.log(1 - p), abs=1e-12)

    def test_sum_form_matches_log_likelihood(self):
        rng = np.random.default_rng(17)
        items = random_items(rng, 20)
        pool = ItemPool(items)
        for _ in range(50):
            responses = [ResponseRecord(it.id, int(rng.random() < 0.5)) for it in items]
            theta = float(rng.uniform(-3, 3))
            by_parts = sum(r.u * natural_param(pool[r.item_id], theta) for r in responses) \
                - sum(psi(natural_param(pool[r.item_id], theta)) for r in responses)
            assert by_parts == pytest.approx(log_likelihood(pool, responses, theta), abs=1e-10)

    def test_bernoulli_moments_match_psi_derivatives(self):
        # mean of u is psi'(tau) = p, variance is psi''(tau) = p(1-p)
        item = Item(1, 1.2, -0.4, 0.2)
        theta = 0.3
        p = prob_correct(item, theta)
        rng = np.random.default_rng(19)
        draws = rng.random(100_000) < p
        n = draws.size
        se_mean = math.sqrt(p * (1 - p) / n)
        assert abs(draws.mean() - p) <= 3 * se_mean
        se_var = abs(1 - 2 * p) * se_mean + 3.0 / n
        assert abs(draws.var() - p * (1 - p)) <= 3 * se_var


class TestLikelihoods:
    def test_empty_responses_give_zero(self, small_pool):
        assert log_likelihood(small_pool, [], 1.0) == 0.0

    def test_single_item_midpoint(self):
        pool = ItemPool([Item(1, 1.0, 0.0, 0.0)])
        assert log_likelihood(pool, [ResponseRecord(1, 1)], 0.0) == pytest.approx(math.log(0.5))

    def test_matches_term_by_term_oracle(self):
        rng = np.random.default_rng(23)
        items = random_items(rng, 5)
        pool = ItemPool(items)
        responses = [ResponseRecord(it.id, int(rng.random() < 0.6)) for it in items]
        theta = 0.4
        expected = 0.0
        for r in responses:
            p = prob_correct(pool[r.item_id], theta)
            expected += math.log(p) if r.u else math.log(1 - p)
        assert log_likelihood(pool, responses, theta) == pytest.approx(expected, abs=1e-12)

    def test_unknown_item_id_raises(self, small_pool):
        with pytest.raises(KeyError, match="unknown item id"):
            log_likelihood(small_pool, [ResponseRecord(10_000, 1)], 0.0)

    def test_nonpositive(self):
        rng = np.random.default_rng(29)
        items = random_items(rng, 10)
        pool = ItemPool(items)
        responses = [ResponseRecord(it.id, int(rng.random() < 0.5)) for it in items]
        assert log_likelihood(pool, responses, -1.0) <= 0.0


class TestLlr:
    def test_zero_at_equal_points(self, small_pool):
        responses = [ResponseRecord(small_pool.items[0].id, 1)]
        assert llr(small_pool, responses, -1.0, -1.0) == 0.0

    def test_all_correct_favors_high_ability(self):
        pool = ItemPool([Item(i, 1.0, 0.0, 0.1) for i in range(1, 6)])
        responses = [ResponseRecord(i, 1) for i in range(1, 6)]
        assert llr(pool, responses, -1.0, 1.0) < 0.0

    def test_composition_of_two_log_likelihoods(self):
        rng = np.random.default_rng(31)
        items = random_items(rng, 3)
        pool = ItemPool(items)
        responses = [ResponseRecord(it.id, int(rng.random() < 0.5)) for it in items]
        expected = log_likelihood(pool, responses, -2.0) - log_likelihood(pool, responses, -0.5)
        assert llr(pool, responses, -2.0, -0.5) == pytest.approx(expected, abs=1e-12)


class TestMle:
    def test_symmetric_pair_gives_zero(self):
        pool = ItemPool([Item(1, 1.0, 0.0, 0.0), Item(2, 1.0, 0.0, 0.0)])
        res = mle(pool, [ResponseRecord(1, 1), ResponseRecord(2, 0)])
        assert res.status is MleStatus.EXISTS
        assert res.theta_hat == pytest.approx(0.0, abs=1e-6)

    def test_all_correct_diverges_up(self, small_pool):
        responses = [ResponseRecord(it.id, 1) for it in small_pool.items[:4]]
        res = mle(small_pool, responses)
        assert res.status is MleStatus.DIVERGES_UP
        assert res.theta_hat == 6.0

    def test_all_incorrect_diverges_down(self, small_pool):
        responses = [ResponseRecord(it.id, 0) for it in small_pool.items[:4]]
        res = mle(small_pool, responses)
        assert res.status is MleStatus.DIVERGES_DOWN
        assert res.theta_hat == -6.0

    def test_empty_responses_rejected(self, small_pool):
        with pytest.raises(ValueError):
            mle(small_pool, [])

    def test_respects_clamp(self, small_pool):
        responses = [ResponseRecord(small_pool.items[0].id, 1),
                     ResponseRecord(small_pool.items[1].id, 0)]
        res = mle(small_pool, responses, clamp=(-1.0, 1.0))
        assert -1.0 <= res.theta_hat <= 1.0

    def test_matches_fine_grid_search(self):
        # brute-force oracle on a 1e-4 grid; full 200-transcript sweep runs
        # in the acceptance suite
        rng = np.random.default_rng(37)
        grid = np.linspace(-6.0, 6.0, 120_001)
        for _ in range(25):
            n = int(rng.integers(10, 31))
            items = random_items(rng, n)
            pool = ItemPool(items)
            theta_true = float(rng.uniform(-2.5, 2.5))
            responses = [ResponseRecord(it.id, int(rng.random() < prob_correct(it, theta_true)))
                         for it in items]
            u = np.array([r.u for r in responses], dtype=bool)
            if u.all() or not u.any():
                continue
            a = np.array([it.a for it in items])[:, None]
            b = np.array([it.b for it in items])[:, None]
            c = np.array([it.c for it in items])[:, None]
            p = c + (1 - c) / (1 + np.exp(-a * (grid[None, :] - b)))
            ll = np.where(u[:, None], np.log(p), np.log(1 - p)).sum(axis=0)
            oracle = grid[int(np.argmax(ll))]
            res = mle(pool, responses)
            assert res.status is MleStatus.EXISTS
            assert abs(res.theta_hat - oracle) <= 2e-4


class TestGlrStat:
    def test_zero_against_itself(self, small_pool):
        responses = [ResponseRecord(small_pool.items[0].id, 1),
                     ResponseRecord(small_pool.items[1].id, 0)]
        theta_hat = mle(small_pool, responses).theta_hat
        assert glr_stat(small_pool, responses, theta_hat, theta_hat) == 0.0

    def test_symmetric_case_scalar_oracle(self):
        pool = ItemPool([Item(1, 1.0, 0.0, 0.0), Item(2, 1.0, 0.0, 0.0)])
        responses = [ResponseRecord(1, 1), ResponseRecord(2, 0)]
        theta_hat = mle(pool, responses).theta_hat
        p1 = 1.0 / (1.0 + math.exp(-1.0))
        expected = math.log(0.25) - (math.log(p1) + math.log(1 - p1))
        assert glr_stat(pool, responses, theta_hat, 1.0) == pytest.approx(expected, abs=1e-9)

    def test_nonnegative_for_interior_references(self):
        rng = np.random.default_rng(41)
        items = random_items(rng, 12)
        pool = ItemPool(items)
        for _ in range(30):
            responses = [ResponseRecord(it.id, int(rng.random() < 0.5)) for it in items]
            theta_hat = mle(pool, responses).theta_hat
            ref = float(rng.uniform(-6, 6))
            assert glr_stat(pool, responses, theta_hat, ref) >= 0.0


class TestSignedRoot:
    def test_zero_glr(self):
        assert signed_root(10, 0.0, 1.0, 0.0) == 0.0

    def test_magnitude(self):
        assert signed_root(4, 2.0, 0.5, 0.0) == pytest.approx(4.0)
        assert signed_root(4, 2.0, -0.5, 0.0) == pytest.approx(-4.0)

    def test_rejects_negative_glr(self):
        with pytest.raises(ValueError):
            signed_root(4, -0.1, 0.5, 0.0)

    def test_standard_normal_under_reference(self, medium_pool):
        # distributional oracle: scaled signed roots from 25-item transcripts
        # at the true reference are approximately standard normal
        from scipy import stats

        from cmtsim import SelectionRule
        from cmtsim.engine import rep_stream, simulate_batch
        from cmtsim.irt import _fisher_kernel

        theta_ref = -1.2
        ids, a, b, c, _ = medium_pool.parameter_arrays()
        top = np.argsort(-_fisher_kernel(a, b, c, theta_ref), kind="stable")[:25]
        sub = ItemPool([Item(int(ids[p]), float(a[p]), float(b[p]), float(c[p])) for p in top])
        from cmtsim import Hypotheses
        hyps = Hypotheses(theta_plus=theta_ref + 0.25, theta_minus=theta_ref - 0.25,
                          theta_cut=theta_ref, alpha=0.05, beta=0.05)
        streams = [rep_stream(97, r) for r in range(10_000)]
        rec = simulate_batch(sub, hyps, theta_ref, 25, streams,
                             selection=SelectionRule.MAX_FISHER_AT_MLE)
        glr = rec.glr_vs(theta_ref)[:, -1]
        z = np.sign(rec.theta_hat[:, -1] - theta_ref) * np.sqrt(2 * 25 * glr) / math.sqrt(25)
        stat = stats.kstest(z, "norm").statistic
        assert stat < 0.03
