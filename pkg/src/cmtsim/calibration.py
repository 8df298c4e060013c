"""Threshold calibration for the sequential mastery tests.

Two Monte Carlo routines drive the main path: the first locates the
implied alternative (the ability at which the fixed-length likelihood
ratio test attains its nominal error pair), the second solves the three
stopping thresholds so the early-accept, early-reject, and terminal-reject
events hit their error-budget shares. Both bisect over probabilities
estimated from seeded simulation with common random numbers, which makes
every probe monotone in its threshold for a fixed seed.

A Gaussian random-walk approximation of the signed-root statistic backs
two cheaper alternatives: recursive numerical integration of the
boundary-crossing probabilities, and Siegmund-style closed forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .engine import BatchRecord, _first_true, simulate_records
from .irt import DEFAULT_CLAMP, ItemPool
from .selection import ContentConstraints, SelectionRule
from .stopping import Hypotheses, Thresholds, wald_thresholds

# numpy renamed trapz in 2.0
_trapz = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class CalibrationSettings:
    """Monte Carlo budget and convergence tolerances for the routines."""

    seed: int
    replications: int = 10_000
    prob_tol: float = 0.002
    x_tol: float = 0.005
    epsilon: float = 0.5

    def __post_init__(self) -> None:
        if self.replications < 1000:
            raise ValueError(f"calibration needs at least 1000 replications, got {self.replications}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.prob_tol < 0.0 or self.x_tol <= 0.0:
            raise ValueError("tolerances must be positive (prob_tol may be zero)")


class BracketError(RuntimeError):
    """No sign change found for a root search, even after expansion."""


@dataclass
class BisectResult:
    root: float
    value: float
    trace: list[tuple[float, float]] = field(default_factory=list)


def bracket_bisect(f: Callable[[float], float], target: float, lo: float, hi: float,
                   prob_tol: float = 0.002, x_tol: float = 0.005,
                   expand_limit: int = 0, expand_bounds: tuple[float, float] | None = None) -> BisectResult:
    """Bisect a monotone probe until |f(x) - target| <= prob_tol or the
    bracket is narrower than x_tol.

    If the initial endpoints do not straddle the target, the bracket is
    widened geometrically up to expand_limit times (clipped to
    expand_bounds when given) before giving up.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    trace: list[tuple[float, float]] = []

    def probe(x: float) -> float:
        v = float(f(x))
        trace.append((x, v))
        return v

    f_lo, f_hi = probe(lo), probe(hi)
    expansions = 0
    while not min(f_lo, f_hi) <= target <= max(f_lo, f_hi):
        if expansions >= expand_limit:
            raise BracketError(
                f"target {target} not bracketed: f({lo})={f_lo}, f({hi})={f_hi}")
        expansions += 1
        width = hi - lo
        increasing = f_hi >= f_lo
        if (target > max(f_lo, f_hi)) == increasing:
            hi = hi + width
            if expand_bounds is not None:
                hi = min(hi, expand_bounds[1])
            f_hi = probe(hi)
        else:
            lo = lo - width
            if expand_bounds is not None:
                lo = max(lo, expand_bounds[0])
            f_lo = probe(lo)

    increasing = f_hi >= f_lo
    best: tuple[float, float] | None = None
    while hi - lo > x_tol:
        mid = (lo + hi) / 2.0
        fm = probe(mid)
        if best is None or abs(fm - target) < abs(best[1] - target):
            best = (mid, fm)
        if abs(fm - target) <= prob_tol:
            return BisectResult(mid, fm, trace)
        if (fm < target) == increasing:
            lo = mid
        else:
            hi = mid
    if best is None:
        mid = (lo + hi) / 2.0
        best = (mid, probe(mid))
    return BisectResult(best[0], best[1], trace)


def _phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


class BoundaryKind(Enum):
    EARLY_UPPER = "early_upper"
    EARLY_LOWER = "early_lower"
    TERMINAL_GIVEN_NO_EARLY = "terminal_given_no_early"


def _mc_boundary_prob(kind: BoundaryKind, z: float, z_terminal: float | None,
                      n_stages: int, min_stage: int, replications: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    sqrt_k = np.sqrt(np.arange(1, n_stages + 1, dtype=float))
    hits = 0
    remaining = replications
    while remaining > 0:
        size = min(remaining, 100_000)
        walk = rng.standard_normal((size, n_stages)).cumsum(axis=1) / sqrt_k
        early = walk[:, min_stage - 1:n_stages - 1]
        if kind is BoundaryKind.EARLY_UPPER:
            hit = (early >= z).any(axis=1)
        elif kind is BoundaryKind.EARLY_LOWER:
            hit = (early <= -z).any(axis=1)
        else:
            hit = ~(early <= -z).any(axis=1) & (walk[:, -1] <= -z_terminal)
        hits += int(hit.sum())
        remaining -= size
    return hits / replications


_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _em_mass(x: np.ndarray, g: np.ndarray) -> float:
    """Trapezoid integral with Euler-Maclaurin endpoint corrections."""
    h = x[1] - x[0]
    d_hi = (3.0 * g[-1] - 4.0 * g[-2] + g[-3]) / (2.0 * h)
    d_lo = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h)
    return float(_trapz(g, x)) - h * h / 12.0 * (d_hi - d_lo)


def _recursive_boundary_prob(z: float, z_terminal: float | None,
                             n_stages: int, min_stage: int, grid_points: int) -> tuple[float, float]:
    """Upper-crossing probability of c_k = z sqrt(k) over the masked stages,
    plus the surviving terminal mass above z_terminal sqrt(n_stages).

    Each stage's sub-density lives on a uniform grid whose last node sits
    exactly at the absorbing cut, so every integrand stays smooth; the
    per-stage crossing mass is recovered from mass conservation. Endpoint
    corrections keep quadrature error far below Monte Carlo resolution at
    the default 512 points.
    """
    if min_stage >= n_stages:
        terminal = 0.0 if z_terminal is None else 1.0 - _norm_cdf(z_terminal)
        return 0.0, terminal
    span = 8.0 * math.sqrt(n_stages)
    root_k = math.sqrt(min_stage)
    x = np.linspace(-span, min(z * root_k, span), grid_points)
    g = np.exp(-0.5 * (x / root_k) ** 2) / (root_k * _SQRT_2PI)
    survived = _em_mass(x, g)
    crossed = 1.0 - survived
    for k in range(min_stage + 1, n_stages + 1):
        if k < n_stages:
            hi = min(z * math.sqrt(k), span)
        elif z_terminal is not None:
            hi = min(z_terminal * math.sqrt(n_stages), span)
        else:
            return crossed, 0.0
        x_next = np.linspace(-span, hi, grid_points)
        h = x[1] - x[0]
        w = np.full(grid_points, h)
        w[0] = w[-1] = h / 2.0
        kernel = np.exp(-0.5 * (x_next[:, None] - x[None, :]) ** 2) / _SQRT_2PI
        g_next = kernel @ (g * w)
        # endpoint correction at the cut (the lower tail is already ~0)
        slope = (3.0 * g[-1] - 4.0 * g[-2] + g[-3]) / (2.0 * h)
        u = x_next - x[-1]
        phi_cut = np.exp(-0.5 * u * u) / _SQRT_2PI
        g_next = g_next - h * h / 12.0 * (slope + g[-1] * u) * phi_cut
        if k < n_stages:
            now = _em_mass(x_next, g_next)
            crossed += survived - now
            survived, x, g = now, x_next, g_next
        else:
            below = _em_mass(x_next, g_next)
            return crossed, max(survived - below, 0.0)
    return crossed, 0.0


def gaussian_boundary_prob(kind: BoundaryKind, threshold: float, n_stages: int, min_stage: int,
                           method: str = "recursive", terminal_cutoff: float | None = None,
                           replications: int = 1_000_000, seed: int = 0,
                           grid_points: int = 512) -> float:
    """Boundary-crossing probability of the standard Gaussian random walk.

    The walk S_k is scaled by sqrt(k) and compared against sqrt(2 *
    threshold) over stages min_stage <= k < n_stages; the terminal kind asks
    for no early crossing together with S_N / sqrt(N) beyond
    sqrt(2 * terminal_cutoff).
    """
    if threshold < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    if not 1 <= min_stage <= n_stages:
        raise ValueError(f"min_stage must be in [1, {n_stages}], got {min_stage}")
    if kind is BoundaryKind.TERMINAL_GIVEN_NO_EARLY:
        if terminal_cutoff is None or terminal_cutoff < 0.0:
            raise ValueError("the terminal kind needs a nonnegative terminal_cutoff")
    z = math.sqrt(2.0 * threshold)
    z_term = math.sqrt(2.0 * terminal_cutoff) if terminal_cutoff is not None else None
    if method == "monte-carlo":
        if replications < 1:
            raise ValueError(f"replications must be positive, got {replications}")
        return _mc_boundary_prob(kind, z, z_term, n_stages, min_stage, replications, seed)
    if method != "recursive":
        raise ValueError(f"unknown method {method!r}, expected 'monte-carlo' or 'recursive'")
    if grid_points < 16:
        raise ValueError(f"grid_points must be at least 16, got {grid_points}")
    # the lower-boundary kinds mirror the upper crossing of the sign-flipped walk
    want_terminal = kind is BoundaryKind.TERMINAL_GIVEN_NO_EARLY
    crossed, terminal = _recursive_boundary_prob(
        z, z_term if want_terminal else None, n_stages, min_stage, grid_points)
    return terminal if want_terminal else crossed


def siegmund_early_crossing_prob(bound: float, n_stages: int, min_stage: int) -> float:
    """Closed-form approximation to the early boundary-crossing probability."""
    if bound <= 0.0:
        raise ValueError(f"bound must be positive, got {bound}")
    z = math.sqrt(2.0 * bound)
    return 0.5 * ((z - 1.0 / z) * _phi(z) * math.log(n_stages / min_stage) + 4.0 * _phi(z) / z)


def siegmund_terminal_prob(reject_bound: float, terminal_cutoff: float,
                           n_stages: int, min_stage: int) -> float:
    """Closed-form approximation to the terminal-rejection probability."""
    if reject_bound <= 0.0 or terminal_cutoff <= 0.0:
        raise ValueError("reject_bound and terminal_cutoff must be positive")
    z = math.sqrt(2.0 * reject_bound)
    bracket = math.log(math.sqrt(n_stages / min_stage)) - 2.0 \
        + reject_bound * math.log(terminal_cutoff / reject_bound)
    return _norm_cdf(-math.sqrt(2.0 * terminal_cutoff)) + (_phi(z) / z) * bracket


def solve_thresholds_siegmund(alpha: float, beta: float, epsilon: float,
                              n_stages: int, min_stage: int) -> tuple[float, float, float]:
    """Thresholds solving the closed-form approximations at the error split.

    Returns (reject_bound, accept_bound, terminal_cutoff)."""
    for name, v in (("alpha", alpha), ("beta", beta), ("epsilon", epsilon)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must be in (0, 1), got {v}")
    lo, hi = 0.5, 20.0
    reject = bracket_bisect(lambda a: siegmund_early_crossing_prob(a, n_stages, min_stage),
                            epsilon * alpha, lo, hi, prob_tol=0.0, x_tol=1e-6).root
    accept = bracket_bisect(lambda b: siegmund_early_crossing_prob(b, n_stages, min_stage),
                            epsilon * beta, lo, hi, prob_tol=0.0, x_tol=1e-6).root
    terminal = bracket_bisect(
        lambda c: siegmund_terminal_prob(reject, c, n_stages, min_stage),
        (1.0 - epsilon) * alpha, lo, hi, prob_tol=0.0, x_tol=1e-6).root
    return reject, accept, terminal


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


@dataclass
class ImpliedAlternativeResult:
    theta_implied: float
    fixed_cutoff: float
    achieved_type1: float
    achieved_type2: float
    replications: int
    trace: list[tuple[float, float]]


def calibrate_implied_alternative(pool: ItemPool, hyps: Hypotheses, max_length: int,
                                  rule: SelectionRule, settings: CalibrationSettings,
                                  constraints: ContentConstraints | None = None,
                                  clamp: tuple[float, float] = DEFAULT_CLAMP,
                                  kl_offset: float | None = None,
                                  workers: int = 1) -> ImpliedAlternativeResult:
    """Implied alternative for the fixed-length likelihood ratio test.

    Inner loop: for a candidate alternative, bisect the terminal cutoff so
    the simulated type I error at theta_plus is alpha. Outer loop: bisect
    the candidate until the simulated type II error at the candidate is
    beta. One seeded batch at theta_plus is reused across every candidate;
    candidate batches share the per-replication streams, so both probes
    are monotone.
    """
    rec_plus = simulate_records(pool, hyps, hyps.theta_plus, max_length, settings.seed,
                                settings.replications, selection=rule, constraints=constraints,
                                clamp=clamp, kl_offset=kl_offset, workers=workers)
    ll_plus_at_plus = rec_plus.stage_loglik(hyps.theta_plus)[:, -1]

    def solve_cutoff(theta_cand: float) -> BisectResult:
        llr_vals = rec_plus.stage_loglik(theta_cand)[:, -1] - ll_plus_at_plus
        lo = float(llr_vals.min()) - 1e-9
        hi = float(llr_vals.max()) + 1e-9
        return bracket_bisect(lambda cut: float(np.mean(llr_vals >= cut)), hyps.alpha,
                              lo, hi, prob_tol=settings.prob_tol, x_tol=settings.x_tol)

    def type2_error(theta_cand: float) -> float:
        cutoff = solve_cutoff(theta_cand).root
        rec = simulate_records(pool, hyps, theta_cand, max_length, settings.seed,
                               settings.replications, selection=rule, constraints=constraints,
                               clamp=clamp, kl_offset=kl_offset, workers=workers)
        llr_vals = rec.stage_loglik(theta_cand)[:, -1] - rec.stage_loglik(hyps.theta_plus)[:, -1]
        return float(np.mean(llr_vals < cutoff))

    outer = bracket_bisect(type2_error, hyps.beta,
                           hyps.theta_plus - 3.0, hyps.theta_plus - settings.x_tol,
                           prob_tol=settings.prob_tol, x_tol=settings.x_tol)
    theta_implied = outer.root
    final_cut = solve_cutoff(theta_implied)
    return ImpliedAlternativeResult(
        theta_implied=theta_implied,
        fixed_cutoff=final_cut.root,
        achieved_type1=final_cut.value,
        achieved_type2=outer.value,
        replications=settings.replications,
        trace=outer.trace,
    )


@dataclass
class ModhpCalibrationResult:
    thresholds: Thresholds
    achieved: dict[str, dict[str, float]]
    traces: dict[str, list[tuple[float, float]]]


def calibrate_modhp_thresholds(pool: ItemPool, hyps: Hypotheses, max_length: int,
                               min_stage: int, rule: SelectionRule,
                               settings: CalibrationSettings,
                               constraints: ContentConstraints | None = None,
                               clamp: tuple[float, float] = DEFAULT_CLAMP,
                               kl_offset: float | None = None,
                               workers: int = 1) -> ModhpCalibrationResult:
    """Solve the three stopping thresholds against their error-budget shares.

    In order: the accept bound makes the early-accept probability under the
    implied alternative epsilon * beta (reject and terminal boundaries off);
    the reject bound makes the probability under theta_plus of an early
    reject that is not preceded or met by an accept epsilon * alpha; the
    terminal cutoff makes the terminal-rejection probability under
    theta_plus the remaining (1 - epsilon) * alpha.
    """
    if hyps.theta_implied is None:
        raise ValueError("hypotheses must carry theta_implied; run the implied-alternative "
                         "calibration first")
    eps = settings.epsilon
    early = slice(min_stage - 1, max_length - 1)

    rec_imp = simulate_records(pool, hyps, hyps.theta_implied, max_length, settings.seed,
                               settings.replications, selection=rule, constraints=constraints,
                               clamp=clamp, kl_offset=kl_offset, workers=workers)
    accept_score = np.where(rec_imp.theta_hat > hyps.theta_implied,
                            rec_imp.glr_vs(hyps.theta_implied), -np.inf)[:, early]
    accept_peak = accept_score.max(axis=1) if accept_score.shape[1] else \
        np.full(rec_imp.n_reps, -np.inf)

    accept_res = bracket_bisect(lambda bnd: float(np.mean(accept_peak >= bnd)),
                                eps * hyps.beta, 0.25, 8.0,
                                prob_tol=settings.prob_tol, x_tol=settings.x_tol,
                                expand_limit=6, expand_bounds=(1e-4, 50.0))
    accept_bound = accept_res.root

    rec_plus = simulate_records(pool, hyps, hyps.theta_plus, max_length, settings.seed,
                                settings.replications, selection=rule, constraints=constraints,
                                clamp=clamp, kl_offset=kl_offset, workers=workers)
    glr_plus = rec_plus.glr_vs(hyps.theta_plus)
    glr_imp = rec_plus.glr_vs(hyps.theta_implied)
    cond_s = ((rec_plus.theta_hat > hyps.theta_implied) & (glr_imp >= accept_bound))[:, early]
    first_s = _first_true(cond_s)
    window = cond_s.shape[1]
    below_plus = rec_plus.theta_hat < hyps.theta_plus
    reject_score = np.where(below_plus, glr_plus, -np.inf)[:, early]

    def early_reject_prob(bound: float) -> float:
        first_r = _first_true(reject_score >= bound)
        return float(np.mean((first_r < window) & (first_r < first_s)))

    reject_res = bracket_bisect(early_reject_prob, eps * hyps.alpha, 0.25, 8.0,
                                prob_tol=settings.prob_tol, x_tol=settings.x_tol,
                                expand_limit=6, expand_bounds=(1e-4, 50.0))
    reject_bound = reject_res.root

    stopped = (cond_s | (reject_score >= reject_bound)).any(axis=1)
    terminal_score = np.where(~stopped & below_plus[:, -1], glr_plus[:, -1], -np.inf)
    terminal_res = bracket_bisect(lambda cut: float(np.mean(terminal_score >= cut)),
                                  (1.0 - eps) * hyps.alpha, 0.25, 8.0,
                                  prob_tol=settings.prob_tol, x_tol=settings.x_tol,
                                  expand_limit=6, expand_bounds=(0.0, 50.0))
    terminal_cutoff = terminal_res.root

    n = settings.replications
    achieved = {
        "early_accept_at_implied": {
            "probability": accept_res.value, "target": eps * hyps.beta,
            "se": _binomial_se(accept_res.value, n)},
        "early_reject_at_plus": {
            "probability": reject_res.value, "target": eps * hyps.alpha,
            "se": _binomial_se(reject_res.value, n)},
        "terminal_reject_at_plus": {
            "probability": terminal_res.value, "target": (1.0 - eps) * hyps.alpha,
            "se": _binomial_se(terminal_res.value, n)},
        "type1_total": {
            "probability": reject_res.value + terminal_res.value, "target": hyps.alpha,
            "se": _binomial_se(reject_res.value + terminal_res.value, n)},
    }
    traces = {"accept_bound": accept_res.trace, "reject_bound": reject_res.trace,
              "terminal_cutoff": terminal_res.trace}
    thresholds = Thresholds(max_length=max_length, terminal_cutoff=terminal_cutoff,
                            reject_bound=reject_bound, accept_bound=accept_bound,
                            min_stage=min_stage)
    return ModhpCalibrationResult(thresholds=thresholds, achieved=achieved, traces=traces)


def calibrate_fixed_cutoff(record_plus: BatchRecord, hyps: Hypotheses, theta_low: float,
                           settings: CalibrationSettings) -> BisectResult:
    """Terminal cutoff giving the fixed-length rule type I error alpha,
    with the likelihood ratio referenced at theta_low."""
    llr_vals = record_plus.stage_loglik(theta_low)[:, -1] \
        - record_plus.stage_loglik(hyps.theta_plus)[:, -1]
    lo = float(llr_vals.min()) - 1e-9
    hi = float(llr_vals.max()) + 1e-9
    return bracket_bisect(lambda cut: float(np.mean(llr_vals >= cut)), hyps.alpha,
                          lo, hi, prob_tol=settings.prob_tol, x_tol=settings.x_tol)


def calibrate_tsprt_cutoff(record_plus: BatchRecord, hyps: Hypotheses,
                           reject_bound: float, accept_bound: float,
                           settings: CalibrationSettings) -> BisectResult:
    """Truncation cutoff giving the truncated SPRT total type I error alpha.

    Early boundary crossings keep their classical thresholds; only the
    decision at truncation moves.
    """
    n = record_plus.n_stages
    llr = record_plus.llr_stages(hyps.theta_minus, hyps.theta_plus)
    rej = llr[:, :n - 1] >= reject_bound
    acc = llr[:, :n - 1] <= -accept_bound
    first_rej = _first_true(rej)
    first_acc = _first_true(acc)
    early_reject = first_rej < np.minimum(first_acc, n - 1)
    reached = ~(rej | acc).any(axis=1)
    terminal_vals = np.where(reached, llr[:, -1], -np.inf)
    base = float(np.mean(early_reject))
    if base > hyps.alpha:
        raise BracketError(
            f"early rejections alone exceed alpha: {base} > {hyps.alpha}")
    lo = float(llr[:, -1].min()) - 1e-9
    hi = float(llr[:, -1].max()) + 1e-9
    return bracket_bisect(lambda cut: base + float(np.mean(terminal_vals >= cut)),
                          hyps.alpha, lo, hi,
                          prob_tol=settings.prob_tol, x_tol=settings.x_tol)


def run_full_calibration(pool: ItemPool, hyps: Hypotheses, max_length: int, min_stage: int,
                         rule: SelectionRule, settings: CalibrationSettings,
                         constraints: ContentConstraints | None = None,
                         clamp: tuple[float, float] = DEFAULT_CLAMP,
                         kl_offset: float | None = None, workers: int = 1,
                         method: str = "monte-carlo",
                         pool_source: str = "") -> dict:
    """Implied alternative plus every cutoff the comparison rules need.

    Returns a JSON-ready report. With method "closed-form" the three
    sequential thresholds come from the Siegmund approximations instead of
    simulation; the implied alternative and the comparison-rule cutoffs are
    always simulated.
    """
    implied = calibrate_implied_alternative(pool, hyps, max_length, rule, settings,
                                            constraints=constraints, clamp=clamp,
                                            kl_offset=kl_offset, workers=workers)
    hyps_full = hyps.with_implied(implied.theta_implied)

    if method == "closed-form":
        rb, ab, tc = solve_thresholds_siegmund(hyps.alpha, hyps.beta, settings.epsilon,
                                               max_length, min_stage)
        achieved = {
            "early_reject_at_plus": {
                "probability": siegmund_early_crossing_prob(rb, max_length, min_stage),
                "target": settings.epsilon * hyps.alpha, "se": 0.0},
            "early_accept_at_implied": {
                "probability": siegmund_early_crossing_prob(ab, max_length, min_stage),
                "target": settings.epsilon * hyps.beta, "se": 0.0},
            "terminal_reject_at_plus": {
                "probability": siegmund_terminal_prob(rb, tc, max_length, min_stage),
                "target": (1.0 - settings.epsilon) * hyps.alpha, "se": 0.0},
        }
        traces: dict = {}
        thresholds = Thresholds(max_length=max_length, terminal_cutoff=tc,
                                reject_bound=rb, accept_bound=ab, min_stage=min_stage)
    elif method == "monte-carlo":
        modhp = calibrate_modhp_thresholds(pool, hyps_full, max_length, min_stage, rule,
                                           settings, constraints=constraints, clamp=clamp,
                                           kl_offset=kl_offset, workers=workers)
        thresholds, achieved, traces = modhp.thresholds, modhp.achieved, modhp.traces
    else:
        raise ValueError(f"unknown calibration method {method!r}")

    # cutoffs for the comparison rules, all from one batch at theta_plus
    rec_plus = simulate_records(pool, hyps_full, hyps.theta_plus, max_length, settings.seed,
                                settings.replications, selection=rule, constraints=constraints,
                                clamp=clamp, kl_offset=kl_offset, workers=workers)
    wald_reject, wald_accept = wald_thresholds(hyps.alpha, hyps.beta)
    fixed_minus = calibrate_fixed_cutoff(rec_plus, hyps_full, hyps.theta_minus, settings)
    tsprt_cut = calibrate_tsprt_cutoff(rec_plus, hyps_full, wald_reject, wald_accept, settings)

    return {
        "version": 1,
        "method": method,
        "inputs": {
            "pool_source": pool_source,
            "pool_size": len(pool),
            "hypotheses": {
                "theta_plus": hyps.theta_plus, "theta_minus": hyps.theta_minus,
                "theta_cut": hyps.theta_cut, "alpha": hyps.alpha, "beta": hyps.beta},
            "max_length": max_length,
            "min_stage": min_stage,
            "selection": rule.value,
            "constraints": None if constraints is None else {
                "proportions": list(constraints.proportions),
                "exposure_cap": constraints.exposure_cap},
            "clamp": list(clamp),
            "replications": settings.replications,
            "epsilon": settings.epsilon,
            "prob_tol": settings.prob_tol,
            "x_tol": settings.x_tol,
            "seed": settings.seed,
        },
        "theta_implied": implied.theta_implied,
        "fixed_cutoff_implied": implied.fixed_cutoff,
        "implied_achieved": {"type1": implied.achieved_type1, "type2": implied.achieved_type2},
        "thresholds": {
            "reject_bound": thresholds.reject_bound,
            "accept_bound": thresholds.accept_bound,
            "terminal_cutoff": thresholds.terminal_cutoff,
            "min_stage": thresholds.min_stage,
            "max_length": thresholds.max_length,
        },
        "wald": {"reject_bound": wald_reject, "accept_bound": wald_accept},
        "fixed_cutoff_minus": fixed_minus.root,
        "tsprt_cutoff": tsprt_cut.root,
        "achieved": achieved,
        "trace": {"theta_implied": implied.trace, **traces},
    }


def write_calibration_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_calibration_report(path) -> dict:
    report = json.loads(Path(path).read_text(encoding="utf-8"))
    if report.get("version") != 1:
        raise ValueError(f"{path}: unsupported calibration report version {report.get('version')}")
    return report
