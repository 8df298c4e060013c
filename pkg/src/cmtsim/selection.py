"""Adaptive item selection, exposure-controlled pool pruning, and
content-balancing spiraling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .irt import Item, ItemPool, MleResult, _fisher_kernel, _kl_kernel


class SelectionRule(Enum):
    MAX_FISHER_AT_CUT = "max_fisher_at_cut"
    MAX_FISHER_AT_MLE = "max_fisher_at_mle"
    MAX_KL_AT_ESTIMATE = "max_kl_at_estimate"


@dataclass(frozen=True)
class ContentConstraints:
    """Target category proportions plus the per-item exposure cap."""

    proportions: tuple[float, ...]
    exposure_cap: float

    def __post_init__(self) -> None:
        if not self.proportions:
            raise ValueError("at least one category proportion is required")
        if any(q <= 0.0 for q in self.proportions):
            raise ValueError(f"category proportions must be positive, got {self.proportions}")
        if abs(sum(self.proportions) - 1.0) > 1e-9:
            raise ValueError(f"category proportions must sum to 1, got sum {sum(self.proportions)}")
        if not 0.0 < self.exposure_cap <= 1.0:
            raise ValueError(f"exposure cap must be in (0, 1], got {self.exposure_cap}")

    @property
    def category_count(self) -> int:
        return len(self.proportions)


def content_quotas(max_length: int, proportions: Iterable[float]) -> list[int]:
    """Integer per-category counts summing to max_length, largest remainder."""
    q = list(proportions)
    raw = [max_length * qi for qi in q]
    base = [math.floor(r) for r in raw]
    leftover = max_length - sum(base)
    by_remainder = sorted(range(len(q)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in by_remainder[:leftover]:
        base[i] += 1
    return base


def candidate_sizes(max_length: int, constraints: ContentConstraints) -> list[int]:
    """Per-category candidate-set sizes ceil(N q_i / cap)."""
    return [math.ceil(max_length * qi / constraints.exposure_cap - 1e-12)
            for qi in constraints.proportions]


def _selection_index(rule: SelectionRule, a, b, c, theta_point: float,
                     bounds: tuple[float, float] | None, kl_offset: float | None):
    """Per-item selection index at a single evaluation point."""
    if rule is SelectionRule.MAX_KL_AT_ESTIMATE:
        if bounds is None:
            raise ValueError("KL selection needs the hypothesis bounds (theta_minus, theta_plus)")
        theta_minus, theta_plus = bounds
        d = kl_offset if kl_offset is not None else (theta_plus - theta_minus) / 2.0
        # compare against a point at distance d toward the nearer hypothesis bound
        toward_plus = (theta_plus - theta_point) <= (theta_point - theta_minus)
        ref = theta_point + d if toward_plus else theta_point - d
        return _kl_kernel(a * (theta_point - b), a * (ref - b), c)
    return _fisher_kernel(a, b, c, theta_point)


def selection_point(rule: SelectionRule, theta_hat: MleResult | None, theta_cut: float) -> float:
    """Where the selection index is evaluated: the MLE when it exists, the
    cut point otherwise (and always the cut point for the fixed-point rule)."""
    if rule is SelectionRule.MAX_FISHER_AT_CUT:
        return theta_cut
    if theta_hat is not None and theta_hat.exists:
        return theta_hat.theta_hat
    return theta_cut


def select_next(pool: ItemPool, used_ids: set[int], rule: SelectionRule,
                theta_hat: MleResult | None, theta_cut: float,
                bounds: tuple[float, float] | None = None,
                kl_offset: float | None = None) -> int:
    """Id of the unused item maximizing the selection index.

    Ties break toward the smallest item id.
    """
    ids, a, b, c, _ = pool.parameter_arrays()
    unused = ~np.isin(ids, np.fromiter(used_ids, dtype=np.int64, count=len(used_ids)))
    if not unused.any():
        raise RuntimeError("item pool exhausted: every item has been administered")
    point = selection_point(rule, theta_hat, theta_cut)
    index = _selection_index(rule, a, b, c, point, bounds, kl_offset)
    index = np.where(unused, index, -np.inf)
    return int(ids[int(np.argmax(index))])


def spiral_category(counts: Iterable[int], proportions: Iterable[float]) -> int:
    """Most under-represented category after the counted administrations.

    The deficit is the signed gap q_i - counts_i / k (counts_i / 0 treated
    as 0), so an over-represented category is never chosen while another
    sits below target. Ties break toward the smallest category index.
    """
    counts = np.asarray(list(counts), dtype=float)
    q = np.asarray(list(proportions), dtype=float)
    if counts.shape != q.shape:
        raise ValueError(f"got {counts.size} counts for {q.size} categories")
    k = counts.sum()
    shares = counts / k if k > 0 else np.zeros_like(counts)
    return int(np.argmax(q - shares))


def prune_plan(a: np.ndarray, b: np.ndarray, c: np.ndarray, cat: np.ndarray,
               max_length: int, constraints: ContentConstraints,
               theta_cut: float) -> list[tuple[np.ndarray, int]]:
    """Per-category (candidate positions, quota) for exposure-capped pruning.

    Candidates are the top ceil(N q_i / cap) items of each category by
    Fisher information at the cut point; the plan depends only on the pool
    and constraints, so repeated prunings share it.
    """
    s = constraints.category_count
    bad = (cat < 0) | (cat >= s)
    if bad.any():
        raise ValueError(
            f"items carry category labels outside 0..{s - 1}: {sorted(set(cat[bad].tolist()))}")
    quotas = content_quotas(max_length, constraints.proportions)
    sizes = candidate_sizes(max_length, constraints)
    info = _fisher_kernel(a, b, c, theta_cut)
    plan = []
    for i in range(s):
        positions = np.flatnonzero(cat == i)
        if positions.size < sizes[i]:
            raise ValueError(
                f"category {i} has {positions.size} items but needs at least {sizes[i]} "
                f"for quota {quotas[i]} under exposure cap {constraints.exposure_cap}")
        order = positions[np.argsort(-info[positions], kind="stable")]
        plan.append((order[:sizes[i]], quotas[i]))
    return plan


def prune_pick(plan: list[tuple[np.ndarray, int]], rng: np.random.Generator) -> np.ndarray:
    """Sample one operative pool from a pruning plan; sorted positions."""
    chosen = []
    for candidates, quota in plan:
        if quota == candidates.size:
            chosen.append(candidates)
        else:
            chosen.append(candidates[rng.choice(candidates.size, size=quota, replace=False)])
    return np.sort(np.concatenate(chosen))


def prune_indices(a: np.ndarray, b: np.ndarray, c: np.ndarray, cat: np.ndarray,
                  max_length: int, constraints: ContentConstraints, theta_cut: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Positions (into id-sorted parameter arrays) of one operative pool.

    Per category: rank by Fisher information at the cut point, keep the top
    ceil(N q_i / cap) as candidates, then sample the category quota
    uniformly from the candidates. Output positions are sorted, so the
    operative pool stays in id order.
    """
    return prune_pick(prune_plan(a, b, c, cat, max_length, constraints, theta_cut), rng)


def prune_pool_exposure(pool: ItemPool, max_length: int, constraints: ContentConstraints,
                        theta_cut: float, seed) -> ItemPool:
    """Operative pool of exactly max_length items honoring the exposure cap.

    Deterministic given the seed; each item's inclusion probability is at
    most the exposure cap.
    """
    ids, a, b, c, cat = pool.parameter_arrays()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    positions = prune_indices(a, b, c, cat, max_length, constraints, theta_cut, rng)
    keep = set(ids[positions].tolist())
    return ItemPool([it for it in pool if it.id in keep])
