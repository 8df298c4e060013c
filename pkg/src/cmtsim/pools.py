"""Synthetic item-pool generation and item-pool CSV files.

The synthetic generator stands in for a proprietary operational pool; its
marginal distributions are pinned to published range/median summaries of
that pool (discrimination in [0.289, 2.372] with median 0.862, difficulty
in [-5.531, 5.426] with median -0.943, guessing in [0.048, 0.529] with
median 0.232).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .irt import Item, ItemPool

POOL_CSV_HEADER = ["id", "a", "b", "c", "category"]


class PoolFormatError(ValueError):
    """Raised for malformed item-pool CSV content; messages carry row numbers."""


@dataclass(frozen=True)
class PoolDistribution:
    """Marginal families for the synthetic pool.

    Discrimination is truncated log-normal, difficulty truncated normal,
    guessing a scaled Beta; parameters chosen so the medians land on the
    published values. Recorded here so generated pools are reproducible
    from (size, seed, distribution) alone.
    """

    a_median: float = 0.862
    a_log_sd: float = 0.4
    a_range: tuple[float, float] = (0.289, 2.372)
    b_mean: float = -0.943
    b_sd: float = 2.0
    b_range: tuple[float, float] = (-5.531, 5.426)
    c_shape: tuple[float, float] = (2.0, 3.0)
    c_range: tuple[float, float] = (0.048, 0.529)


DEFAULT_DISTRIBUTION = PoolDistribution()


def _truncated(rng: np.random.Generator, draw, lo: float, hi: float, size: int) -> np.ndarray:
    out = np.empty(0)
    while out.size < size:
        x = draw(rng, max(2 * (size - out.size), 64))
        out = np.concatenate([out, x[(x >= lo) & (x <= hi)]])
    return out[:size]


def synthetic_pool(size: int, seed, dist: PoolDistribution = DEFAULT_DISTRIBUTION,
                   categories: int | None = None) -> ItemPool:
    """Generate a pool of `size` items, deterministic given the seed.

    Category labels are assigned uniformly at random when a category count
    is supplied, otherwise every item carries category 0.
    """
    if size < 1:
        raise ValueError(f"pool size must be at least 1, got {size}")
    rng = np.random.default_rng(seed)
    mu = math.log(dist.a_median)
    a = _truncated(rng, lambda r, n: np.exp(r.normal(mu, dist.a_log_sd, n)),
                   dist.a_range[0], dist.a_range[1], size)
    b = _truncated(rng, lambda r, n: r.normal(dist.b_mean, dist.b_sd, n),
                   dist.b_range[0], dist.b_range[1], size)
    c_lo, c_hi = dist.c_range
    c = c_lo + (c_hi - c_lo) * rng.beta(dist.c_shape[0], dist.c_shape[1], size)
    if categories is not None:
        if categories < 1:
            raise ValueError(f"category count must be at least 1, got {categories}")
        cat = rng.integers(0, categories, size)
    else:
        cat = np.zeros(size, dtype=np.int64)
    items = [Item(i + 1, float(a[i]), float(b[i]), float(c[i]), int(cat[i])) for i in range(size)]
    return ItemPool(items)


def write_pool_csv(pool: ItemPool, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(POOL_CSV_HEADER)
        for it in pool:
            writer.writerow([it.id, repr(it.a), repr(it.b), repr(it.c), it.category])


def read_pool_csv(path) -> ItemPool:
    """Read an item-pool CSV (header id,a,b,c,category), validating each row.

    Row numbers in error messages count the header as row 1.
    """
    path = Path(path)
    items: list[Item] = []
    seen: set[int] = set()
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PoolFormatError(f"{path}: empty file, expected header {','.join(POOL_CSV_HEADER)}")
        if [h.strip() for h in header] != POOL_CSV_HEADER:
            raise PoolFormatError(
                f"{path}: row 1: bad header {','.join(header)!r}, expected {','.join(POOL_CSV_HEADER)}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 5:
                raise PoolFormatError(f"{path}: row {row_no}: expected 5 fields, got {len(row)}")
            try:
                item_id = int(row[0])
                a, b, c = float(row[1]), float(row[2]), float(row[3])
                category = int(row[4])
            except ValueError as exc:
                raise PoolFormatError(f"{path}: row {row_no}: {exc}") from None
            if item_id in seen:
                raise PoolFormatError(f"{path}: row {row_no}: duplicate item id {item_id}")
            seen.add(item_id)
            try:
                items.append(Item(item_id, a, b, c, category))
            except ValueError as exc:
                raise PoolFormatError(f"{path}: row {row_no}: {exc}") from None
    if not items:
        raise PoolFormatError(f"{path}: no items found")
    return ItemPool(items)


def pool_summary(pool: ItemPool) -> dict:
    """Range/median descriptive statistics for each parameter."""
    a = np.array([it.a for it in pool])
    b = np.array([it.b for it in pool])
    c = np.array([it.c for it in pool])
    cats = sorted({it.category for it in pool})
    summary = {"size": len(pool), "categories": cats}
    for name, arr in (("a", a), ("b", b), ("c", c)):
        summary[name] = {
            "min": float(arr.min()),
            "median": float(np.median(arr)),
            "max": float(arr.max()),
        }
    return summary
