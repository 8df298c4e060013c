import numpy as np
import pytest

from cmtsim import Hypotheses, ItemPool, Item, synthetic_pool


@pytest.fixture(scope="session")
def small_pool() -> ItemPool:
    return synthetic_pool(120, seed=51)


@pytest.fixture(scope="session")
def medium_pool() -> ItemPool:
    return synthetic_pool(400, seed=52)


@pytest.fixture(scope="session")
def study_hyps() -> Hypotheses:
    """The published study design: cut -1.32, indifference bounds at +-0.25."""
    return Hypotheses(theta_plus=-1.07, theta_minus=-1.57, theta_cut=-1.32,
                      alpha=0.05, beta=0.05)


def random_items(rng: np.random.Generator, n: int, start_id: int = 1) -> list[Item]:
    a = np.exp(rng.normal(-0.15, 0.4, n)).clip(0.3, 2.4)
    b = rng.normal(-0.9, 1.5, n).clip(-4.5, 4.5)
    c = 0.05 + 0.45 * rng.random(n)
    return [Item(start_id + i, float(a[i]), float(b[i]), float(c[i])) for i in range(n)]
