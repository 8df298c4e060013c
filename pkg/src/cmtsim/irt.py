"""Three-parameter logistic response model.

Response probabilities, Fisher and Kullback-Leibler information, the
exponential-family form of the per-item likelihood, and one-dimensional
maximum likelihood estimation of ability on a clamped interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CLAMP = (-6.0, 6.0)
MLE_GRID_STEP = 0.05
MLE_TOL = 1e-6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class Item:
    """One 3-PL item: discrimination a, difficulty b, guessing floor c."""

    id: int
    a: float
    b: float
    c: float
    category: int = 0

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError(f"item {self.id}: discrimination a must be positive, got {self.a}")
        if not math.isfinite(self.b):
            raise ValueError(f"item {self.id}: difficulty b must be finite, got {self.b}")
        if not (0.0 <= self.c < 1.0):
            raise ValueError(f"item {self.id}: guessing c must be in [0, 1), got {self.c}")


class ItemPool:
    """An ordered collection of items with unique ids."""

    def __init__(self, items: Iterable[Item]):
        self.items: list[Item] = list(items)
        if not self.items:
            raise ValueError("item pool must be non-empty")
        self._by_id: dict[int, Item] = {}
        for it in self.items:
            if it.id in self._by_id:
                raise ValueError(f"duplicate item id {it.id}")
            self._by_id[it.id] = it

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, item_id: int) -> Item:
        try:
            return self._by_id[item_id]
        except KeyError:
            raise KeyError(f"unknown item id {item_id}") from None

    def ids(self) -> list[int]:
        return [it.id for it in self.items]

    def parameter_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Arrays (id, a, b, c, category) sorted ascending by item id."""
        order = sorted(range(len(self.items)), key=lambda i: self.items[i].id)
        ids = np.array([self.items[i].id for i in order], dtype=np.int64)
        a = np.array([self.items[i].a for i in order])
        b = np.array([self.items[i].b for i in order])
        c = np.array([self.items[i].c for i in order])
        cat = np.array([self.items[i].category for i in order], dtype=np.int64)
        return ids, a, b, c, cat


@dataclass(frozen=True)
class ResponseRecord:
    """A scored response: 1 for correct, 0 for incorrect."""

    item_id: int
    u: int

    def __post_init__(self) -> None:
        if self.u not in (0, 1):
            raise ValueError(f"response must be 0 or 1, got {self.u}")


class MleStatus(Enum):
    EXISTS = "exists"
    DIVERGES_UP = "diverges_up"
    DIVERGES_DOWN = "diverges_down"


@dataclass(frozen=True)
class MleResult:
    """Clamped ability estimate. theta_hat sits at the clamp bound when the
    likelihood is monotone (all responses identical)."""

    status: MleStatus
    theta_hat: float

    @property
    def exists(self) -> bool:
        return self.status is MleStatus.EXISTS


def _sigmoid(z):
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(z >= 0.0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def prob_correct(item: Item, theta: float) -> float:
    """P(correct) = c + (1 - c) / (1 + exp(-a (theta - b)))."""
    z = item.a * (theta - item.b)
    return float(item.c + (1.0 - item.c) * _sigmoid(z))


def fisher_info(item: Item, theta: float) -> float:
    """Fisher information a^2 (1-c) / [(c + e^{a(theta-b)}) (1 + e^{-a(theta-b)})^2]."""
    return float(_fisher_kernel(item.a, item.b, item.c, theta))


def _fisher_kernel(a, b, c, theta):
    """Vectorized Fisher information; broadcasts item arrays against theta."""
    z = np.clip(np.asarray(a, dtype=float) * (np.asarray(theta, dtype=float) - b), -45.0, 45.0)
    ez = np.exp(z)
    # (c + e^z)(1 + e^{-z})^2 = (c + e^z)(1 + e^z)^2 / e^{2z}
    return a * a * (1.0 - c) * ez * ez / ((c + ez) * (1.0 + ez) ** 2)


def _log_p(z, c):
    """log of c + (1-c) sigmoid(z), written as log(c + e^z) - log(1 + e^z)."""
    with np.errstate(divide="ignore"):
        log_c = np.log(c)
    return np.logaddexp(log_c, z) - np.logaddexp(0.0, z)


def _log_1mp(z, c):
    """log of (1-c)(1 - sigmoid(z))."""
    return np.log1p(-np.asarray(c, dtype=float)) - np.logaddexp(0.0, z)


def kl_info(item: Item, theta: float, theta_prime: float) -> float:
    """Kullback-Leibler information of ability theta against theta_prime.

    p log(p/p') + (1-p) log((1-p)/(1-p')) with p evaluated at theta and
    p' at theta_prime; nonnegative, zero iff the two probabilities agree.
    """
    z = item.a * (theta - item.b)
    zp = item.a * (theta_prime - item.b)
    return float(_kl_kernel(z, zp, item.c))


def _kl_kernel(z, z_prime, c):
    lp, l1 = _log_p(z, c), _log_1mp(z, c)
    lpp, l1p = _log_p(z_prime, c), _log_1mp(z_prime, c)
    p = np.exp(lp)
    return np.maximum(p * (lp - lpp) + (1.0 - p) * (l1 - l1p), 0.0)


def natural_param(item: Item, theta: float) -> float:
    """Natural parameter log(p / (1-p)) of the per-item Bernoulli family."""
    z = item.a * (theta - item.b)
    return float(_log_p(z, item.c) - _log_1mp(z, item.c))


def psi(tau: float) -> float:
    """Cumulant function log(e^tau + 1); psi(natural_param) = -log(1-p)."""
    return float(np.logaddexp(0.0, tau))


def _response_arrays(pool: ItemPool, responses: Sequence[ResponseRecord]):
    a = np.empty(len(responses))
    b = np.empty(len(responses))
    c = np.empty(len(responses))
    u = np.empty(len(responses), dtype=bool)
    for i, rec in enumerate(responses):
        it = pool[rec.item_id]
        a[i], b[i], c[i], u[i] = it.a, it.b, it.c, bool(rec.u)
    return a, b, c, u


def log_likelihood(pool: ItemPool, responses: Sequence[ResponseRecord], theta: float) -> float:
    """Joint log likelihood of the responses at ability theta; <= 0."""
    if not responses:
        return 0.0
    a, b, c, u = _response_arrays(pool, responses)
    z = a * (theta - b)
    return float(np.where(u, _log_p(z, c), _log_1mp(z, c)).sum())


def llr(pool: ItemPool, responses: Sequence[ResponseRecord], theta_low: float, theta_high: float) -> float:
    """Log likelihood ratio of the low ability against the high ability."""
    return log_likelihood(pool, responses, theta_low) - log_likelihood(pool, responses, theta_high)


def loglik_rows(a, b, c, u, theta):
    """Row-wise log likelihood for (R, k) response blocks at per-row theta.

    Hot path shared by the MLE refinement and the simulation engine: one
    exp and one log per element, via p = (c + e^z)/(1 + e^z) and
    1 - p = (1 - c)/(1 + e^z). Exponents are clipped at +-45 only when an
    item could actually reach that range, so typical pools skip the pass.
    """
    z = a * (theta[:, None] - b)
    if float(np.max(np.abs(z), initial=0.0)) > 44.0:
        np.clip(z, -45.0, 45.0, out=z)
    ez = np.exp(z)
    val = np.where(u, c + ez, 1.0 - c)
    val /= 1.0 + ez
    return np.log(val).sum(axis=1)


def golden_refine(a, b, c, u, lo, hi, tol: float = MLE_TOL):
    """Vectorized golden-section maximization of the row log likelihood.

    lo/hi are per-row brackets. All rows run the same fixed iteration count
    so results do not depend on batch composition.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    span = float(np.max(hi - lo))
    if span <= tol:
        return (lo + hi) / 2.0
    n_iter = max(1, int(math.ceil(math.log(tol / span) / math.log(_INVPHI))))

    shape = np.broadcast_shapes(a.shape, u.shape)
    work = np.empty(shape)
    denom = np.empty(shape)
    one_minus_c = 1.0 - np.asarray(c, dtype=float)
    not_u = ~u
    z_max = float(np.max(np.abs(a) * (np.maximum(np.abs(lo), np.abs(hi))[:, None] + np.abs(b))))

    def ll(theta):
        np.subtract(theta[:, None], b, out=work)
        np.multiply(work, a, out=work)
        if z_max > 44.0:
            np.clip(work, -45.0, 45.0, out=work)
        np.exp(work, out=work)
        np.add(work, 1.0, out=denom)
        np.add(work, c, out=work)
        np.copyto(work, one_minus_c, where=not_u)
        np.divide(work, denom, out=work)
        np.log(work, out=work)
        return work.sum(axis=1)

    x1 = lo + _INVPHI2 * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = ll(x1)
    f2 = ll(x2)
    for _ in range(n_iter):
        left = f1 >= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x1_new = np.where(left, lo + _INVPHI2 * (hi - lo), x2)
        x2_new = np.where(left, x1, lo + _INVPHI * (hi - lo))
        x_eval = np.where(left, x1_new, x2_new)
        f_eval = ll(x_eval)
        f1, f2 = np.where(left, f_eval, f2), np.where(left, f1, f_eval)
        x1, x2 = x1_new, x2_new
    return (lo + hi) / 2.0


def clamp_grid(clamp: tuple[float, float], step: float = MLE_GRID_STEP) -> np.ndarray:
    lo, hi = clamp
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"clamp interval must be finite with lo < hi, got {clamp}")
    n = max(1, int(math.ceil((hi - lo) / step - 1e-12)))
    return np.linspace(lo, hi, n + 1)


def mle(pool: ItemPool, responses: Sequence[ResponseRecord],
        clamp: tuple[float, float] = DEFAULT_CLAMP) -> MleResult:
    """Maximum likelihood ability estimate over the clamp interval.

    All-correct and all-incorrect transcripts have a monotone likelihood and
    are reported as divergent with theta_hat pinned at the clamp bound.
    Mixed transcripts are located by a grid scan (the 3-PL log likelihood
    need not be concave) followed by golden-section refinement to 1e-6.
    """
    if not responses:
        raise ValueError("at least one response is required to estimate ability")
    lo, hi = clamp
    a, b, c, u = _response_arrays(pool, responses)
    n_correct = int(u.sum())
    if n_correct == len(responses):
        return MleResult(MleStatus.DIVERGES_UP, hi)
    if n_correct == 0:
        return MleResult(MleStatus.DIVERGES_DOWN, lo)
    grid = clamp_grid(clamp)
    z = a[:, None] * (grid[None, :] - b[:, None])
    ll_grid = np.where(u[:, None], _log_p(z, c[:, None]), _log_1mp(z, c[:, None])).sum(axis=0)
    g = int(np.argmax(ll_grid))
    w_lo = max(lo, grid[g] - MLE_GRID_STEP)
    w_hi = min(hi, grid[g] + MLE_GRID_STEP)
    theta = golden_refine(a[None, :], b[None, :], c[None, :], u[None, :],
                          np.array([w_lo]), np.array([w_hi]))
    return MleResult(MleStatus.EXISTS, float(theta[0]))


def glr_stat(pool: ItemPool, responses: Sequence[ResponseRecord],
             theta_hat: float, theta_ref: float) -> float:
    """Generalized likelihood ratio log L(theta_hat) - log L(theta_ref).

    Nonnegative whenever theta_ref lies inside the clamp interval the
    estimate was maximized over; floored at zero against round-off.
    """
    value = log_likelihood(pool, responses, theta_hat) - log_likelihood(pool, responses, theta_ref)
    return max(value, 0.0)


def signed_root(k: int, glr: float, theta_hat: float, theta_ref: float) -> float:
    """Signed-root statistic sign(theta_hat - theta_ref) sqrt(2 k glr).

    Approximately N(0, k) when theta_ref is the true ability.
    """
    if glr < 0.0:
        raise ValueError(f"glr must be nonnegative, got {glr}")
    if theta_hat == theta_ref:
        return 0.0
    return math.copysign(math.sqrt(2.0 * k * glr), theta_hat - theta_ref)
