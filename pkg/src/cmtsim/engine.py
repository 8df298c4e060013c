"""Simulated test administration and operating characteristics.

A batch recorder administers every replication to the full maximum length
while recording per-stage estimates and likelihood statistics; stopping
rules are then replayed over the records. Item selection and response
draws never depend on the thresholds, so one recorded batch serves every
rule and every candidate threshold with common random numbers: the first M
stages of a truncated transcript coincide with the recorded ones.

Each replication draws from its own stream derived from (master seed,
replication index), so results are independent of how replications are
split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .irt import (
    DEFAULT_CLAMP,
    MLE_GRID_STEP,
    ItemPool,
    MleResult,
    MleStatus,
    _sigmoid,
    clamp_grid,
    golden_refine,
    loglik_rows,
)
from .selection import (
    ContentConstraints,
    SelectionRule,
    _fisher_kernel,
    _kl_kernel,
    content_quotas,
    prune_pick,
    prune_plan,
)
from .stopping import Decision, Hypotheses, Thresholds


class RuleKind(Enum):
    FIXED = "fixed"
    SPRT = "sprt"
    TSPRT = "tsprt"
    MOD_TSPRT = "modtsprt"
    MOD_HP = "modhp"


#: rule kinds whose early stopping scans the simple likelihood ratio
_SPRT_FAMILY = (RuleKind.SPRT, RuleKind.TSPRT, RuleKind.MOD_TSPRT)


@dataclass(frozen=True)
class TestConfig:
    """Everything needed to administer one test variant."""

    __test__ = False   # not a pytest collectable despite the name

    kind: RuleKind
    hypotheses: Hypotheses
    thresholds: Thresholds
    selection: SelectionRule = SelectionRule.MAX_FISHER_AT_MLE
    constraints: ContentConstraints | None = None
    clamp: tuple[float, float] = DEFAULT_CLAMP
    kl_offset: float | None = None
    fixed_llr_reference: str = "theta_minus"
    name: str | None = None

    def __post_init__(self) -> None:
        t = self.thresholds
        if self.kind in _SPRT_FAMILY or self.kind is RuleKind.MOD_HP:
            if t.reject_bound is None or t.accept_bound is None:
                raise ValueError(f"{self.kind.value} needs both reject_bound and accept_bound")
            if t.reject_bound <= 0.0 or t.accept_bound <= 0.0:
                raise ValueError(f"{self.kind.value} boundaries must be positive")
        if self.kind is RuleKind.MOD_HP and self.hypotheses.theta_implied is None:
            raise ValueError("modhp needs hypotheses.theta_implied (run calibration first)")
        if self.kind is RuleKind.FIXED:
            if self.fixed_llr_reference not in ("theta_minus", "theta_implied"):
                raise ValueError(f"unknown fixed_llr_reference {self.fixed_llr_reference!r}")
            if self.fixed_llr_reference == "theta_implied" and self.hypotheses.theta_implied is None:
                raise ValueError("fixed rule referencing theta_implied needs hypotheses.theta_implied")

    @property
    def label(self) -> str:
        return self.name if self.name else self.kind.value

    def batch_key(self):
        """Configs with equal keys share transcripts (selection path does
        not depend on the stopping thresholds)."""
        return (self.selection, self.constraints, self.clamp, self.kl_offset,
                self.hypotheses, self.thresholds.max_length)


def rep_stream(master_seed: int, rep: int) -> np.random.SeedSequence:
    """Stream for one replication; stateless in (master seed, index)."""
    return np.random.SeedSequence((int(master_seed), int(rep)))


def _item_logliks(a, b, c, theta):
    """Per-item (log p, log(1-p)) at theta; theta may broadcast to a grid."""
    z = np.clip(a * (theta - b), -45.0, 45.0)
    ez = np.exp(z)
    lse = np.log1p(ez)
    return np.log(c + ez) - lse, np.log1p(-c) - lse


@dataclass
class BatchRecord:
    """Full-length transcripts for a batch of replications.

    items holds positions into the id-sorted parameter arrays; stage
    statistics are indexed [replication, stage].
    """

    ids: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    cat: np.ndarray
    items: np.ndarray        # (R, N) int32 positions
    responses: np.ndarray    # (R, N) bool
    theta_hat: np.ndarray    # (R, N)
    status: np.ndarray       # (R, N) int8: 0 exists, +1 up, -1 down
    ll_hat: np.ndarray       # (R, N) log likelihood at the estimate
    theta_true: float
    clamp: tuple[float, float]

    @property
    def n_reps(self) -> int:
        return self.items.shape[0]

    @property
    def n_stages(self) -> int:
        return self.items.shape[1]

    def stage_loglik(self, theta: float) -> np.ndarray:
        """Cumulative log likelihood at a fixed ability, stage by stage."""
        lp, l1 = _item_logliks(self.a, self.b, self.c, theta)
        vals = np.where(self.responses, lp[self.items], l1[self.items])
        return np.cumsum(vals, axis=1)

    def glr_vs(self, theta: float) -> np.ndarray:
        """Stage-wise GLR statistic against a reference ability, floored at 0."""
        return np.maximum(self.ll_hat - self.stage_loglik(theta), 0.0)

    def llr_stages(self, theta_low: float, theta_high: float) -> np.ndarray:
        return self.stage_loglik(theta_low) - self.stage_loglik(theta_high)

    def category_counts(self, n_categories: int, lengths: np.ndarray | None = None) -> np.ndarray:
        """Per-replication category tallies over the first `lengths` items."""
        counts = np.zeros((self.n_reps, n_categories), dtype=np.int64)
        cats = self.cat[self.items]
        for k in range(self.n_stages):
            active = np.ones(self.n_reps, dtype=bool) if lengths is None else (k < lengths)
            np.add.at(counts, (np.flatnonzero(active), cats[active, k]), 1)
        return counts


def simulate_batch(pool: ItemPool, hyps: Hypotheses, theta_true: float, n_stages: int,
                   streams: Sequence[np.random.SeedSequence],
                   selection: SelectionRule = SelectionRule.MAX_FISHER_AT_MLE,
                   constraints: ContentConstraints | None = None,
                   clamp: tuple[float, float] = DEFAULT_CLAMP,
                   kl_offset: float | None = None) -> BatchRecord:
    """Administer every replication to the full length, recording stages."""
    ids, a, b, c, cat = pool.parameter_arrays()
    n_items = ids.size
    n_reps = len(streams)
    if constraints is None and n_items < n_stages:
        raise ValueError(f"pool of {n_items} items cannot support {n_stages}-item tests")

    grid = clamp_grid(clamp)
    clamp_lo, clamp_hi = clamp
    logp_tab, log1mp_tab = _item_logliks(a[:, None], b[:, None], c[:, None], grid[None, :])
    # stacked so one gather pulls the right-or-wrong row per response
    loglik_tab = np.concatenate([log1mp_tab, logp_tab], axis=0)
    p_true = c + (1.0 - c) * _sigmoid(a * (theta_true - b))

    uniforms = np.empty((n_reps, n_stages))
    cand = None
    plan = None
    if constraints is not None:
        cand = np.empty((n_reps, n_stages), dtype=np.int64)
        plan = prune_plan(a, b, c, cat, n_stages, constraints, hyps.theta_cut)
    for r, ss in enumerate(streams):
        prune_ss, resp_ss = ss.spawn(2)
        uniforms[r] = np.random.default_rng(resp_ss).random(n_stages)
        if constraints is not None:
            cand[r] = prune_pick(plan, np.random.default_rng(prune_ss))

    if constraints is not None:
        sel_a, sel_b, sel_c = a[cand], b[cand], c[cand]
        sel_cat = cat[cand]
        quotas = np.array(content_quotas(n_stages, constraints.proportions))
        unused_per_cat = np.tile(quotas, (n_reps, 1))
        cat_counts = np.zeros((n_reps, constraints.category_count), dtype=np.int64)
        q = np.asarray(constraints.proportions)
    else:
        sel_a, sel_b, sel_c = a[None, :], b[None, :], c[None, :]

    n_slots = n_stages if constraints is not None else n_items
    used = np.zeros((n_reps, n_slots), dtype=bool)
    rows = np.arange(n_reps)

    items = np.empty((n_reps, n_stages), dtype=np.int32)
    responses = np.empty((n_reps, n_stages), dtype=bool)
    theta_hat = np.empty((n_reps, n_stages))
    status = np.empty((n_reps, n_stages), dtype=np.int8)
    ll_hat = np.empty((n_reps, n_stages))
    adm_a = np.empty((n_reps, n_stages))
    adm_b = np.empty((n_reps, n_stages))
    adm_c = np.empty((n_reps, n_stages))

    cut_index = None
    if selection is SelectionRule.MAX_FISHER_AT_CUT:
        base = _fisher_kernel(a, b, c, hyps.theta_cut)
        cut_index = base[cand] if constraints is not None else np.broadcast_to(base, (n_reps, n_items))

    # selection workspace, reused every stage to avoid large reallocations
    index = np.empty((n_reps, n_slots))
    work1 = np.empty((n_reps, n_slots))
    work2 = np.empty((n_reps, n_slots))
    fisher_scale = sel_a * sel_a * (1.0 - sel_c)
    z_bound = float(np.max(np.abs(sel_a) * (np.maximum(abs(clamp_lo), abs(clamp_hi))
                                            + np.abs(sel_b))))

    def fisher_index_at(point):
        """In-place Fisher information of every selectable item at the
        per-replication point; same formula as irt.fisher_info."""
        np.subtract(point[:, None], sel_b, out=index)
        np.multiply(index, sel_a, out=index)
        if z_bound > 44.0:
            np.clip(index, -45.0, 45.0, out=index)
        np.exp(index, out=index)                 # e^z
        np.add(index, 1.0, out=work1)
        np.multiply(work1, work1, out=work1)     # (1 + e^z)^2
        np.add(index, sel_c, out=work2)
        np.multiply(work1, work2, out=work1)     # (c + e^z)(1 + e^z)^2
        np.multiply(index, index, out=index)     # e^{2z}
        np.multiply(index, fisher_scale, out=index)
        np.divide(index, work1, out=index)

    cur_theta = np.full(n_reps, hyps.theta_cut)
    cur_exists = np.zeros(n_reps, dtype=bool)
    cum_correct = np.zeros(n_reps, dtype=np.int64)
    ll_grid = np.zeros((n_reps, grid.size))
    gather_buf = np.empty((n_reps, grid.size))

    for k in range(n_stages):
        if cut_index is not None:
            np.copyto(index, cut_index)
        else:
            point = np.where(cur_exists, cur_theta, hyps.theta_cut)
            if selection is SelectionRule.MAX_KL_AT_ESTIMATE:
                d = kl_offset if kl_offset is not None else (hyps.theta_plus - hyps.theta_minus) / 2.0
                toward_plus = (hyps.theta_plus - point) <= (point - hyps.theta_minus)
                ref = np.where(toward_plus, point + d, point - d)
                index[:] = _kl_kernel(sel_a * (point[:, None] - sel_b),
                                      sel_a * (ref[:, None] - sel_b), sel_c)
            else:
                fisher_index_at(point)
        np.copyto(index, -np.inf, where=used)
        if constraints is not None:
            shares = cat_counts / k if k > 0 else np.zeros_like(cat_counts, dtype=float)
            deficits = np.where(unused_per_cat > 0, q[None, :] - shares, -np.inf)
            spiral = np.argmax(deficits, axis=1)
            np.copyto(index, -np.inf, where=sel_cat != spiral[:, None])
        slot = np.argmax(index, axis=1)
        used[rows, slot] = True
        pos = cand[rows, slot] if constraints is not None else slot
        if constraints is not None:
            picked_cat = sel_cat[rows, slot]
            unused_per_cat[rows, picked_cat] -= 1
            cat_counts[rows, picked_cat] += 1

        items[:, k] = pos
        adm_a[:, k], adm_b[:, k], adm_c[:, k] = a[pos], b[pos], c[pos]
        u = uniforms[:, k] < p_true[pos]
        responses[:, k] = u
        cum_correct += u
        np.take(loglik_tab, pos + u * n_items, axis=0, out=gather_buf)
        ll_grid += gather_buf

        g = np.argmax(ll_grid, axis=1)
        w_lo = np.maximum(grid[g] - MLE_GRID_STEP, clamp_lo)
        w_hi = np.minimum(grid[g] + MLE_GRID_STEP, clamp_hi)
        th = golden_refine(adm_a[:, :k + 1], adm_b[:, :k + 1], adm_c[:, :k + 1],
                           responses[:, :k + 1], w_lo, w_hi)
        up = cum_correct == k + 1
        down = cum_correct == 0
        th = np.where(up, clamp_hi, np.where(down, clamp_lo, th))
        theta_hat[:, k] = th
        status[:, k] = np.where(up, 1, np.where(down, -1, 0)).astype(np.int8)
        ll_hat[:, k] = loglik_rows(adm_a[:, :k + 1], adm_b[:, :k + 1], adm_c[:, :k + 1],
                                   responses[:, :k + 1], th)
        cur_theta = th
        cur_exists = ~(up | down)

    return BatchRecord(ids, a, b, c, cat, items, responses, theta_hat, status, ll_hat,
                       theta_true, clamp)


def _record_chunk(args):
    (pool, hyps, theta_true, n_stages, master_seed, lo, hi,
     selection, constraints, clamp, kl_offset) = args
    streams = [rep_stream(master_seed, r) for r in range(lo, hi)]
    rec = simulate_batch(pool, hyps, theta_true, n_stages, streams, selection=selection,
                         constraints=constraints, clamp=clamp, kl_offset=kl_offset)
    return rec.items, rec.responses, rec.theta_hat, rec.status, rec.ll_hat


def simulate_records(pool: ItemPool, hyps: Hypotheses, theta_true: float, n_stages: int,
                     master_seed: int, replications: int,
                     selection: SelectionRule = SelectionRule.MAX_FISHER_AT_MLE,
                     constraints: ContentConstraints | None = None,
                     clamp: tuple[float, float] = DEFAULT_CLAMP,
                     kl_offset: float | None = None, workers: int = 1) -> BatchRecord:
    """Record `replications` transcripts, optionally split across processes.

    Replication r always uses rep_stream(master_seed, r) and chunks are
    reassembled in replication order, so the result is identical for any
    worker count.
    """
    if replications < 1:
        raise ValueError(f"replications must be positive, got {replications}")
    args = (pool, hyps, theta_true, n_stages, master_seed)
    tail = (selection, constraints, clamp, kl_offset)
    if workers <= 1 or replications < 2 * workers:
        streams = [rep_stream(master_seed, r) for r in range(replications)]
        return simulate_batch(pool, hyps, theta_true, n_stages, streams, selection=selection,
                              constraints=constraints, clamp=clamp, kl_offset=kl_offset)
    bounds = np.linspace(0, replications, min(workers, replications) + 1).astype(int)
    tasks = [args + (int(lo), int(hi)) + tail for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=len(tasks)) as ex:
        chunks = list(ex.map(_record_chunk, tasks))
    ids, a, b, c, cat = pool.parameter_arrays()
    items, responses, theta_hat, status, ll_hat = (
        np.concatenate([ch[i] for ch in chunks], axis=0) for i in range(5))
    return BatchRecord(ids, a, b, c, cat, items, responses, theta_hat, status, ll_hat,
                       theta_true, clamp)


def _first_true(mask: np.ndarray) -> np.ndarray:
    """Column index of the first True per row; number of columns when none."""
    hit = mask.any(axis=1)
    return np.where(hit, np.argmax(mask, axis=1), mask.shape[1])


def apply_rule(record: BatchRecord, config: TestConfig) -> tuple[np.ndarray, np.ndarray]:
    """Replay a stopping rule over recorded transcripts.

    Returns (lengths, reject) with reject True for a non-master
    classification. Never returns a continue: the final stage always
    decides.
    """
    n = record.n_stages
    hyps = config.hypotheses
    t = config.thresholds
    if t.max_length != n:
        raise ValueError(f"thresholds expect max_length {t.max_length} but record has {n} stages")

    if config.kind is RuleKind.FIXED:
        ref_low = hyps.theta_minus if config.fixed_llr_reference == "theta_minus" else hyps.theta_implied
        llr_end = record.llr_stages(ref_low, hyps.theta_plus)[:, -1]
        lengths = np.full(record.n_reps, n, dtype=np.int64)
        return lengths, llr_end >= t.terminal_cutoff

    if config.kind in _SPRT_FAMILY:
        llr = record.llr_stages(hyps.theta_minus, hyps.theta_plus)
        rej = llr >= t.reject_bound
        acc = llr <= -t.accept_bound
        if n > 1:
            first = _first_true((rej | acc)[:, :n - 1])
        else:
            first = np.zeros(record.n_reps, dtype=np.int64)
        stopped = first < n - 1
        lengths = np.where(stopped, first + 1, n)
        idx = np.minimum(first, max(n - 2, 0))
        early_reject = rej[np.arange(record.n_reps), idx]
        terminal_reject = llr[:, -1] >= t.terminal_cutoff
        return lengths, np.where(stopped, early_reject, terminal_reject)

    # modified Haybittle-Peto
    glr_plus = record.glr_vs(hyps.theta_plus)
    glr_imp = record.glr_vs(hyps.theta_implied)
    th = record.theta_hat
    cond_r = (th < hyps.theta_plus) & (glr_plus >= t.reject_bound)
    cond_s = (th > hyps.theta_implied) & (glr_imp >= t.accept_bound)
    cols = np.arange(n)
    window = (cols >= t.min_stage - 1) & (cols <= n - 2)
    stop = (cond_r | cond_s) & window[None, :]
    if n > 1:
        first = _first_true(stop[:, :n - 1])
    else:
        first = np.zeros(record.n_reps, dtype=np.int64)
    stopped = first < n - 1
    lengths = np.where(stopped, first + 1, n)
    idx = np.minimum(first, max(n - 2, 0))
    # a simultaneous reject/accept at the same stage resolves to accept
    early_reject = cond_r[np.arange(record.n_reps), idx] & ~cond_s[np.arange(record.n_reps), idx]
    terminal_reject = (th[:, -1] < hyps.theta_plus) & (glr_plus[:, -1] >= t.terminal_cutoff)
    return lengths, np.where(stopped, early_reject, terminal_reject)


@dataclass(frozen=True)
class Transcript:
    """One examinee's administered test."""

    item_ids: list[int]
    responses: list[int]
    estimates: list[MleResult]
    stage_decisions: list[Decision]
    final_decision: Decision

    @property
    def length(self) -> int:
        return len(self.item_ids)


_STATUS_MAP = {0: MleStatus.EXISTS, 1: MleStatus.DIVERGES_UP, -1: MleStatus.DIVERGES_DOWN}


def administer_test(pool: ItemPool, config: TestConfig, theta_true: float, stream) -> Transcript:
    """Administer one simulated test; deterministic given the stream.

    The stream may be an integer seed or a numpy SeedSequence; use
    rep_stream(master_seed, r) to reproduce replication r of a batch.
    """
    ss = stream if isinstance(stream, np.random.SeedSequence) else np.random.SeedSequence(stream)
    record = simulate_batch(pool, config.hypotheses, theta_true, config.thresholds.max_length,
                            [ss], selection=config.selection, constraints=config.constraints,
                            clamp=config.clamp, kl_offset=config.kl_offset)
    lengths, rejects = apply_rule(record, config)
    m = int(lengths[0])
    final = Decision.REJECT_H0 if bool(rejects[0]) else Decision.ACCEPT_H0
    estimates = [MleResult(_STATUS_MAP[int(record.status[0, k])], float(record.theta_hat[0, k]))
                 for k in range(m)]
    return Transcript(
        item_ids=[int(record.ids[p]) for p in record.items[0, :m]],
        responses=[int(v) for v in record.responses[0, :m]],
        estimates=estimates,
        stage_decisions=[Decision.CONTINUE] * (m - 1) + [final],
        final_decision=final,
    )


@dataclass(frozen=True)
class OCRow:
    theta: float
    avg_length: float
    se_length: float
    power: float
    se_power: float
    reps: int


@dataclass(frozen=True)
class OperatingCharacteristics:
    """Average length and power (fraction classified non-master) per ability."""

    rule: str
    rows: list[OCRow]


@dataclass(frozen=True)
class ComparisonReport:
    theta_grid: list[float]
    results: list[OperatingCharacteristics]
    hypotheses: Hypotheses

    def to_csv_text(self) -> str:
        lines = ["theta,avg_length,se_length,power,se_power,reps,rule"]
        for i, theta in enumerate(self.theta_grid):
            for oc in self.results:
                r = oc.rows[i]
                lines.append(f"{theta!r},{r.avg_length!r},{r.se_length!r},"
                             f"{r.power!r},{r.se_power!r},{r.reps},{oc.rule}")
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        """Grid of `avg_length (power%)` cells, one row per ability value;
        the row at theta_plus is starred."""
        names = [oc.rule for oc in self.results]
        widths = [max(len(n), 15) for n in names]
        head = "theta     | " + " | ".join(n.rjust(w) for n, w in zip(names, widths))
        lines = [head, "-" * len(head)]
        for i, theta in enumerate(self.theta_grid):
            flag = "*" if abs(theta - self.hypotheses.theta_plus) < 1e-12 else " "
            cells = []
            for oc, w in zip(self.results, widths):
                r = oc.rows[i]
                cells.append(f"{r.avg_length:.1f} ({100 * r.power:.2f}%)".rjust(w))
            lines.append(f"{theta:8.3f}{flag} | " + " | ".join(cells))
        return "\n".join(lines)


def default_theta_grid(hyps: Hypotheses) -> list[float]:
    """Eleven ability values: the study grid when the hypotheses match the
    published design, otherwise evenly spaced around the cut point."""
    study = (abs(hyps.theta_cut + 1.32) < 1e-9 and abs(hyps.theta_minus + 1.57) < 1e-9
             and abs(hyps.theta_plus + 1.07) < 1e-9 and hyps.theta_implied is not None)
    if study:
        vals = {-2.0, -1.75, -1.5, -1.25, -1.0, -0.75, -0.5,
                hyps.theta_cut, hyps.theta_minus, hyps.theta_plus, hyps.theta_implied}
        return sorted(vals)
    return [float(x) for x in np.linspace(hyps.theta_cut - 0.75, hyps.theta_cut + 0.75, 11)]


def _summarize(theta: float, lengths: np.ndarray, rejects: np.ndarray) -> OCRow:
    n = lengths.size
    power = float(rejects.mean())
    se_len = float(lengths.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return OCRow(theta=float(theta), avg_length=float(lengths.mean()), se_length=se_len,
                 power=power, se_power=math.sqrt(power * (1.0 - power) / n), reps=n)


def _point_task(args):
    (pool, hyps, theta, n_stages, selection, constraints, clamp, kl_offset,
     configs, master_seed, replications) = args
    record = simulate_records(pool, hyps, theta, n_stages, master_seed, replications,
                              selection=selection, constraints=constraints,
                              clamp=clamp, kl_offset=kl_offset)
    return [apply_rule(record, cfg) for cfg in configs]


def compare_tests(pool: ItemPool, configs: Sequence[TestConfig],
                  theta_grid: Sequence[float] | None = None,
                  replications: int = 10_000, master_seed: int = 0,
                  workers: int = 1) -> ComparisonReport:
    """Operating characteristics of several rules on shared transcripts.

    Configs must share hypotheses and maximum length. Rules that also share
    a selection path are replayed over identical response streams, so e.g.
    two truncated SPRTs with the same boundaries have identical lengths.
    """
    if not configs:
        raise ValueError("at least one test configuration is required")
    hyps = configs[0].hypotheses
    n_stages = configs[0].thresholds.max_length
    for cfg in configs[1:]:
        if cfg.hypotheses != hyps:
            raise ValueError("all compared tests must share the same hypotheses")
        if cfg.thresholds.max_length != n_stages:
            raise ValueError("all compared tests must share the same maximum length")
    if theta_grid is None:
        theta_grid = default_theta_grid(hyps)
    grid = sorted(float(t) for t in theta_grid)

    groups: dict[tuple, list[int]] = {}
    for i, cfg in enumerate(configs):
        groups.setdefault(cfg.batch_key(), []).append(i)

    tasks = []
    slots: list[tuple[int, int]] = []
    for gi, (key, members) in enumerate(groups.items()):
        rep_cfg = configs[members[0]]
        for ti, theta in enumerate(grid):
            tasks.append((pool, hyps, theta, n_stages, rep_cfg.selection, rep_cfg.constraints,
                          rep_cfg.clamp, rep_cfg.kl_offset, [configs[m] for m in members],
                          master_seed, replications))
            slots.append((gi, ti))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
            outcomes = list(ex.map(_point_task, tasks))
    else:
        outcomes = [_point_task(t) for t in tasks]

    rows: dict[int, list[OCRow | None]] = {i: [None] * len(grid) for i in range(len(configs))}
    for (gi, ti), per_config in zip(slots, outcomes):
        members = list(groups.values())[gi]
        for m, (lengths, rejects) in zip(members, per_config):
            rows[m][ti] = _summarize(grid[ti], lengths, rejects)
    results = [OperatingCharacteristics(rule=cfg.label, rows=rows[i])
               for i, cfg in enumerate(configs)]
    return ComparisonReport(theta_grid=grid, results=results, hypotheses=hyps)


def operating_characteristics(pool: ItemPool, config: TestConfig,
                              theta_grid: Sequence[float] | None = None,
                              replications: int = 10_000, master_seed: int = 0,
                              workers: int = 1) -> OperatingCharacteristics:
    """Length and power of one rule over an ability grid."""
    report = compare_tests(pool, [config], theta_grid, replications, master_seed, workers)
    return report.results[0]


def write_report_csv(report: ComparisonReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(report.to_csv_text())
