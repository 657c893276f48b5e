"""Accuracy simulations on streams of distinct elements.

A stream of ``n`` distinct elements stands in for the neighborhoods of a
single node: the sketch state after ``c`` elements is the MinHash sketch of
the ``c`` closest nodes. Each run hashes the elements with its own seed;
errors at every grid cardinality are aggregated in run order, so results
do not depend on how runs are scheduled.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distinct import HllHipCounter, hll_baseline_estimate
from .estimate import PermutationEstimator
from .rank import (
    InvalidParameter,
    base_b_exponent_array,
    bucket_array,
    derive_seed,
    rank_array,
)

ESTIMATORS = (
    "bottomk-basic",
    "kmins-basic",
    "kpartition-basic",
    "bottomk-hip",
    "permutation",
    "hll",
    "hll-hip",
)
REFERENCES = ("ref-basic", "ref-hip")


def cardinality_grid(n: int, ratio: float = 1.2, extra: tuple[int, ...] = ()) -> list[int]:
    """Powers of ``ratio`` rounded to integers and deduplicated, up to ``n`` (always included)."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    pts = {n, *(int(e) for e in extra if 1 <= e <= n)}
    x = 1.0
    while round(x) <= n:
        pts.add(int(round(x)))
        x *= ratio
    return sorted(pts)


@dataclass
class SimConfig:
    n: int = 10_000
    k: int = 10
    runs: int = 500
    seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    base: float | None = None  # discretization for bottomk-hip
    hll_base_exp: int = 1
    extra_points: tuple[int, ...] = ()
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise InvalidParameter("runs must be >= 1")
        if self.k < 1 or self.n < 1:
            raise InvalidParameter("n and k must be >= 1")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise InvalidParameter(f"unknown estimators: {sorted(unknown)}")
        if "kmins-basic" in self.estimators and self.k < 2:
            raise InvalidParameter("kmins-basic needs k >= 2")

    @property
    def grid(self) -> list[int]:
        return cardinality_grid(self.n, extra=self.extra_points)


@dataclass
class SimRow:
    cardinality: int
    estimator: str
    nrmse: float
    mre: float
    runs: int


@dataclass
class SimResult:
    config: SimConfig
    rows: list[SimRow] = field(default_factory=list)
    estimates: dict[str, np.ndarray] = field(default_factory=dict, repr=False)  # runs x grid

    def row(self, estimator: str, cardinality: int) -> SimRow:
        for r in self.rows:
            if r.estimator == estimator and r.cardinality == cardinality:
                return r
        raise KeyError((estimator, cardinality))

    def nrmse(self, estimator: str, cardinality: int) -> float:
        return self.row(estimator, cardinality).nrmse


def bottomk_trace(values: np.ndarray, k: int):
    """Positions where a bottom-k sketch over ``values`` changes.

    Returns ``(positions, thresholds)``; ``thresholds[i]`` is the k-th
    smallest value before update ``i`` (1.0 while fewer than k). An element
    enters iff its value is strictly below that threshold.
    """
    kept: list[float] = []
    positions, thresholds = [], []
    start, step = 0, max(4 * k, 64)
    while start < len(values):
        stop = min(len(values), start + step)
        thr = -kept[0] if len(kept) >= k else 1.0
        for i in np.flatnonzero(values[start:stop] < thr) + start:
            thr = -kept[0] if len(kept) >= k else 1.0
            v = float(values[i])
            if v < thr:
                positions.append(int(i))
                thresholds.append(thr)
                heapq.heappush(kept, -v)
                if len(kept) > k:
                    heapq.heappop(kept)
        start, step = stop, step * 2
    return np.asarray(positions, dtype=np.int64), np.asarray(thresholds)


def _at_grid(positions: np.ndarray, per_update: np.ndarray, grid: np.ndarray, before_any: float = 0.0):
    """Value of a per-update running quantity after the first ``c`` elements."""
    idx = np.searchsorted(positions, grid, side="left") - 1
    out = np.where(idx >= 0, per_update[np.maximum(idx, 0)], before_any)
    return out


def _kth_smallest_at(values: np.ndarray, positions: np.ndarray, k: int, grid: np.ndarray):
    """k-th smallest value among the first ``c`` elements (nan when c < k)."""
    out = np.full(len(grid), np.nan)
    kept: list[float] = []
    j = 0
    for gi, c in enumerate(grid):
        while j < len(positions) and positions[j] < c:
            heapq.heappush(kept, -float(values[positions[j]]))
            if len(kept) > k:
                heapq.heappop(kept)
            j += 1
        if len(kept) >= k:
            out[gi] = -kept[0]
    return out


def _prefix_minima(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.minimum.accumulate(values)[grid - 1]


def simulate_run(cfg: SimConfig, run: int) -> dict[str, np.ndarray]:
    """Estimates of every requested estimator at every grid cardinality."""
    n, k = cfg.n, cfg.k
    grid = np.asarray(cfg.grid, dtype=np.int64)
    seed = derive_seed(cfg.seed, run)
    elements = np.arange(n, dtype=np.uint64)
    r = rank_array(elements, seed)
    est: dict[str, np.ndarray] = {}
    want = set(cfg.estimators)

    if want & {"bottomk-basic", "bottomk-hip", "permutation"}:
        pos, thr = bottomk_trace(r, k)
    if "bottomk-basic" in want:
        kth = _kth_smallest_at(r, pos, k, grid)
        est["bottomk-basic"] = np.where(grid < k, grid.astype(np.float64), (k - 1) / kth)
    if "bottomk-hip" in want:
        if cfg.base is None:
            hp, ht = pos, thr
        else:
            rv = cfg.base ** -base_b_exponent_array(r, cfg.base).astype(np.float64)
            hp, ht = bottomk_trace(rv, k)
        est["bottomk-hip"] = _at_grid(hp, np.cumsum(1.0 / ht), grid)
    if "permutation" in want:
        perm = np.empty(n, dtype=np.int64)
        perm[np.lexsort((elements, r))] = np.arange(1, n + 1)
        pe = PermutationEstimator(n, k)
        running = np.array([pe.update(int(perm[i])) for i in pos])
        est["permutation"] = _at_grid(pos, running, grid)
    if "kmins-basic" in want:
        total = np.zeros(len(grid))
        for h in range(k):
            rh = r if h == 0 else rank_array(elements, derive_seed(seed, h))
            total += -np.log1p(-_prefix_minima(rh, grid))
        est["kmins-basic"] = (k - 1) / total
    if "kpartition-basic" in want:
        buckets = bucket_array(elements, k, seed)
        total = np.zeros(len(grid))
        filled = np.zeros(len(grid))
        for h in range(k):
            mask = buckets == h
            idx = np.flatnonzero(mask)
            if idx.size == 0:
                continue
            upto = np.searchsorted(idx, grid, side="left")  # bucket members among first c
            mins = np.minimum.accumulate(r[idx])
            has = upto > 0
            total += np.where(has, -np.log1p(-mins[np.maximum(upto - 1, 0)]), 0.0)
            filled += has
        with np.errstate(divide="ignore", invalid="ignore"):
            kp = np.where(filled > 1, filled * (filled - 1) / total, filled)
        est["kpartition-basic"] = kp
    if want & {"hll", "hll-hip"}:
        counter = HllHipCounter(k, seed=seed, base_exp=cfg.hll_base_exp)
        hip, base_est = np.empty(len(grid)), np.empty(len(grid))
        prev = 0
        for gi, c in enumerate(grid):
            counter.offer_many(elements[prev:c])
            prev = c
            hip[gi] = counter.estimate()
            if "hll" in want:
                base_est[gi] = hll_baseline_estimate(counter.registers)[1]
        if "hll-hip" in want:
            est["hll-hip"] = hip
        if "hll" in want:
            if cfg.hll_base_exp != 1:
                raise InvalidParameter("the HyperLogLog baseline needs base 2 registers")
            est["hll"] = base_est
    return {name: est[name] for name in cfg.estimators}


def _run_chunk(args):
    cfg, runs = args
    return [simulate_run(cfg, i) for i in runs]


def reference_curves(k: int) -> dict[str, tuple[float, float]]:
    """Asymptotic (NRMSE, MRE) of the basic and HIP estimators."""
    out = {}
    if k > 2:
        out["ref-basic"] = (1 / math.sqrt(k - 2), math.sqrt(2 / (math.pi * (k - 2))))
    if k > 1:
        out["ref-hip"] = (1 / math.sqrt(2 * (k - 1)), math.sqrt(1 / (math.pi * (k - 1))))
    return out


def simulate(cfg: SimConfig) -> SimResult:
    grid = np.asarray(cfg.grid, dtype=np.float64)
    if cfg.workers > 1:
        chunks = [(cfg, range(i, cfg.runs, cfg.workers)) for i in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))
        per_run = [None] * cfg.runs
        for w, part in enumerate(parts):
            for j, res in enumerate(part):
                per_run[w + j * cfg.workers] = res
    else:
        per_run = [simulate_run(cfg, i) for i in range(cfg.runs)]
    result = SimResult(cfg)
    for name in cfg.estimators:
        m = np.vstack([p[name] for p in per_run])
        result.estimates[name] = m
        err = m - grid
        nrmse = np.sqrt(np.mean(err**2, axis=0)) / grid
        mre = np.mean(np.abs(err), axis=0) / grid
        for c, a, b in zip(cfg.grid, nrmse, mre):
            result.rows.append(SimRow(int(c), name, float(a), float(b), cfg.runs))
    for name, (a, b) in reference_curves(cfg.k).items():
        for c in cfg.grid:
            result.rows.append(SimRow(int(c), name, a, b, cfg.runs))
    result.rows.sort(key=lambda row: (row.cardinality, (ESTIMATORS + REFERENCES).index(row.estimator)))
    return result
