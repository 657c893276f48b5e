"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line with the measured numbers; the
lines are printed at the end of the pytest run (see conftest.py) and also
when this file is executed directly.
"""

from __future__ import annotations

import functools
import io
import math
import os
import random
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hipads.ads import Flavor, build_local_updates, build_pruned_dijkstra  # noqa: E402
from hipads.cli import harmonic, main  # noqa: E402
from hipads.counter import MorrisCounter, simulate_adds  # noqa: E402
from hipads.distinct import HllHipCounter, hll_baseline_estimate  # noqa: E402
from hipads.estimate import Kernel, estimate_centrality, hip_weights, size_estimate  # noqa: E402
from hipads.graph import Graph  # noqa: E402
from hipads.rank import RankScheme, derive_seed, rank_array  # noqa: E402
from hipads.sim import SimConfig, simulate  # noqa: E402
from oracles import all_pairs, definitional_ads, exact_qg, random_graph  # noqa: E402

RESULTS: list[str] = []


def record(number: int, title: str, checks: list[tuple[str, bool]]) -> bool:
    ok = all(passed for _, passed in checks)
    detail = "; ".join(f"{'ok' if passed else 'FAILED'} {text}" for text, passed in checks)
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}")
    return ok


def within(x: float, target: float, rel: float) -> bool:
    return abs(x - target) <= rel * abs(target)


# -- 1 ------------------------------------------------------------------------


def criterion_1() -> bool:
    rng = random.Random(2024)
    t0 = time.perf_counter()
    graphs = mismatches = 0
    for trial in range(200):
        n = rng.randint(1, 40)
        g = random_graph(rng, n, rng.choice([0.04, 0.08, 0.15]), weighted=trial % 2 == 0, undirected=trial % 4 < 2)
        k = (1, 2, 3, 8)[trial % 4]
        for flavor in Flavor:
            scheme = RankScheme(trial)
            ref = definitional_ads(g, k, flavor, scheme)
            a = [x.entries for x in build_pruned_dijkstra(g, k, flavor, scheme=scheme).sketches]
            b = [x.entries for x in build_local_updates(g, k, flavor, scheme=scheme).sketches]
            mismatches += (a != ref) + (b != ref)
        graphs += 1
    elapsed = time.perf_counter() - t0
    return record(1, "pruned Dijkstra = local updates = brute force", [
        (f"{graphs} graphs x 3 flavors, {mismatches} mismatches", mismatches == 0),
        (f"runtime {elapsed:.1f}s < 60s", elapsed < 60),
    ])


# -- 2 ------------------------------------------------------------------------


def _star(n: int) -> Graph:
    # node 0 sees node i at distance i: distinct distances, cheap searches
    return Graph.from_arcs(n, [(0, i, float(i)) for i in range(1, n)])


def criterion_2() -> bool:
    n, k, seeds = 10**4, 16, 200
    t0 = time.perf_counter()
    g = _star(n)
    bk = np.mean([len(build_pruned_dijkstra(g, k, Flavor.BOTTOM_K, seed=s)[0]) for s in range(seeds)])
    kp = np.mean([len(build_pruned_dijkstra(g, k, Flavor.K_PARTITION, seed=s)[0]) for s in range(seeds)])
    elapsed = time.perf_counter() - t0
    bk_pred = k + k * (harmonic(n) - harmonic(k))
    kp_pred = k * harmonic(n // k)
    return record(2, "ADS size law", [
        (f"bottom-k mean size {bk:.2f} vs {bk_pred:.2f} (3%)", within(bk, bk_pred, 0.03)),
        (f"k-partition mean size {kp:.2f} vs {kp_pred:.2f} (5%)", within(kp, kp_pred, 0.05)),
        (f"runtime {elapsed:.1f}s < 120s", elapsed < 120),
    ])


# -- 3, 4, 5 ------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def stream_sim(k: int):
    return simulate(SimConfig(n=10**4, k=k, runs=500, seed=1, extra_points=(1000, 5000)))


def criterion_3() -> bool:
    res = stream_sim(10)
    grid = res.config.grid
    km = res.nrmse("kmins-basic", 10**4)
    worse = [c for c in grid if res.nrmse("bottomk-basic", c) > res.nrmse("kmins-basic", c)]
    small = [res.nrmse("bottomk-basic", c) for c in grid if c <= 10]
    detail = ", ".join(
        f"{c}: {res.nrmse('bottomk-basic', c):.4f}>{res.nrmse('kmins-basic', c):.4f}"
        f" (exact {math.sqrt((c - 9) / (c * 8)):.4f}<{1 / math.sqrt(8):.4f})"
        for c in worse[:4]
    )
    return record(3, "basic estimator CV", [
        (f"k-mins NRMSE {km:.4f} vs {1 / math.sqrt(8):.4f} (15%)", within(km, 1 / math.sqrt(8), 0.15)),
        (f"bottom-k <= k-mins at all {len(grid)} grid points (violations at {len(worse)}: {detail})", not worse),
        (f"bottom-k NRMSE 0 for {len(small)} cardinalities <= k", all(x == 0.0 for x in small)),
    ])


def criterion_4() -> bool:
    checks = []
    for k in (10, 50):
        res = stream_sim(k)
        hip, basic = res.nrmse("bottomk-hip", 10**4), res.nrmse("bottomk-basic", 10**4)
        ratio = hip / basic
        upper, lower = 1.1 / math.sqrt(2 * (k - 1)), 0.9 / math.sqrt(2 * k)
        checks += [
            (f"k={k} ratio {ratio:.3f} in [0.60, 0.80]", 0.60 <= ratio <= 0.80),
            (f"k={k} HIP NRMSE {hip:.4f} in [{lower:.4f}, {upper:.4f}]", lower <= hip <= upper),
        ]
    return record(4, "HIP variance halving", checks)


def criterion_5() -> bool:
    res = stream_sim(10)
    perm, hip = res.nrmse("permutation", 5000), res.nrmse("bottomk-hip", 5000)
    far = []
    for c in res.config.grid:
        if c > 1000:
            continue
        p, h = res.nrmse("permutation", c), res.nrmse("bottomk-hip", c)
        if not (p == h or abs(p - h) <= 0.10 * h):
            far.append(f"{c}: {p:.4f} vs {h:.4f}")
    return record(5, "permutation estimator", [
        (f"at 0.5n permutation {perm:.4f} < HIP {hip:.4f}", perm < hip),
        (f"within 10% of HIP at every cardinality <= 0.1n ({len(far)} outside: {', '.join(far[:4])})", not far),
    ])


# -- 6 ------------------------------------------------------------------------


def criterion_6() -> bool:
    cfg = dict(n=10**4, k=16, runs=2000, seed=6, estimators=("bottomk-hip",))
    full = simulate(SimConfig(**cfg)).estimates["bottomk-hip"][:, -1]
    base2 = simulate(SimConfig(**cfg, base=2.0)).estimates["bottomk-hip"][:, -1]
    ratio = base2.var() / full.var()
    return record(6, "base-2 variance inflation", [
        (f"variance ratio {ratio:.3f} vs 1.5 (15%)", within(ratio, 1.5, 0.15)),
    ])


# -- 7 ------------------------------------------------------------------------


def criterion_7() -> bool:
    n, k, trials = 10**5, 64, 200
    t0 = time.perf_counter()
    elements = np.arange(n, dtype=np.uint64)
    hip, hll = [], []
    for t in range(trials):
        c = HllHipCounter(k, seed=derive_seed(7, t))
        c.offer_many(elements)
        hip.append(c.estimate())
        hll.append(hll_baseline_estimate(c.registers)[1])
    elapsed = time.perf_counter() - t0
    hip, hll = np.array(hip), np.array(hll)
    hip_nrmse = math.sqrt(np.mean((hip - n) ** 2)) / n
    hll_nrmse = math.sqrt(np.mean((hll - n) ** 2)) / n
    return record(7, "distinct counting", [
        (f"HIP NRMSE {hip_nrmse:.4f} vs {0.866 / 8:.4f} (15%)", within(hip_nrmse, 0.866 / 8, 0.15)),
        (f"HLL NRMSE {hll_nrmse:.4f} vs {1.08 / 8:.4f} (15%)", within(hll_nrmse, 1.08 / 8, 0.15)),
        (f"HIP mean {hip.mean():.0f} vs {n} (2%)", within(hip.mean(), n, 0.02)),
        (f"runtime {elapsed:.1f}s < 300s", elapsed < 300),
    ])


# -- 8 ------------------------------------------------------------------------


def criterion_8() -> bool:
    k, trials, n_max = 4, 10**5, 60
    ranks = rank_array(np.arange(trials * n_max, dtype=np.uint64), 8).reshape(trials, n_max)
    entered = np.zeros((trials, n_max), dtype=np.int64)
    for j in range(n_max):
        smaller = (ranks[:, :j] < ranks[:, j : j + 1]).sum(axis=1)
        entered[:, j] = smaller < k
    sizes = np.cumsum(entered, axis=1)
    table = np.array([size_estimate(s, k) for s in range(n_max + 1)])
    worst = 0.0
    for n in range(5, n_max + 1):
        mean = table[sizes[:, n - 1]].mean()
        worst = max(worst, abs(mean / n - 1))
    return record(8, "size-only estimator", [
        (f"worst relative deviation of the mean over n=5..60: {worst:.4f} (2%)", worst <= 0.02),
        (f"E_k = {size_estimate(k, k)}", size_estimate(k, k) == k),
        (f"E_(k+1) = {size_estimate(k + 1, k)}", size_estimate(k + 1, k) == (k + 1) ** 2 / k - 1),
    ])


# -- 9 ------------------------------------------------------------------------


def criterion_9() -> bool:
    outs = MorrisCounter(2.0, x=3).outcomes(9)
    expect = sum(p * (2.0**x - 1) for p, x in outs)
    b = 1.0625
    est = simulate_adds(b, np.ones(1000), trials=10**4, seed=9)
    mean = est.mean()
    cv = est.std() / 1000
    return record(9, "Morris counter", [
        (f"two-outcome expectation {expect}", expect == 16.0),
        (f"unit-increment mean {mean:.2f} vs 1000 (1%)", within(mean, 1000, 0.01)),
        (f"CV {cv:.4f} within factor 2 of b-1 = {b - 1:.4f}", (b - 1) / 2 <= cv <= 2 * (b - 1)),
    ])


# -- 10 -----------------------------------------------------------------------


def _corpus30() -> Graph:
    rng = random.Random(30)
    while True:
        g = random_graph(rng, 30, 0.12, weighted=True, undirected=False)
        if all(len(d) == 30 for d in all_pairs(g)):
            return g


def criterion_10() -> bool:
    g = _corpus30()
    seeds, k, nodes = 10**4, 4, (0, 11, 22)
    harm, expo = Kernel.parse("harmonic"), Kernel.parse("exp:0.3")
    filt = {v: 1.0 + (v % 3) for v in range(0, 30, 2)}  # weights on even nodes only
    queries = {
        "harmonic": (lambda hw: estimate_centrality(hw, harm), lambda v, d: harm(d)),
        "exp-decay": (lambda hw: estimate_centrality(hw, expo), lambda v, d: expo(d)),
        "filtered": (lambda hw: estimate_centrality(hw, harm, filt), lambda v, d: harm(d) * filt.get(v, 0.0)),
    }
    vals = {(q, v): [] for q in queries for v in nodes}
    for s in range(seeds):
        ads = build_pruned_dijkstra(g, k, seed=s)
        for v in nodes:
            hw = hip_weights(ads[v])
            for q, (est, _) in queries.items():
                vals[q, v].append(est(hw))
    checks = []
    for (q, v), xs in vals.items():
        xs = np.array(xs)
        true = exact_qg(g, v, queries[q][1])
        z = (xs.mean() - true) / (xs.std(ddof=1) / math.sqrt(seeds))
        checks.append((f"{q}@{v} z={z:+.2f}", abs(z) <= 3))
    return record(10, "centrality and Q_g unbiasedness", checks)


# -- 11 -----------------------------------------------------------------------


def criterion_11(tmp: str) -> bool:
    graph = os.path.join(tmp, "g.txt")
    rng = random.Random(11)
    with open(graph, "w") as fh:
        for _ in range(300):
            fh.write(f"{rng.randrange(80)} {rng.randrange(80)} {rng.randint(1, 5)}\n")
    tokens = os.path.join(tmp, "tokens.txt")
    with open(tokens, "w") as fh:
        fh.write("".join(f"user{rng.randrange(5000)}\n" for _ in range(20000)))

    def invoke(argv):
        out = io.StringIO()
        code = main(argv, out)
        return code, out.getvalue()

    snap = os.path.join(tmp, "s.bin")
    snap_bytes = []

    def build(i):
        return ["build", "--input", graph, "--output", snap, "--k", "4", "--seed", "3", "--flavor", "k-mins"]

    commands = {
        "build": build,
        "query": lambda i: ["query", "--snapshot", snap, "--neighborhood", "3", "--kernel", "harmonic", "--kernel", "exp:0.5"],
        "simulate": lambda i: ["simulate", "--n", "2000", "--k", "8", "--runs", "20", "--seed", "5"],
        "distinct": lambda i: ["distinct", "--input", tokens, "--k", "32", "--report-every", "1000", "--algo", "hip"],
        "distinct-bottomk": lambda i: ["distinct", "--input", tokens, "--k", "32", "--algo", "bottomk-hip"],
    }
    checks = []
    for name, argv in commands.items():
        first = invoke(argv(0))
        if name == "build":
            with open(snap, "rb") as fh:
                snap_bytes.append(fh.read())
        second = invoke(argv(1))
        same = first == second and first[0] == 0
        if name == "build":
            with open(snap, "rb") as fh:
                same = same and fh.read() == snap_bytes[0]
        checks.append((f"{name} repeated", same))
    par = invoke(commands["simulate"](0) + ["--workers", "2"])
    checks.append(("simulate with 2 workers", par == invoke(commands["simulate"](0))))
    return record(11, "byte-identical CLI output", checks)


# -- pytest entry points --------------------------------------------------------


def test_criterion_01_oracle_equivalence():
    assert criterion_1(), RESULTS[-1]


def test_criterion_02_ads_size_law():
    assert criterion_2(), RESULTS[-1]


def test_criterion_03_basic_estimator_cv():
    assert criterion_3(), RESULTS[-1]


def test_criterion_04_hip_variance_halving():
    assert criterion_4(), RESULTS[-1]


def test_criterion_05_permutation_estimator():
    assert criterion_5(), RESULTS[-1]


def test_criterion_06_base_b_inflation():
    assert criterion_6(), RESULTS[-1]


def test_criterion_07_distinct_counting():
    assert criterion_7(), RESULTS[-1]


def test_criterion_08_size_estimator():
    assert criterion_8(), RESULTS[-1]


def test_criterion_09_morris_counter():
    assert criterion_9(), RESULTS[-1]


def test_criterion_10_centrality_unbiasedness():
    assert criterion_10(), RESULTS[-1]


def test_criterion_11_reproducibility(tmp_path):
    assert criterion_11(str(tmp_path)), RESULTS[-1]


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        for fn in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
                   criterion_7, criterion_8, criterion_9, criterion_10):
            fn()
            print(RESULTS[-1], flush=True)
        criterion_11(tmp)
        print(RESULTS[-1])
    sys.exit(0 if all(line.startswith("[PASS]") for line in RESULTS) else 1)
