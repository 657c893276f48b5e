"""HIP on HyperLogLog registers versus the HyperLogLog estimate.

Streams n distinct elements through counters with k registers, for several
register bases 2**(1/i), and reports NRMSE at log-spaced checkpoints.

    python scripts/distinct_counters.py --k 16 64 --n 100000 --trials 200
"""

import argparse
import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from hipads.distinct import HllHipCounter, hll_baseline_estimate
from hipads.rank import derive_seed
from hipads.sim import cardinality_grid


@dataclass
class Experiment:
    n: int = 100_000
    ks: list[int] = field(default_factory=lambda: [16, 64])
    base_exps: list[int] = field(default_factory=lambda: [1, 2])
    trials: int = 200
    seed: int = 3
    out: str = "results"


def run(exp: Experiment, k: int, base_exp: int):
    grid = np.asarray(cardinality_grid(exp.n, ratio=1.5), dtype=np.int64)
    hip = np.empty((exp.trials, len(grid)))
    hll = np.empty_like(hip)
    elements = np.arange(exp.n, dtype=np.uint64)
    for t in range(exp.trials):
        c = HllHipCounter(k, seed=derive_seed(exp.seed, t), base_exp=base_exp)
        prev = 0
        for j, m in enumerate(grid):
            c.offer_many(elements[prev:m])
            prev = m
            hip[t, j] = c.estimate()
            hll[t, j] = hll_baseline_estimate(c.registers)[1] if base_exp == 1 else math.nan
    nrmse = lambda est: np.sqrt(np.mean((est - grid) ** 2, axis=0)) / grid  # noqa: E731
    return grid, nrmse(hip), nrmse(hll)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=Experiment.n)
    p.add_argument("--k", type=int, nargs="+", default=[16, 64], dest="ks")
    p.add_argument("--base-exp", type=int, nargs="+", default=[1, 2], dest="base_exps")
    p.add_argument("--trials", type=int, default=Experiment.trials)
    p.add_argument("--seed", type=int, default=Experiment.seed)
    p.add_argument("--out", default=Experiment.out)
    exp = Experiment(**vars(p.parse_args()))
    os.makedirs(exp.out, exist_ok=True)
    path = os.path.join(exp.out, "distinct_counters.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "base_exp", "cardinality", "hip_nrmse", "hll_nrmse"])
        for k in exp.ks:
            for i in exp.base_exps:
                grid, hip, hll = run(exp, k, i)
                for c, a, b in zip(grid, hip, hll):
                    w.writerow([k, i, c, f"{a:.6g}", "" if math.isnan(b) else f"{b:.6g}"])
                tail = grid >= 1000
                line = f"k={k} base=2^(1/{i}): HIP NRMSE*sqrt(k) {hip[tail].mean() * math.sqrt(k):.3f}"
                if i == 1:
                    line += f", HLL NRMSE*sqrt(k) {hll[tail].mean() * math.sqrt(k):.3f}"
                print(line)
    print(f"-> {path}")


if __name__ == "__main__":
    main()
