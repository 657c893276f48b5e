"""NRMSE/MRE versus cardinality for every estimator, as CSV.

    python scripts/estimator_accuracy.py --k 10 50 --runs 500 --out results/
"""

import argparse
import csv
import os
from dataclasses import dataclass, field

from hipads.sim import ESTIMATORS, SimConfig, simulate


@dataclass
class Experiment:
    n: int = 10_000
    ks: list[int] = field(default_factory=lambda: [10, 50])
    runs: int = 500
    seed: int = 1
    workers: int = 1
    out: str = "results"


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=Experiment.n)
    p.add_argument("--k", type=int, nargs="+", default=[10, 50], dest="ks")
    p.add_argument("--runs", type=int, default=Experiment.runs)
    p.add_argument("--seed", type=int, default=Experiment.seed)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default=Experiment.out)
    exp = Experiment(**vars(p.parse_args()))
    os.makedirs(exp.out, exist_ok=True)
    for k in exp.ks:
        res = simulate(SimConfig(n=exp.n, k=k, runs=exp.runs, seed=exp.seed, workers=exp.workers,
                                 extra_points=(exp.n // 10, exp.n // 2)))
        path = os.path.join(exp.out, f"accuracy_k{k}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(f"# n={exp.n} k={k} runs={exp.runs} seed={exp.seed}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cardinality", "estimator", "nrmse", "mre", "runs"])
            for r in res.rows:
                w.writerow([r.cardinality, r.estimator, f"{r.nrmse:.6g}", f"{r.mre:.6g}", r.runs])
        last = {e: res.nrmse(e, exp.n) for e in ESTIMATORS}
        print(f"k={k} at n={exp.n}: " + ", ".join(f"{e}={v:.4f}" for e, v in last.items()) + f" -> {path}")


if __name__ == "__main__":
    main()
