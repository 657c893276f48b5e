"""Empirical CV of Morris counters with unit increments, for b = 1 + 2^-j.

Prints the measured CV next to b - 1 and sqrt((b - 1) / 2).

    python scripts/morris_cv.py --n 10000 --trials 10000
"""

import argparse
import math
from dataclasses import dataclass, field

import numpy as np

from hipads.counter import simulate_adds


@dataclass
class Experiment:
    n: int = 10_000
    trials: int = 10_000
    js: list[int] = field(default_factory=lambda: [2, 3, 4, 5])
    seed: int = 0


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=Experiment.n)
    p.add_argument("--trials", type=int, default=Experiment.trials)
    p.add_argument("--j", type=int, nargs="+", default=[2, 3, 4, 5], dest="js")
    p.add_argument("--seed", type=int, default=Experiment.seed)
    exp = Experiment(**vars(p.parse_args()))
    print("base,mean,cv,b_minus_1,sqrt_half_b_minus_1")
    for j in exp.js:
        b = 1 + 2.0**-j
        est = simulate_adds(b, np.ones(exp.n), exp.trials, seed=exp.seed + j)
        print(f"{b},{est.mean():.2f},{est.std() / exp.n:.4f},{b - 1:.4f},{math.sqrt((b - 1) / 2):.4f}")


if __name__ == "__main__":
    main()
