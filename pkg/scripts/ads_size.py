"""Mean ADS size against the k(1 + H_n - H_k) law on random graphs.

    python scripts/ads_size.py --n 2000 --k 4 16 --seeds 5
"""

import argparse
import random
from dataclasses import dataclass, field

from hipads.ads import Flavor, build_pruned_dijkstra
from hipads.cli import predicted_ads_size
from hipads.graph import Graph


@dataclass
class Experiment:
    n: int = 2000
    degree: int = 4
    ks: list[int] = field(default_factory=lambda: [4, 16])
    seeds: int = 5


def random_connected(n: int, degree: int, rng: random.Random) -> Graph:
    arcs = [(i, (i + 1) % n, float(rng.randint(1, 10))) for i in range(n)]
    while len(arcs) < n * degree // 2:
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            arcs.append((u, v, float(rng.randint(1, 10))))
    return Graph.from_arcs(n, arcs, undirected=True)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=Experiment.n)
    p.add_argument("--degree", type=int, default=Experiment.degree)
    p.add_argument("--k", type=int, nargs="+", default=[4, 16], dest="ks")
    p.add_argument("--seeds", type=int, default=Experiment.seeds)
    exp = Experiment(**vars(p.parse_args()))
    g = random_connected(exp.n, exp.degree, random.Random(0))
    print("flavor,k,mean_size,predicted,relaxations_per_node")
    for flavor in Flavor:
        for k in exp.ks:
            sizes, relax = [], []
            for s in range(exp.seeds):
                ads = build_pruned_dijkstra(g, k, flavor, seed=s)
                sizes.append(ads.mean_size())
                relax.append(ads.stats["relaxations"] / g.n)
            print(f"{flavor.value},{k},{sum(sizes) / len(sizes):.3f},"
                  f"{predicted_ads_size(g.n, k, flavor):.3f},{sum(relax) / len(relax):.1f}")


if __name__ == "__main__":
    main()
