"""HIP (historic inverse probability) estimators over an ADS.

Scanning an ADS by increasing ``(distance, node)``, every entry gets the
probability it had of being included given the ranks of the strictly
closer entries. Its inverse is the entry's adjusted weight, an unbiased
estimate of the entry's presence; sums of adjusted weights then estimate
neighborhood sizes, closeness centralities and general Q_g statistics.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from itertools import groupby
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .ads import Ads, Flavor
from .rank import InvalidInput, InvalidParameter


class HipEntry(NamedTuple):
    node: int
    distance: float
    tau: float
    weight: float


@dataclass
class HipWeights:
    owner: int | None
    entries: list[HipEntry]
    beta: Callable[[int], float] = field(default=lambda v: 1.0, repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    def weight_of(self, node: int) -> float:
        for e in self.entries:
            if e.node == node:
                return e.weight
        return 0.0


def _nodes_in_order(ads: Ads):
    """(distance, node, {slot: rank}) per distinct node, closest first."""
    for (d, v), grp in groupby(ads.entries, key=lambda e: (e.distance, e.node)):
        yield d, v, {e.slot: e.rank for e in grp}


def hip_weights(ads: Ads) -> HipWeights:
    """Adjusted weights ``1/tau`` for every node in the ADS."""
    s = ads.scheme
    out = []
    if ads.flavor == Flavor.BOTTOM_K:
        kept: list[float] = []  # negated k smallest ranks seen so far
        for d, v, ranks in _nodes_in_order(ads):
            threshold = -kept[0] if len(kept) >= ads.k else s.sup
            tau = s.inclusion_probability(v, threshold)
            out.append(HipEntry(v, d, tau, 1.0 / tau))
            heapq.heappush(kept, -ranks[0])
            if len(kept) > ads.k:
                heapq.heappop(kept)
    else:
        minima = [s.sup] * ads.k
        for d, v, ranks in _nodes_in_order(ads):
            probs = [s.inclusion_probability(v, m) for m in minima]
            if ads.flavor == Flavor.K_MINS:
                tau = -math.expm1(sum(math.log1p(-p) if p < 1.0 else -math.inf for p in probs))
            else:
                tau = sum(probs) / ads.k
            out.append(HipEntry(v, d, tau, 1.0 / tau))
            for h, r in ranks.items():
                if r < minima[h]:
                    minima[h] = r
    return HipWeights(ads.owner, out, s.beta)


def distance_weight_compress(hw: HipWeights) -> list[tuple[float, float]]:
    """One ``(distance, summed adjusted weight)`` pair per distinct distance."""
    return [(d, math.fsum(e.weight for e in grp)) for d, grp in groupby(hw.entries, key=lambda e: e.distance)]


def _pairs(hw: HipWeights | Sequence[tuple[float, float]]):
    return distance_weight_compress(hw) if isinstance(hw, HipWeights) else hw


def estimate_neighborhood(hw: HipWeights | Sequence[tuple[float, float]], d: float) -> float:
    """Estimated number of nodes within distance ``d``.

    Accepts raw HIP weights or their compressed distance/weight list; both
    give bit-identical results.
    """
    total = 0.0
    for dist, w in _pairs(hw):
        if dist > d:
            break
        total += w
    return total


def estimate_qg(hw: HipWeights, g: Callable[[int, float], float]) -> float:
    """Unbiased estimate of ``sum_j g(j, d_vj)`` over reachable nodes."""
    total = 0.0
    for e in hw.entries:
        x = g(e.node, e.distance)
        if x < 0:
            raise InvalidInput(f"g({e.node}, {e.distance}) = {x} is negative")
        total += e.weight * x
    return total


@dataclass(frozen=True)
class Kernel:
    """A non-increasing distance kernel.

    ``threshold`` (1 up to ``param``), ``exponential`` (``exp(-param*x)``),
    ``harmonic`` (``1/x``; the owner at distance 0 contributes nothing),
    ``reachability`` (constant 1), or ``custom`` wrapping any callable.
    """

    name: str
    param: float = 0.0
    fn: Callable[[float], float] | None = field(default=None, compare=False)

    def __call__(self, x: float) -> float:
        if math.isinf(x):
            return 0.0
        if self.name == "threshold":
            return 1.0 if x <= self.param else 0.0
        if self.name == "exponential":
            return math.exp(-self.param * x)
        if self.name == "harmonic":
            return 1.0 / x if x > 0 else 0.0
        if self.name == "reachability":
            return 1.0
        return self.fn(x)

    @classmethod
    def custom(cls, fn: Callable[[float], float]) -> "Kernel":
        return cls("custom", fn=fn)

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """``threshold:10``, ``exp:0.5``, ``harmonic`` or ``reachability``."""
        name, _, arg = text.partition(":")
        name = {"exp": "exponential"}.get(name, name)
        if name in ("threshold", "exponential"):
            try:
                param = float(arg)
            except ValueError:
                raise InvalidParameter(f"kernel {text!r} needs a numeric parameter") from None
            if name == "exponential" and param < 0:
                raise InvalidParameter("exponential decay rate must be >= 0")
            return cls(name, param)
        if name in ("harmonic", "reachability") and not arg:
            return cls(name)
        raise InvalidParameter(f"unknown kernel {text!r}")

    def check_non_increasing(self, distances: Iterable[float]) -> None:
        prev = math.inf
        last = None
        for x in sorted(set(d for d in distances if d > 0)):
            y = self(x)
            if y < 0:
                raise InvalidParameter(f"kernel is negative at {x}")
            if last is not None and y > prev * (1 + 1e-12) + 1e-300:
                raise InvalidParameter(f"kernel increases between {last} and {x}")
            prev, last = y, x


def estimate_centrality(
    hw: HipWeights,
    alpha: Kernel,
    beta: Callable[[int], float] | Mapping[int, float] | None = None,
) -> float:
    """Estimate of ``sum_j alpha(d_vj) * beta(j)``.

    Without ``beta`` the sum runs over the compressed distance/weight list,
    so it agrees exactly with :func:`estimate_neighborhood` for threshold
    kernels.
    """
    alpha.check_non_increasing(e.distance for e in hw.entries)
    if beta is None:
        return sum(w * alpha(d) for d, w in distance_weight_compress(hw))
    if isinstance(beta, Mapping):
        table = beta
        beta = lambda v: table.get(v, 0.0)  # noqa: E731
    return estimate_qg(hw, lambda v, d: alpha(d) * beta(v))


def size_estimate(s: int, k: int) -> float:
    """Unbiased cardinality estimate from the number of ADS entries alone."""
    if s < 0:
        raise InvalidInput("size must be non-negative")
    if s <= k:
        return float(s)
    return k * (1.0 + 1.0 / k) ** (s - k + 1) - 1.0


class PermutationEstimator:
    """Running cardinality estimate from bottom-k updates under permutation ranks.

    Ranks are positions ``1..n`` of a random permutation of the ``n``
    domain elements. Feed the rank of each element that changed the sketch,
    in stream (distance) order.
    """

    def __init__(self, n: int, k: int):
        if k < 1 or n < 1:
            raise InvalidParameter("n and k must be >= 1")
        self.n, self.k = n, k
        self.s_hat = 0.0
        self._kept: list[int] = []  # negated k smallest ranks
        self._seen: set[int] = set()

    @property
    def threshold(self) -> int:
        """k-th smallest rank held, or n + 1 while fewer than k are held."""
        return -self._kept[0] if len(self._kept) >= self.k else self.n + 1

    def update(self, rank: int) -> float:
        if not (isinstance(rank, int) and 1 <= rank <= self.n) or rank in self._seen:
            raise InvalidInput(f"{rank!r} is not an unused permutation rank in 1..{self.n}")
        mu = self.threshold
        if rank >= mu:
            raise InvalidInput(f"rank {rank} would not update a sketch with threshold {mu}")
        self._seen.add(rank)
        if len(self._kept) < self.k:
            self.s_hat += 1.0
        else:
            self.s_hat += (self.n - self.s_hat + 1) / (mu - self.k + 1)
        heapq.heappush(self._kept, -rank)
        if len(self._kept) > self.k:
            heapq.heappop(self._kept)
        return self.estimate

    @property
    def saturated(self) -> bool:
        return len(self._kept) >= self.k and self.threshold == self.k

    @property
    def estimate(self) -> float:
        if self.saturated:
            return self.s_hat * (self.k + 1) / self.k - 1.0
        return self.s_hat


def permutation_estimate(updates: Iterable[int], n: int, k: int) -> float:
    est = PermutationEstimator(n, k)
    for r in updates:
        est.update(int(r))
    return est.estimate
