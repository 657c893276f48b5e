"""Node-weighted ADS: exponential ranks with rate beta(node)."""

from __future__ import annotations

from typing import Mapping, TextIO

from .ads import Ads, AdsSet, Direction, Flavor, _weights_digest, build_pruned_dijkstra
from .estimate import hip_weights
from .graph import Graph
from .rank import InvalidInput, InvalidParameter, RankScheme


def read_weights(stream: TextIO) -> dict[int, float]:
    """Lines of ``node beta``; ``#`` comments allowed."""
    weights = {}
    for lineno, line in enumerate(stream, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidInput(f"line {lineno}: expected 'node beta'")
        try:
            v, beta = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise InvalidInput(f"line {lineno}: {exc}") from None
        if not beta > 0:
            raise InvalidInput(f"line {lineno}: weight must be > 0, got {beta}")
        weights[v] = beta
    return weights


def build_weighted_ads(
    g: Graph,
    weights: Mapping[int, float],
    k: int,
    seed: int = 0,
    direction: Direction | str = Direction.FORWARD,
) -> AdsSet:
    """Bottom-k ADS set over ranks ``-ln(1 - r) / beta``; absent nodes get beta 1."""
    scheme = RankScheme(seed, weights=dict(weights))
    return build_pruned_dijkstra(g, k, Flavor.BOTTOM_K, direction=direction, scheme=scheme)


def hip_weighted_estimate(ads: Ads, weights: Mapping[int, float], d: float) -> float:
    """Estimate of the total weight ``sum beta(j)`` of nodes within ``d``.

    Each entry contributes ``beta(j) / tau_j`` where ``tau_j`` is the chance
    that an Exp(beta(j)) rank falls below the threshold set by the closer
    entries.
    """
    if ads.scheme.weights is None:
        raise InvalidParameter("ADS was not built with node weights")
    if _weights_digest(RankScheme(ads.scheme.seed, weights=dict(weights))) != _weights_digest(ads.scheme):
        raise InvalidParameter("weights differ from the ones the ADS was built with")
    hw = hip_weights(ads)
    return sum(ads.scheme.beta(e.node) * e.weight for e in hw.entries if e.distance <= d)
