"""All-distances sketches: structure, graph construction, streaming builds.

An ADS of node v lists ``(distance, node, rank, slot)`` entries sorted by
``(distance, node)``. Distances are tie-broken by node id everywhere, so
"closer" always means smaller ``(distance, node)``.

The membership law, per slot with capacity ``cap``: node j is an entry iff
fewer than ``cap`` strictly closer nodes have rank <= r(j). For bottom-k
there is one slot with cap = k. k-mins uses k slots (one permutation each)
and k-partition uses one slot per bucket; both with cap = 1.
"""

from __future__ import annotations

import heapq
import io
import math
import struct
from bisect import bisect_left, insort
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import BinaryIO, Iterable, NamedTuple, Sequence

from .graph import Graph
from .rank import InvalidInput, InvalidParameter, RankScheme


class Flavor(str, Enum):
    BOTTOM_K = "bottom-k"
    K_MINS = "k-mins"
    K_PARTITION = "k-partition"


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class AdsEntry(NamedTuple):
    distance: float
    node: int
    rank: float
    slot: int = 0


def slot_capacity(flavor: Flavor, k: int) -> int:
    return k if flavor == Flavor.BOTTOM_K else 1


def n_slots(flavor: Flavor, k: int) -> int:
    return 1 if flavor == Flavor.BOTTOM_K else k


@dataclass
class Ads:
    owner: int | None
    flavor: Flavor
    k: int
    scheme: RankScheme
    entries: list[AdsEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def capacity(self) -> int:
        return slot_capacity(self.flavor, self.k)

    def nodes(self) -> set[int]:
        return {e.node for e in self.entries}

    def within(self, d: float) -> list[AdsEntry]:
        return [e for e in self.entries if e.distance <= d]

    def slot_of(self, node: int, slot_hint: int = 0) -> int:
        if self.flavor == Flavor.K_PARTITION:
            return self.scheme.bucket(node, self.k)
        return slot_hint if self.flavor == Flavor.K_MINS else 0


def ads_insert(ads: Ads, node: int, rank: float, d: float, slot: int = 0) -> bool:
    """Insert ``node`` at distance ``d`` if the membership test admits it.

    Admitted iff the node is not already in the slot and fewer than
    ``capacity`` entries of the slot that are closer than ``(d, node)``
    have rank <= ``rank``.
    """
    key = (d, node)
    closer_smaller = 0
    for e in ads.entries:
        if e.slot != slot:
            continue
        if e.node == node:
            return False
        if (e.distance, e.node) < key and e.rank <= rank:
            closer_smaller += 1
    if closer_smaller >= ads.capacity:
        return False
    insort(ads.entries, AdsEntry(d, node, rank, slot))
    return True


@dataclass
class AdsSet:
    flavor: Flavor
    k: int
    scheme: RankScheme
    direction: Direction
    sketches: list[Ads]
    weights_digest: int = 0
    stats: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, v: int) -> Ads:
        return self.sketches[v]

    def __len__(self) -> int:
        return len(self.sketches)

    def mean_size(self) -> float:
        return sum(len(a) for a in self.sketches) / max(len(self.sketches), 1)


def _rank_table(scheme: RankScheme, nodes: Sequence[int], slot: int) -> dict[int, float]:
    if scheme.base is None and scheme.weights is None and len(nodes):
        return dict(zip(nodes, scheme.values(nodes, slot).tolist()))
    return {v: scheme.value(v, slot) for v in nodes}


def _slot_plan(flavor: Flavor, k: int, scheme: RankScheme, nodes: Sequence[int]):
    """Yield (slot, cap, sources, rank lookup) for each independent pass."""
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    if flavor == Flavor.BOTTOM_K:
        yield 0, k, list(nodes), _rank_table(scheme, nodes, 0)
    elif flavor == Flavor.K_MINS:
        for h in range(k):
            yield h, 1, list(nodes), _rank_table(scheme, nodes, h)
    else:
        ranks = _rank_table(scheme, nodes, 0)
        by_bucket = defaultdict(list)
        for v in nodes:
            by_bucket[scheme.bucket(v, k)].append(v)
        for h in range(k):
            yield h, 1, by_bucket.get(h, []), ranks


def _rank_groups(sources, rank):
    order = sorted(sources, key=lambda u: (rank[u], u))
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and rank[order[j]] == rank[order[i]]:
            j += 1
        yield order[i:j]
        i = j


def _pruned_dijkstra_slot(adj, sources, rank, cap, keys, entries, stats):
    # Sources go by increasing rank. Sources sharing a rank value (possible
    # with base-b ranks) form a group whose acceptances are settled together,
    # because the law counts equal-rank closer nodes against each other.
    for group in _rank_groups(sources, rank):
        cands = defaultdict(list)
        for u in group:
            dist = {u: 0.0}
            heap = [(0.0, u)]
            done = set()
            while heap:
                d, v = heapq.heappop(heap)
                if v in done:
                    continue
                done.add(v)
                stats["relaxations"] += 1
                held = keys.get(v)
                if held and bisect_left(held, (d, u)) >= cap:
                    continue
                cands[v].append((d, u))
                for y, w in adj[v]:
                    nd = d + w
                    if nd < dist.get(y, math.inf):
                        dist[y] = nd
                        heapq.heappush(heap, (nd, y))
        for v, cs in cands.items():
            cs.sort()
            accepted = [(d, u) for i, (d, u) in enumerate(cs) if bisect_left(keys[v], (d, u)) + i < cap]
            for d, u in accepted:
                insort(keys[v], (d, u))
                entries[v].append((d, u, rank[u]))


def build_pruned_dijkstra(
    g: Graph,
    k: int,
    flavor: Flavor | str = Flavor.BOTTOM_K,
    seed: int = 0,
    direction: Direction | str = Direction.FORWARD,
    scheme: RankScheme | None = None,
) -> AdsSet:
    """ADS of every node by pruned Dijkstra runs over the reversed graph.

    For the forward ADS of v we need distances v -> u, so searches from u
    walk arcs backwards; the backward ADS walks them forwards.
    """
    flavor, direction = Flavor(flavor), Direction(direction)
    scheme = scheme or RankScheme(seed)
    adj = g.adjacency(transpose=direction == Direction.FORWARD)
    nodes = range(g.n)
    stats = {"relaxations": 0}
    per_node: list[list[AdsEntry]] = [[] for _ in nodes]
    for slot, cap, sources, rank in _slot_plan(flavor, k, scheme, nodes):
        keys = defaultdict(list)
        entries = defaultdict(list)
        _pruned_dijkstra_slot(adj, sources, rank, cap, keys, entries, stats)
        for v, found in entries.items():
            per_node[v].extend(AdsEntry(d, u, r, slot) for d, u, r in found)
    sketches = [Ads(v, flavor, k, scheme, sorted(per_node[v])) for v in nodes]
    return AdsSet(flavor, k, scheme, direction, sketches, _weights_digest(scheme), stats)


class _LocalAds:
    """Mutable per-node state for one slot of LocalUpdates."""

    __slots__ = ("items",)

    def __init__(self):
        self.items: dict[int, tuple[float, float]] = {}  # node -> (distance, rank)

    def admits(self, node, d, r, cap, eps):
        bound = d * (1.0 + eps)
        count = 0
        for x, (dx, rx) in self.items.items():
            if x == node or rx > r:
                continue
            closer = dx <= bound if eps > 0 else (dx, x) < (d, node)
            if closer:
                count += 1
                if count >= cap:
                    return False
        return True

    def cleanup(self, cap):
        kept: list[float] = []  # max-heap (negated) of the cap smallest retained ranks
        removed = []
        for x, (dx, rx) in sorted(self.items.items(), key=lambda it: (it[1][0], it[0])):
            if len(kept) >= cap and -kept[0] <= rx:
                removed.append(x)
                continue
            heapq.heappush(kept, -rx)
            if len(kept) > cap:
                heapq.heappop(kept)
        for x in removed:
            del self.items[x]


def _local_updates_slot(g, adj_in, sources, rank, cap, eps, stats):
    n = g.n
    state = [_LocalAds() for _ in range(n)]
    fresh: dict[int, list[tuple[float, int, float]]] = {}
    for u in sources:
        state[u].items[u] = (0.0, rank[u])
        fresh[u] = [(0.0, u, rank[u])]
    rounds = 0
    while fresh:
        rounds += 1
        if rounds > n + 1:
            raise RuntimeError(f"LocalUpdates did not converge within {n + 1} rounds")
        inbox = defaultdict(list)
        for u, items in fresh.items():
            for y, w in adj_in[u]:
                for d, x, r in items:
                    inbox[y].append((d + w, x, r))
        fresh = {}
        for y, msgs in inbox.items():
            st = state[y]
            added = []
            for d, x, r in sorted(msgs):
                stats["relaxations"] += 1
                old = st.items.get(x)
                if old is not None:
                    if (old[0], x) <= (d, x):
                        continue
                    del st.items[x]
                if st.admits(x, d, r, cap, eps):
                    st.items[x] = (d, r)
                    added.append(x)
            if added:
                st.cleanup(cap)
                out = [(st.items[x][0], x, st.items[x][1]) for x in added if x in st.items]
                # an entry re-added in one round with two distances keeps the last
                out = list({x: (d, x, r) for d, x, r in out}.values())
                if out:
                    fresh[y] = out
    stats["rounds"] = max(stats.get("rounds", 0), rounds)
    return state


def build_local_updates(
    g: Graph,
    k: int,
    flavor: Flavor | str = Flavor.BOTTOM_K,
    seed: int = 0,
    epsilon: float = 0.0,
    direction: Direction | str = Direction.FORWARD,
    scheme: RankScheme | None = None,
) -> AdsSet:
    """ADS set by synchronized rounds of local updates (node-centric DP).

    Each round, nodes forward the entries they accepted in the previous
    round to their neighbors, which run the insert test and then drop
    entries dominated by closer ones. With ``epsilon > 0`` the insert test
    looks at entries within ``(1 + epsilon)`` times the candidate distance,
    giving a (1 + epsilon)-approximate ADS.
    """
    flavor, direction = Flavor(flavor), Direction(direction)
    if epsilon < 0:
        raise InvalidParameter(f"epsilon must be >= 0, got {epsilon}")
    if epsilon > 0:
        lengths = g.lengths()
        if lengths and max(lengths) / min(lengths) > float(g.n) ** 4:
            raise InvalidParameter("arc length ratio exceeds n**4; not supported with epsilon > 0")
    scheme = scheme or RankScheme(seed)
    # forward ADS(y) learns from its out-neighbours u, i.e. u sends along in-arcs
    adj_in = g.adjacency(transpose=direction == Direction.FORWARD)
    nodes = range(g.n)
    stats = {"relaxations": 0, "rounds": 0}
    per_node: list[list[AdsEntry]] = [[] for _ in nodes]
    for slot, cap, sources, rank in _slot_plan(flavor, k, scheme, nodes):
        state = _local_updates_slot(g, adj_in, sources, rank, cap, epsilon, stats)
        for v in nodes:
            per_node[v].extend(AdsEntry(d, x, r, slot) for x, (d, r) in state[v].items.items())
    sketches = [Ads(v, flavor, k, scheme, sorted(per_node[v])) for v in nodes]
    return AdsSet(flavor, k, scheme, direction, sketches, _weights_digest(scheme), stats)


def stream_ads_first(stream: Iterable[tuple[int, float]], k: int, scheme: RankScheme) -> Ads:
    """Bottom-k ADS keyed on the time of each element's first occurrence."""
    ads = Ads(None, Flavor.BOTTOM_K, k, scheme)
    kept: list[float] = []  # negated k smallest ranks
    present = set()
    last_t = -math.inf
    for node, t in stream:
        if t < last_t:
            raise InvalidInput(f"timestamps must be non-decreasing ({t} after {last_t})")
        last_t = t
        if node in present:
            continue
        r = scheme.value(node)
        if len(kept) < k or r < -kept[0]:
            ads.entries.append(AdsEntry(float(t), node, r))
            present.add(node)
            heapq.heappush(kept, -r)
            if len(kept) > k:
                heapq.heappop(kept)
    ads.entries.sort()
    return ads


def stream_ads_recent(stream: Iterable[tuple[int, float]], horizon: float, k: int, scheme: RankScheme) -> Ads:
    """Bottom-k ADS keyed on ``horizon - t`` of each element's latest occurrence."""
    items: dict[int, tuple[float, float]] = {}
    for node, t in stream:
        if t >= horizon:
            raise InvalidInput(f"time {t} is not before the horizon {horizon}")
        items.pop(node, None)
        items[node] = (horizon - t, scheme.value(node))
        kept: list[float] = []
        for x, (d, r) in sorted(items.items(), key=lambda it: (it[1][0], it[0])):
            if len(kept) >= k and -kept[0] <= r:
                del items[x]
                continue
            heapq.heappush(kept, -r)
            if len(kept) > k:
                heapq.heappop(kept)
    entries = sorted(AdsEntry(d, x, r) for x, (d, r) in items.items())
    return Ads(None, Flavor.BOTTOM_K, k, scheme, entries)


def _weights_digest(scheme: RankScheme) -> int:
    if scheme.weights is None:
        return 0
    from .rank import mix64

    h = 0
    for v, w in sorted(scheme.weights.items()):
        h = mix64(h ^ v)
        h = mix64(h ^ struct.unpack("<Q", struct.pack("<d", float(w)))[0])
    return h or 1


# -- snapshots -----------------------------------------------------------------

_MAGIC = b"HADS"
_VERSION = 1
_HEADER = struct.Struct("<4sHBBIQdQQ")
_ENTRY = struct.Struct("<dqdI")
_FLAVOR_CODES = {Flavor.BOTTOM_K: 0, Flavor.K_MINS: 1, Flavor.K_PARTITION: 2}
_DIR_CODES = {Direction.FORWARD: 0, Direction.BACKWARD: 1}


def write_snapshot(ads_set: AdsSet, fh: BinaryIO) -> None:
    base = ads_set.scheme.base or 0.0
    fh.write(
        _HEADER.pack(
            _MAGIC,
            _VERSION,
            _FLAVOR_CODES[ads_set.flavor],
            _DIR_CODES[ads_set.direction],
            ads_set.k,
            ads_set.scheme.seed,
            base,
            ads_set.weights_digest,
            len(ads_set.sketches),
        )
    )
    for ads in ads_set.sketches:
        fh.write(struct.pack("<I", len(ads.entries)))
        for e in ads.entries:
            fh.write(_ENTRY.pack(e.distance, e.node, e.rank, e.slot))


def read_snapshot(fh: BinaryIO, weights=None) -> AdsSet:
    """Load an AdsSet; ``weights`` must be supplied again for weighted builds."""
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise InvalidInput("truncated snapshot header")
    magic, version, fcode, dcode, k, seed, base, digest, n = _HEADER.unpack(raw)
    if magic != _MAGIC:
        raise InvalidInput("not an ADS snapshot")
    if version != _VERSION:
        raise InvalidInput(f"unsupported snapshot version {version}")
    flavor = {c: f for f, c in _FLAVOR_CODES.items()}[fcode]
    direction = {c: d for d, c in _DIR_CODES.items()}[dcode]
    scheme = RankScheme(seed, base or None, weights)
    if _weights_digest(scheme) != digest:
        raise InvalidParameter("node weights do not match the ones the snapshot was built with")
    sketches = []
    for v in range(n):
        (count,) = struct.unpack("<I", fh.read(4))
        buf = fh.read(_ENTRY.size * count)
        if len(buf) != _ENTRY.size * count:
            raise InvalidInput("truncated snapshot")
        entries = [AdsEntry(*t) for t in _ENTRY.iter_unpack(buf)]
        sketches.append(Ads(v, flavor, k, scheme, entries))
    return AdsSet(flavor, k, scheme, direction, sketches, digest)


def snapshot_bytes(ads_set: AdsSet) -> bytes:
    buf = io.BytesIO()
    write_snapshot(ads_set, buf)
    return buf.getvalue()
