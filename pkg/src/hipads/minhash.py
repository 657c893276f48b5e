"""MinHash sketches (bottom-k, k-mins, k-partition) and basic estimators."""

from __future__ import annotations

import io
import math
import struct
from bisect import insort
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

from .ads import Ads, Flavor
from .rank import InvalidInput, InvalidParameter, RankScheme


@dataclass(frozen=True)
class CardinalityEstimate:
    value: float
    exact: bool = False

    def __float__(self) -> float:
        return self.value


@dataclass
class MinHashSketch:
    """A MinHash sketch of a set of node ids.

    Bottom-k keeps ``items``: the k smallest ``(rank, node)`` pairs, sorted.
    k-mins and k-partition keep ``registers``: one minimum rank per
    permutation or bucket, ``scheme.sup`` (1.0) while empty.
    """

    flavor: Flavor
    k: int
    scheme: RankScheme
    items: list[tuple[float, int]] = field(default_factory=list)
    registers: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.flavor = Flavor(self.flavor)
        if self.k < 1:
            raise InvalidParameter(f"k must be >= 1, got {self.k}")
        if self.flavor != Flavor.BOTTOM_K and not self.registers:
            self.registers = [self.scheme.sup] * self.k

    @classmethod
    def of(cls, nodes: Iterable[int], flavor: Flavor | str, k: int, scheme: RankScheme) -> "MinHashSketch":
        sk = cls(Flavor(flavor), k, scheme)
        for v in nodes:
            sk.update(v)
        return sk

    def update(self, node: int) -> bool:
        return mh_update(self, node)

    def copy(self) -> "MinHashSketch":
        return MinHashSketch(self.flavor, self.k, self.scheme, list(self.items), list(self.registers))

    def is_empty(self) -> bool:
        if self.flavor == Flavor.BOTTOM_K:
            return not self.items
        return all(x == self.scheme.sup for x in self.registers)

    def same_params(self, other: "MinHashSketch") -> bool:
        return (
            self.flavor == other.flavor
            and self.k == other.k
            and self.scheme.seed == other.scheme.seed
            and self.scheme.base == other.scheme.base
        )


def mh_update(sketch: MinHashSketch, node: int) -> bool:
    """Offer ``node``; return whether the stored state changed."""
    s = sketch.scheme
    if sketch.flavor == Flavor.BOTTOM_K:
        items = sketch.items
        if any(v == node for _, v in items):
            return False
        item = (s.value(node), node)
        if len(items) < sketch.k:
            insort(items, item)
            return True
        if item < items[-1]:
            items.pop()
            insort(items, item)
            return True
        return False
    if sketch.flavor == Flavor.K_MINS:
        changed = False
        for h in range(sketch.k):
            r = s.value(node, h)
            if r < sketch.registers[h]:
                sketch.registers[h] = r
                changed = True
        return changed
    b = s.bucket(node, sketch.k)
    r = s.value(node)
    if r < sketch.registers[b]:
        sketch.registers[b] = r
        return True
    return False


def mh_from_ads(ads: Ads, d: float, flavor: Flavor | str | None = None, k: int | None = None) -> MinHashSketch:
    """MinHash sketch of the d-neighborhood, read off the ADS."""
    flavor = ads.flavor if flavor is None else Flavor(flavor)
    k = ads.k if k is None else k
    if flavor != ads.flavor or k != ads.k:
        raise InvalidParameter(f"ADS is {ads.flavor.value}/k={ads.k}, asked for {flavor.value}/k={k}")
    sk = MinHashSketch(flavor, k, ads.scheme)
    within = ads.within(d)
    if flavor == Flavor.BOTTOM_K:
        sk.items = sorted((e.rank, e.node) for e in within)[:k]
    else:
        for e in within:
            if e.rank < sk.registers[e.slot]:
                sk.registers[e.slot] = e.rank
    return sk


def mh_merge(a: MinHashSketch, b: MinHashSketch) -> MinHashSketch:
    """Sketch of the union of the two underlying sets."""
    if not a.same_params(b):
        raise InvalidParameter("cannot merge sketches with different flavor, k, seed or base")
    out = MinHashSketch(a.flavor, a.k, a.scheme)
    if a.flavor == Flavor.BOTTOM_K:
        merged = {v: r for r, v in a.items}
        merged.update({v: r for r, v in b.items})
        out.items = sorted((r, v) for v, r in merged.items())[: a.k]
    else:
        out.registers = [min(x, y) for x, y in zip(a.registers, b.registers)]
    return out


def _exp_value(scheme: RankScheme, x: float) -> float:
    """Rank mapped to an Exp(1) variable (weighted ranks already are)."""
    return x if scheme.weights is not None else -math.log1p(-x)


def _require_full(sketch: MinHashSketch) -> None:
    if sketch.scheme.base is not None:
        raise InvalidParameter("basic estimators need full ranks; use the HIP estimators for base-b sketches")


def estimate_kmins(sketch: MinHashSketch) -> CardinalityEstimate:
    """``(k-1) / sum(-ln(1 - x_i))``; unbiased for k > 1."""
    if sketch.flavor != Flavor.K_MINS:
        raise InvalidParameter("not a k-mins sketch")
    if sketch.k <= 1:
        raise InvalidParameter("the k-mins estimator needs k > 1")
    _require_full(sketch)
    if sketch.is_empty():
        return CardinalityEstimate(0.0, exact=True)
    total = sum(_exp_value(sketch.scheme, x) for x in sketch.registers)
    return CardinalityEstimate((sketch.k - 1) / total)


def estimate_bottomk(sketch: MinHashSketch) -> CardinalityEstimate:
    """``(k-1) / tau_k``, or the exact count when fewer than k items are held."""
    if sketch.flavor != Flavor.BOTTOM_K:
        raise InvalidParameter("not a bottom-k sketch")
    _require_full(sketch)
    if sketch.scheme.weights is not None:
        raise InvalidParameter("no basic estimator for weighted bottom-k sketches")
    s = len(sketch.items)
    if s < sketch.k:
        return CardinalityEstimate(float(s), exact=True)
    return CardinalityEstimate((sketch.k - 1) / sketch.items[-1][0])


def estimate_kpartition(sketch: MinHashSketch) -> CardinalityEstimate:
    """Conditioned on k' non-empty buckets: ``k'(k'-1) / sum(-ln(1 - x_t))``.

    Empty buckets are left out of the sum. With k' = 1 the estimate is 1
    (the formula would give 0); this is still biased low for small sets.
    """
    if sketch.flavor != Flavor.K_PARTITION:
        raise InvalidParameter("not a k-partition sketch")
    _require_full(sketch)
    full = [x for x in sketch.registers if x < sketch.scheme.sup]
    kp = len(full)
    if kp <= 1:
        return CardinalityEstimate(float(kp), exact=kp == 0)
    total = sum(_exp_value(sketch.scheme, x) for x in full)
    return CardinalityEstimate(kp * (kp - 1) / total)


def estimate(sketch: MinHashSketch) -> CardinalityEstimate:
    return {
        Flavor.BOTTOM_K: estimate_bottomk,
        Flavor.K_MINS: estimate_kmins,
        Flavor.K_PARTITION: estimate_kpartition,
    }[sketch.flavor](sketch)


# -- binary snapshots ------------------------------------------------------------

_MAGIC = b"HMHS"
_VERSION = 1
_HEADER = struct.Struct("<4sHBIdQI")
_CODES = {Flavor.BOTTOM_K: 0, Flavor.K_MINS: 1, Flavor.K_PARTITION: 2}


def write_sketch(sketch: MinHashSketch, fh: BinaryIO) -> None:
    if sketch.scheme.weights is not None:
        raise InvalidParameter("weighted sketches are not serialisable")
    count = len(sketch.items) if sketch.flavor == Flavor.BOTTOM_K else sketch.k
    fh.write(
        _HEADER.pack(_MAGIC, _VERSION, _CODES[sketch.flavor], sketch.k, sketch.scheme.base or 0.0, sketch.scheme.seed, count)
    )
    if sketch.flavor == Flavor.BOTTOM_K:
        for r, v in sketch.items:
            fh.write(struct.pack("<dq", r, v))
    else:
        fh.write(struct.pack(f"<{sketch.k}d", *sketch.registers))


def read_sketch(fh: BinaryIO) -> MinHashSketch:
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise InvalidInput("truncated sketch header")
    magic, version, code, k, base, seed, count = _HEADER.unpack(raw)
    if magic != _MAGIC or version != _VERSION:
        raise InvalidInput("not a MinHash sketch snapshot")
    flavor = {c: f for f, c in _CODES.items()}[code]
    sk = MinHashSketch(flavor, k, RankScheme(seed, base or None))
    if flavor == Flavor.BOTTOM_K:
        sk.items = [struct.unpack("<dq", fh.read(16)) for _ in range(count)]
        sk.items = [(r, v) for r, v in sk.items]
    else:
        sk.registers = list(struct.unpack(f"<{k}d", fh.read(8 * k)))
    return sk


def sketch_bytes(sketch: MinHashSketch) -> bytes:
    buf = io.BytesIO()
    write_sketch(sketch, buf)
    return buf.getvalue()
