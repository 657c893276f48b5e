"""Seeded rank, bucket and permutation assignment for node identifiers.

Every sketch in the package obtains its randomness from here, so sketches
built under the same seed are coordinated: a node gets the same rank no
matter which set (neighborhood, stream prefix) it is being sketched in.

Hashing is splitmix64 finalisation applied to ``node ^ mix(seed)``. The
scalar functions work on Python ints; the ``*_array`` variants do the same
arithmetic on ``numpy.uint64`` arrays and return identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_BUCKET_SALT = 0xB5AD4ECEDA1CE2A9
_DERIVE_SALT = 0xD1B54A32D192ED03

# 53 random bits give the full double mantissa on [0, 1)
_RANK_SHIFT = 11
_RANK_SCALE = 2.0**-53
MIN_RANK = _RANK_SCALE


class InvalidParameter(ValueError):
    """A parameter is outside the range an operation supports."""


class InvalidInput(ValueError):
    """Input data violates a precondition (duplicates, bad ordering, ...)."""


def mix64(z: int) -> int:
    """splitmix64 finaliser: a bijective avalanche mix of a 64-bit word."""
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64) + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, index: int) -> int:
    """Independent child seed, e.g. one per k-mins permutation."""
    return mix64((seed & MASK64) ^ mix64((index & MASK64) ^ _DERIVE_SALT))


def node_hash(node: int, seed: int) -> int:
    return mix64((node & MASK64) ^ mix64(seed & MASK64))


def node_hash_array(nodes: np.ndarray, seed: int) -> np.ndarray:
    key = np.uint64(mix64(seed & MASK64))
    return mix64_array(np.asarray(nodes).astype(np.uint64) ^ key)


def _hash_to_unit(h: int) -> float:
    m = h >> _RANK_SHIFT
    return m * _RANK_SCALE if m else MIN_RANK


def rank_of(node: int, seed: int) -> float:
    """Uniform rank in (0, 1) for ``node`` under ``seed``.

    The all-zero hash output maps to 2**-53 so the rank is never 0.
    """
    return _hash_to_unit(node_hash(node, seed))


def rank_array(nodes: np.ndarray, seed: int) -> np.ndarray:
    m = node_hash_array(nodes, seed) >> np.uint64(_RANK_SHIFT)
    r = m.astype(np.float64) * _RANK_SCALE
    r[m == 0] = MIN_RANK
    return r


def bucket_of(node: int, k: int, seed: int) -> int:
    """Bucket in ``range(k)`` (0-based) for the k-partition flavor."""
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    return node_hash(node, seed ^ _BUCKET_SALT) % k


def bucket_array(nodes: np.ndarray, k: int, seed: int) -> np.ndarray:
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    h = node_hash_array(nodes, seed ^ _BUCKET_SALT)
    return (h % np.uint64(k)).astype(np.int64)


@dataclass(frozen=True)
class BaseBRank:
    """A rank rounded down to ``base ** -exponent``."""

    exponent: int
    base: float

    @property
    def value(self) -> float:
        return self.base ** -self.exponent


def _check_base(b: float) -> None:
    if not b > 1.0:
        raise InvalidParameter(f"base must be > 1, got {b}")


def base_b_exponent(r: float, b: float) -> int:
    """``ceil(-log_b r)``; exact for b == 2 on 53-bit ranks."""
    _check_base(b)
    if not 0.0 < r < 1.0:
        if r == 0.0:
            raise InvalidParameter("rank 0 has no base-b exponent")
        raise InvalidParameter(f"rank must lie in (0, 1), got {r}")
    if b == 2.0:
        return math.ceil(-math.log2(r))
    return math.ceil(-math.log(r) / math.log(b))


def base_b_rank(r: float, b: float) -> BaseBRank:
    return BaseBRank(base_b_exponent(r, b), b)


def base_b_exponent_array(r: np.ndarray, b: float) -> np.ndarray:
    _check_base(b)
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0.0):
        raise InvalidParameter("rank 0 has no base-b exponent")
    if b == 2.0:
        h = np.ceil(-np.log2(r))
    else:
        h = np.ceil(-np.log(r) / math.log(b))
    return h.astype(np.int64)


def weighted_rank(node: int, beta: float, seed: int) -> float:
    """Exponentially distributed rank with rate ``beta``."""
    if not beta > 0.0:
        raise InvalidParameter(f"beta must be > 0, got {beta}")
    return -math.log1p(-rank_of(node, seed)) / beta


def permutation_ranks(nodes: Sequence[int], seed: int) -> dict[int, int]:
    """Map each node to a position in 1..n ordered by (rank_of, node)."""
    if len(set(nodes)) != len(nodes):
        raise InvalidInput("duplicate node ids")
    order = sorted(nodes, key=lambda v: (rank_of(v, seed), v))
    return {v: i + 1 for i, v in enumerate(order)}


@dataclass(frozen=True)
class RankScheme:
    """Which rank values a sketch uses: full, base-b rounded, or weighted.

    ``slot`` selects the permutation for k-mins sketches (slot 0 is the
    master seed's permutation for bottom-k and k-partition).
    """

    seed: int
    base: float | None = None
    weights: Mapping[int, float] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.base is not None:
            _check_base(self.base)
        if self.weights is not None:
            if self.base is not None:
                raise InvalidParameter("weighted ranks cannot be discretized")
            for v, w in self.weights.items():
                if not w > 0:
                    raise InvalidInput(f"node {v}: weight must be > 0, got {w}")

    @property
    def sup(self) -> float:
        """Supremum of the rank range (the k-th smallest of a short set)."""
        return math.inf if self.weights is not None else 1.0

    def slot_seed(self, slot: int) -> int:
        return self.seed if slot == 0 else derive_seed(self.seed, slot)

    def beta(self, node: int) -> float:
        if self.weights is None:
            return 1.0
        return self.weights.get(node, 1.0)

    def value(self, node: int, slot: int = 0) -> float:
        r = rank_of(node, self.slot_seed(slot))
        if self.weights is not None:
            return -math.log1p(-r) / self.beta(node)
        if self.base is not None:
            return self.base ** -base_b_exponent(r, self.base)
        return r

    def values(self, nodes: Iterable[int], slot: int = 0) -> np.ndarray:
        nodes = np.fromiter(nodes, dtype=np.uint64)
        r = rank_array(nodes, self.slot_seed(slot))
        if self.weights is not None:
            betas = np.array([self.beta(int(v)) for v in nodes])
            return -np.log1p(-r) / betas
        if self.base is not None:
            return self.base ** -base_b_exponent_array(r, self.base).astype(np.float64)
        return r

    def bucket(self, node: int, k: int) -> int:
        return bucket_of(node, k, self.seed)

    def inclusion_probability(self, node: int, threshold: float) -> float:
        """P(fresh rank of ``node`` < threshold) for a threshold in rank units."""
        if threshold == math.inf:
            return 1.0
        if self.weights is not None:
            return -math.expm1(-self.beta(node) * threshold)
        return min(threshold, 1.0)
