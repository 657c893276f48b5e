"""Streaming distinct counters: HIP on HyperLogLog registers, HIP on bottom-k,
and the classic HyperLogLog estimate as a baseline.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .rank import (
    InvalidParameter,
    base_b_exponent,
    base_b_exponent_array,
    bucket_array,
    bucket_of,
    rank_array,
    rank_of,
)


def register_bits(base_exp: int) -> int:
    """Register width for base ``2**(1/base_exp)``: 5 bits plus ceil(log2 i)."""
    return 5 + math.ceil(math.log2(base_exp))


def required_register_bits(n: int, base: float) -> int:
    """Bits so registers rarely saturate while counting up to ``n``.

    Sized for 16n so that only a small fraction of registers can reach the cap.
    """
    return math.ceil(math.log2(math.log(16 * n, base)))


@dataclass
class HllHipCounter:
    """k-partition registers of base-b rank exponents plus a running HIP count.

    With the defaults (``base_exp=1``) this is the HyperLogLog sketch with
    5-bit registers saturating at 31. ``base_exp=i`` switches to base
    ``2**(1/i)`` with correspondingly wider registers.
    """

    k: int
    seed: int = 0
    base_exp: int = 1
    cap: int | None = None
    registers: list[int] = field(default_factory=list)
    count: float = 0.0
    updates: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameter(f"k must be >= 1, got {self.k}")
        if self.base_exp < 1:
            raise InvalidParameter(f"base exponent must be >= 1, got {self.base_exp}")
        if self.cap is None:
            self.cap = 2 ** register_bits(self.base_exp) - 1
        if not self.registers:
            self.registers = [0] * self.k

    @property
    def base(self) -> float:
        return 2.0 ** (1.0 / self.base_exp)

    @property
    def saturated(self) -> bool:
        return all(m >= self.cap for m in self.registers)

    def update_probability(self) -> float:
        """Chance that a new distinct element changes a register."""
        b = self.base
        return math.fsum(b ** -m for m in self.registers if m < self.cap) / self.k

    def _apply(self, bucket: int, h: int) -> None:
        tau = self.update_probability()
        self.count += 1.0 / tau
        self.registers[bucket] = h
        self.updates += 1

    def offer(self, element: int) -> bool:
        r = rank_of(element, self.seed)
        h = min(self.cap, base_b_exponent(r, self.base))
        bucket = bucket_of(element, self.k, self.seed)
        if h > self.registers[bucket]:
            self._apply(bucket, h)
            return True
        return False

    def offer_many(self, elements: Iterable[int] | np.ndarray) -> int:
        """Same result as offering each element in turn; returns #updates."""
        elements = np.asarray(elements if isinstance(elements, np.ndarray) else list(elements), dtype=np.uint64)
        if elements.size == 0:
            return 0
        h = np.minimum(base_b_exponent_array(rank_array(elements, self.seed), self.base), self.cap)
        buckets = bucket_array(elements, self.k, self.seed)
        order = np.argsort(buckets, kind="stable")
        hb, bb = h[order], buckets[order]
        span = self.cap + 1
        running = np.maximum.accumulate(hb + bb * span) - bb * span
        before = np.empty_like(running)
        before[0] = -1
        before[1:] = running[:-1]
        first = np.ones(len(bb), dtype=bool)
        first[1:] = bb[1:] != bb[:-1]
        before[first] = -1
        start = np.asarray(self.registers, dtype=np.int64)[bb]
        hit = hb > np.maximum(before, start)
        positions = np.sort(order[hit])
        for p in positions:
            b, hv = int(buckets[p]), int(h[p])
            if hv > self.registers[b]:
                self._apply(b, hv)
        return len(positions)

    def estimate(self) -> float:
        return self.count

    def merged_registers(self, other: "HllHipCounter") -> list[int]:
        """Register-wise max; the HIP counts themselves cannot be merged."""
        if (self.k, self.seed, self.base_exp, self.cap) != (other.k, other.seed, other.base_exp, other.cap):
            raise InvalidParameter("counters have different parameters")
        return [max(a, b) for a, b in zip(self.registers, other.registers)]


def hll_alpha(k: int) -> float:
    return {16: 0.673, 32: 0.697, 64: 0.709}.get(k, 0.7213 / (1 + 1.079 / k))


def hll_baseline_estimate(registers: list[int] | np.ndarray) -> tuple[float, float]:
    """HyperLogLog raw estimate and the small/large range corrected one."""
    regs = np.asarray(registers, dtype=np.float64)
    k = len(regs)
    raw = hll_alpha(k) * k * k / float(np.sum(2.0**-regs))
    corrected = raw
    two32 = 2.0**32
    if raw <= 2.5 * k:
        zeros = int(np.count_nonzero(regs == 0))
        if zeros:
            corrected = k * math.log(k / zeros)
    elif raw > two32 / 30:
        corrected = -two32 * math.log1p(-raw / two32)
    return raw, corrected


@dataclass
class BottomKHipCounter:
    """Bottom-k sketch over full ranks plus a running HIP count."""

    k: int
    seed: int = 0
    count: float = 0.0
    updates: int = 0
    _kept: list[tuple[float, int]] = field(default_factory=list, repr=False)  # negated (rank, id)
    _members: set[int] = field(default_factory=set, repr=False)

    @property
    def threshold(self) -> float:
        return -self._kept[0][0] if len(self._kept) >= self.k else 1.0

    def _admit(self, element: int, r: float) -> None:
        self.count += 1.0 / self.threshold
        self.updates += 1
        heapq.heappush(self._kept, (-r, -element))
        self._members.add(element)
        if len(self._kept) > self.k:
            _, gone = heapq.heappop(self._kept)
            self._members.discard(-gone)

    def offer(self, element: int) -> bool:
        if element in self._members:
            return False
        r = rank_of(element, self.seed)
        if len(self._kept) < self.k or r < self.threshold:
            self._admit(element, r)
            return True
        return False

    def offer_many(self, elements: Iterable[int] | np.ndarray) -> int:
        """Same result as offering each element in turn; returns #updates."""
        elements = np.asarray(elements if isinstance(elements, np.ndarray) else list(elements), dtype=np.uint64)
        ranks = rank_array(elements, self.seed)
        before = self.updates
        start, step = 0, max(self.k, 16)
        while start < len(ranks):
            stop = min(len(ranks), start + step)
            # the threshold only falls, so anything above it now stays out
            for i in np.flatnonzero(ranks[start:stop] < self.threshold) + start:
                e = int(elements[i])
                if e not in self._members and (len(self._kept) < self.k or ranks[i] < self.threshold):
                    self._admit(e, float(ranks[i]))
            start, step = stop, step * 2
        return self.updates - before

    def estimate(self) -> float:
        return self.count
