"""Morris approximate counters with weighted increments and merges."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rank import InvalidInput, InvalidParameter


def _split_increment(x, y, b):
    """Deterministic part of adding ``y`` at exponent ``x``.

    Returns ``(x + i, p)``: ``i`` is the largest step whose estimate gain
    does not exceed ``y``, and ``p`` the probability of one more step that
    makes the update unbiased. Works elementwise on arrays.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.float64)
    bx = np.power(b, x.astype(np.float64))
    i = np.floor(np.log(y / bx + 1.0) / np.log(b)).astype(np.int64)
    # log rounding can land one step off either way
    i = np.where(bx * (np.power(b, i.astype(np.float64)) - 1.0) > y, i - 1, i)
    i = np.where(bx * (np.power(b, (i + 1).astype(np.float64)) - 1.0) <= y, i + 1, i)
    leftover = y - bx * (np.power(b, i.astype(np.float64)) - 1.0)
    x_new = x + i
    p = leftover / (np.power(b, x_new.astype(np.float64)) * (b - 1.0))
    return x_new, np.clip(p, 0.0, 1.0)


@dataclass
class MorrisCounter:
    """Counter storing an exponent ``x``; the estimate is ``base**x - 1``."""

    base: float = 2.0
    x: int = 0
    seed: int | None = None
    rng: np.random.Generator = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.base > 1.0:
            raise InvalidParameter(f"base must be > 1, got {self.base}")
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)

    @classmethod
    def for_hip(cls, k: int, seed: int | None = None) -> "MorrisCounter":
        """Counter with base 1 + 1/k, suited to accumulating HIP weights."""
        return cls(1.0 + 1.0 / k, seed=seed)

    def estimate(self) -> float:
        return self.base**self.x - 1.0

    def outcomes(self, y: float) -> list[tuple[float, int]]:
        """``(probability, new exponent)`` pairs an add of ``y`` can produce."""
        if not y > 0:
            raise InvalidInput(f"increment must be positive, got {y}")
        x_new, p = _split_increment(self.x, y, self.base)
        x_new, p = int(x_new), float(p)
        return [(1.0 - p, x_new), (p, x_new + 1)] if p > 0 else [(1.0, x_new)]

    def add(self, y: float) -> "MorrisCounter":
        if not y > 0:
            raise InvalidInput(f"increment must be positive, got {y}")
        x_new, p = _split_increment(self.x, y, self.base)
        self.x = int(x_new) + int(self.rng.random() < float(p))
        return self

    def merge(self, other: "MorrisCounter") -> "MorrisCounter":
        """Fold ``other`` into this counter (an add of its estimate)."""
        if other.base != self.base:
            raise InvalidParameter("cannot merge counters with different bases")
        if other.x > 0:
            self.add(other.estimate())
        return self


def morris_add(c: MorrisCounter, y: float) -> MorrisCounter:
    return c.add(y)


def morris_merge(a: MorrisCounter, c: MorrisCounter) -> MorrisCounter:
    return a.merge(c)


def morris_estimate(c: MorrisCounter) -> float:
    return c.estimate()


def simulate_adds(base: float, increments, trials: int, seed: int = 0) -> np.ndarray:
    """Final estimates of ``trials`` independent counters fed ``increments``.

    Vectorised over trials; each step is the same update rule as
    :meth:`MorrisCounter.add`.
    """
    rng = np.random.default_rng(seed)
    x = np.zeros(trials, dtype=np.int64)
    for y in increments:
        x_new, p = _split_increment(x, y, base)
        x = x_new + (rng.random(trials) < p)
    return np.power(base, x.astype(np.float64)) - 1.0
