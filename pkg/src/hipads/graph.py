"""Directed graphs with positive arc lengths, plus edge-list I/O."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .rank import InvalidInput


@dataclass
class Graph:
    """Adjacency lists over nodes ``0..n-1``; the transpose is kept alongside.

    ``out[u]`` holds ``(v, w)`` for every arc u -> v of length w.
    """

    n: int
    out: list[list[tuple[int, float]]] = field(repr=False)
    inc: list[list[tuple[int, float]]] = field(repr=False)

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int, float]], undirected: bool = False) -> "Graph":
        out: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        inc: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for u, v, w in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInput(f"arc ({u}, {v}) outside node range 0..{n - 1}")
            if not w > 0 or math.isinf(w):
                raise InvalidInput(f"arc ({u}, {v}): length must be positive and finite, got {w}")
            out[u].append((v, float(w)))
            inc[v].append((u, float(w)))
            if undirected:
                out[v].append((u, float(w)))
                inc[u].append((v, float(w)))
        return cls(n, out, inc)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.out)

    def arcs(self):
        for u, adj in enumerate(self.out):
            for v, w in adj:
                yield u, v, w

    def lengths(self) -> list[float]:
        return [w for _, _, w in self.arcs()]

    def adjacency(self, transpose: bool) -> list[list[tuple[int, float]]]:
        return self.inc if transpose else self.out


def dijkstra(adj: list[list[tuple[int, float]]], source: int) -> dict[int, float]:
    """Plain single-source shortest path distances over ``adj``."""
    dist = {source: 0.0}
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def read_edge_list(stream: TextIO, undirected: bool = False, n: int | None = None) -> Graph:
    """Parse ``u v [w]`` lines; ``#`` starts a comment, weights default to 1.

    Errors carry the offending line number.
    """
    arcs = []
    max_id = -1
    for lineno, line in enumerate(stream, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise InvalidInput(f"line {lineno}: expected 'u v [w]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise InvalidInput(f"line {lineno}: {exc}") from None
        if u < 0 or v < 0:
            raise InvalidInput(f"line {lineno}: node ids must be non-negative")
        if not w > 0 or math.isinf(w):
            raise InvalidInput(f"line {lineno}: arc length must be positive, got {w}")
        arcs.append((u, v, w))
        max_id = max(max_id, u, v)
    return Graph.from_arcs(max(max_id + 1, n or 0), arcs, undirected=undirected)


def write_edge_list(g: Graph, stream: TextIO) -> None:
    for u, v, w in g.arcs():
        stream.write(f"{u} {v} {w:g}\n")
