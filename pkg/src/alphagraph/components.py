"""Connectivity analysis: components, largest cluster, bounded exploration.

The full partition is computed with union-find (path halving + union by
size); an independent BFS implementation is kept as a cross-check oracle.
``explore`` is the breadth-first discovery of one vertex's component, halted
once a cutoff number of vertices has been seen, and ``b_fraction`` measures
the set B of vertices living in components of size at least omega.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .sampler import Graph

__all__ = [
    "ComponentSummary",
    "ExplorationResult",
    "StopReason",
    "UnionFind",
    "component_labels",
    "components",
    "components_bfs",
    "explore",
    "b_fraction",
    "omega_for",
]


@dataclass(frozen=True)
class ComponentSummary:
    """Connected-component sizes of one graph, largest first."""

    n: int
    sizes: np.ndarray  # sorted descending, sums to n

    @property
    def largest(self) -> int:
        return int(self.sizes[0]) if self.sizes.size else 0

    @property
    def second_largest(self) -> int:
        return int(self.sizes[1]) if self.sizes.size > 1 else 0

    @property
    def fraction(self) -> float:
        return self.largest / self.n

    @property
    def n_components(self) -> int:
        return int(self.sizes.size)

    def b_count(self, omega: int) -> int:
        """Number of vertices in components of size >= omega."""
        big = self.sizes[self.sizes >= omega]
        return int(big.sum())


class UnionFind:
    """Disjoint sets over {0, ..., n-1} with path halving and union by size."""

    __slots__ = ("parent", "size", "n_sets")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_sets = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_sets -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


def _union_find_over(graph: Graph) -> UnionFind:
    uf = UnionFind(graph.n)
    parent = uf.parent
    size = uf.size
    merged = 0
    # Inlined find/union: this loop dominates the cost of analyzing large
    # sweeps, and attribute lookups per edge are measurable at |E| ~ 1e6.
    for a, b in zip(graph.edges[:, 0].tolist(), graph.edges[:, 1].tolist()):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
        merged += 1
    uf.n_sets = graph.n - merged
    return uf


def component_labels(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex component labels plus per-label sizes.

    Labels are root vertex ids from union-find; sizes[labels] gives each
    vertex's component size.
    """
    uf = _union_find_over(graph)
    parent = np.asarray(uf.parent, dtype=np.int64)
    # One vectorized double-hop pass suffices: after path halving inside the
    # union loop every chain is short, but roots are only guaranteed after
    # full compression, so iterate to a fixed point.
    while True:
        grand = parent[parent]
        if np.array_equal(grand, parent):
            break
        parent = grand
    sizes = np.zeros(graph.n, dtype=np.int64)
    np.add.at(sizes, parent, 1)
    return parent, sizes


def components(graph: Graph) -> ComponentSummary:
    """Exact partition into connected components via union-find."""
    _, sizes = component_labels(graph)
    sizes = sizes[sizes > 0]
    sizes[::-1].sort()
    return ComponentSummary(n=graph.n, sizes=sizes)


def components_bfs(graph: Graph) -> ComponentSummary:
    """Independent BFS implementation; used as a cross-check oracle."""
    indptr, nbrs = graph.adjacency()
    seen = np.zeros(graph.n, dtype=bool)
    sizes = []
    for start in range(graph.n):
        if seen[start]:
            continue
        seen[start] = True
        count = 1
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in nbrs[indptr[x] : indptr[x + 1]].tolist():
                if not seen[y]:
                    seen[y] = True
                    count += 1
                    queue.append(y)
        sizes.append(count)
    out = np.asarray(sorted(sizes, reverse=True), dtype=np.int64)
    return ComponentSummary(n=graph.n, sizes=out)


class StopReason(Enum):
    REACHED_CUTOFF = "reached_cutoff"
    DIED = "died"


@dataclass(frozen=True)
class ExplorationResult:
    start: int
    stopped_reason: StopReason
    explored_count: int
    cutoff: int


def explore(graph: Graph, start: int, omega: int) -> ExplorationResult:
    """Breadth-first exploration from start, halted at omega vertices.

    Stops with REACHED_CUTOFF exactly when start's component has size >=
    omega: exploration within one component can discover only that
    component, so the cutoff is hit if and only if enough vertices exist.
    """
    if not 0 <= start < graph.n:
        raise ValueError(f"start vertex {start} out of range")
    if omega < 1:
        raise ValueError(f"need omega >= 1, got {omega}")
    indptr, nbrs = graph.adjacency()
    seen = {start}
    if len(seen) >= omega:
        return ExplorationResult(start, StopReason.REACHED_CUTOFF, len(seen), omega)
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in nbrs[indptr[x] : indptr[x + 1]].tolist():
            if y in seen:
                continue
            seen.add(y)
            if len(seen) >= omega:
                return ExplorationResult(start, StopReason.REACHED_CUTOFF, len(seen), omega)
            queue.append(y)
    return ExplorationResult(start, StopReason.DIED, len(seen), omega)


def b_fraction(graph: Graph, omega: int) -> float:
    """Fraction of vertices in components of size >= omega."""
    if omega < 1:
        raise ValueError(f"need omega >= 1, got {omega}")
    return components(graph).b_count(omega) / graph.n


def omega_for(rule: str, n: int) -> int:
    """Resolve a named cutoff rule: "log4" -> ceil(ln(n)^4), "loglog" ->
    ceil(ln ln n), or a literal positive integer."""
    if rule == "log4":
        return max(1, math.ceil(math.log(n) ** 4))
    if rule == "loglog":
        return max(1, math.ceil(math.log(math.log(n))))
    try:
        value = int(rule)
    except ValueError:
        raise ValueError(f"unknown omega rule {rule!r}") from None
    if value < 1:
        raise ValueError(f"omega must be >= 1, got {value}")
    return value
