"""Reverse Cuthill-McKee ordering of a matrix's significant-entry pattern."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import DTYPE, Permutation, as_dense
from .errors import DimensionError, ValidationError


@dataclass(frozen=True)
class AdjacencyGraph:
    """Undirected graph as sorted neighbor lists, no self-loops."""

    n: int
    neighbors: tuple[tuple[int, ...], ...]

    @property
    def degree(self) -> list[int]:
        return [len(nb) for nb in self.neighbors]

    @classmethod
    def from_edges(cls, n: int, edges) -> "AdjacencyGraph":
        adj = [set() for _ in range(n)]
        for i, j in edges:
            if i != j:
                adj[i].add(j)
                adj[j].add(i)
        return cls(n, tuple(tuple(sorted(s)) for s in adj))


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got {a.shape}")


def build_adjacency(a, tol: float = 1e-6) -> AdjacencyGraph:
    """Edge ``{i, j}`` (i != j) whenever ``|a[i,j]| > tol`` or ``|a[j,i]| > tol``."""
    a = as_dense(a)
    _require_square(a)
    if tol < 0:
        raise ValidationError("tol must be nonnegative")
    mask = np.abs(a) > tol
    mask |= mask.T
    np.fill_diagonal(mask, False)
    neighbors = tuple(tuple(np.flatnonzero(row).tolist()) for row in mask)
    return AdjacencyGraph(a.shape[0], neighbors)


def _bfs_levels(g: AdjacencyGraph, start: int) -> list[list[int]]:
    seen = {start}
    levels = [[start]]
    while True:
        nxt = []
        for v in levels[-1]:
            for w in g.neighbors[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            return levels
        levels.append(nxt)


def pseudo_peripheral_node(g: AdjacencyGraph, component: list[int]) -> int:
    """Double-BFS heuristic: hop to a min-degree node of the last BFS level
    while the eccentricity keeps growing. Ties go to the smallest index."""
    deg = g.degree
    start = min(component, key=lambda v: (deg[v], v))
    levels = _bfs_levels(g, start)
    while True:
        cand = min(levels[-1], key=lambda v: (deg[v], v))
        cand_levels = _bfs_levels(g, cand)
        if len(cand_levels) <= len(levels):
            return start
        start, levels = cand, cand_levels


def rcm_order(g: AdjacencyGraph) -> Permutation:
    """Reverse Cuthill-McKee, one connected component at a time.

    Components are taken in order of their smallest node index; within a
    component the Cuthill-McKee sequence (neighbors by increasing degree,
    then index) is reversed before being appended.
    """
    deg = g.degree
    visited = np.zeros(g.n, dtype=bool)
    order: list[int] = []
    for root in range(g.n):
        if visited[root]:
            continue
        component = [v for level in _bfs_levels(g, root) for v in level]
        start = pseudo_peripheral_node(g, component)
        seq = [start]
        visited[start] = True
        queue = deque([start])
        while queue:
            v = queue.popleft()
            fresh = [w for w in g.neighbors[v] if not visited[w]]
            fresh.sort(key=lambda w: (deg[w], w))
            for w in fresh:
                visited[w] = True
                queue.append(w)
            seq.extend(fresh)
        order.extend(reversed(seq))
    return Permutation(np.array(order, dtype=np.int64))


def apply_sym_perm(a, perm: Permutation) -> np.ndarray:
    """``out[i, j] = a[perm.forward[i], perm.forward[j]]``."""
    a = np.asarray(a, dtype=DTYPE)
    if a.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    _require_square(a)
    if len(perm) != a.shape[0]:
        raise DimensionError(f"permutation of length {len(perm)} for a {a.shape[0]}x{a.shape[0]} matrix")
    f = perm.forward
    return a[np.ix_(f, f)]


def bandwidth(a, tol: float = 0.0) -> int:
    """Largest ``|i - j|`` over entries with ``|a[i, j]| > tol``."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    _require_square(a)
    i, j = np.nonzero(np.abs(a) > tol)
    if i.size == 0:
        return 0
    return int(np.abs(i - j).max())
