"""Horizontal visibility graphs over interval series.

Two samples ``a < b`` see each other when every sample strictly between
them is strictly lower than both. Equal values block the view. Vertices
are 0-based here; :func:`write_edge_list` writes 1-based indices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NoEdges, SeriesTooShort
from .preprocess import IBISequence


@dataclass(frozen=True)
class HVGraph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    degrees: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "HVGraph":
        edges = tuple(sorted((min(a, b), max(a, b)) for a, b in edges))
        deg = np.zeros(n, dtype=int)
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        return cls(n, edges, deg)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    @property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def __len__(self) -> int:
        return self.vertex_count


def _values(I) -> np.ndarray:
    if isinstance(I, IBISequence):
        return I.intervals
    return np.asarray(I, dtype=float).ravel()


def build_hvg(I) -> HVGraph:
    """Linear-time construction with a stack of still-visible samples.

    The stack holds a strictly decreasing run of values. A new sample sees
    every lower sample it pops and then the first sample at least as high;
    an equal sample is popped too because it blocks everything behind it.
    """
    x = _values(I)
    edges: list[tuple[int, int]] = []
    stack: list[int] = []
    for j, v in enumerate(x):
        while stack and x[stack[-1]] < v:
            edges.append((stack.pop(), j))
        if stack:
            edges.append((stack[-1], j))
            if x[stack[-1]] == v:
                stack.pop()
        stack.append(j)
    return HVGraph.from_edges(x.size, edges)


def eccentricities(G: HVGraph) -> np.ndarray:
    """Breadth-first eccentricity of every vertex (the graph is connected)."""
    n = G.vertex_count
    adj = G.adjacency
    ecc = np.zeros(n, dtype=int)
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        far = 0
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = du
                    far = du
                    queue.append(w)
        ecc[s] = far
    return ecc


def graph_radius(G: HVGraph) -> int:
    if G.vertex_count <= 1:
        return 0
    return int(eccentricities(G).min())


def hvg_radius(I) -> int:
    return graph_radius(build_hvg(I))


def mixing_matrix(G: HVGraph) -> dict[tuple[int, int], float]:
    """Joint degree distribution over edge ends, ``{(a, b): e_ab}``.

    Each undirected edge contributes ``1 / 2m`` to both ``e_ab`` and
    ``e_ba``, so the result is symmetric and sums to one.
    """
    m = len(G.edges)
    if m == 0:
        raise NoEdges("mixing matrix of a graph without edges")
    counts: dict[tuple[int, int], int] = {}
    deg = G.degrees
    for u, v in G.edges:
        a, b = int(deg[u]), int(deg[v])
        counts[(a, b)] = counts.get((a, b), 0) + 1
        counts[(b, a)] = counts.get((b, a), 0) + 1
    return {key: c / (2.0 * m) for key, c in sorted(counts.items())}


def disassortative_entropy(G: HVGraph) -> float:
    e = np.fromiter(mixing_matrix(G).values(), dtype=float)
    return float(np.sum(e * np.log(e)))


def hvg_disassortative_entropy(I) -> float:
    x = _values(I)
    if x.size < 2:
        raise SeriesTooShort(f"need at least 2 intervals, got {x.size}")
    return disassortative_entropy(build_hvg(x))


def write_edge_list(G: HVGraph, path) -> None:
    with open(path, "w") as fh:
        for a, b in G.edges:
            fh.write(f"{a + 1} {b + 1}\n")
