"""Watts-Strogatz small-world graphs and the structural metrics used to validate them.

Graphs are stored as immutable CSR arrays (``indptr``/``indices``) with sorted
neighbor lists, which keeps the numba kernels in this package and in
:mod:`swcompete.dynamics` simple.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ConfigError, DomainError
from .rng import seed_streams

log = logging.getLogger(__name__)

MAX_REDRAWS = 64


@dataclass(frozen=True)
class WsConfig:
    n: int
    k_ws: int = 14
    rho_ws: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError("n", f"need at least 3 nodes, got {self.n}")
        if self.k_ws % 2 or self.k_ws < 2 or self.k_ws >= self.n:
            raise ConfigError("k_ws", f"must be even with 2 <= k_ws < n, got {self.k_ws}")
        if not 0.0 <= self.rho_ws <= 1.0:
            raise ConfigError("rho_ws", f"must lie in [0, 1], got {self.rho_ws}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph in CSR form. Neighbor lists are sorted."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    rewired: int = field(default=0, compare=False)

    def __post_init__(self):
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False

    @classmethod
    def from_adjacency(cls, adjacency, rewired: int = 0) -> "Graph":
        n = len(adjacency)
        degrees = np.fromiter((len(a) for a in adjacency), dtype=np.int64, count=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.empty(indptr[-1], dtype=np.int64)
        for v, nbrs in enumerate(adjacency):
            indices[indptr[v]:indptr[v + 1]] = sorted(nbrs)
        return cls(n, indptr, indices, rewired)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        adjacency = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise DomainError(f"self-loop at node {u}")
            adjacency[u].add(v)
            adjacency[v].add(u)
        return cls.from_adjacency(adjacency)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1]) // 2

    def neighbors(self, v: int) -> np.ndarray:
        if not 0 <= v < self.n:
            raise DomainError(f"unknown node id {v}")
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[set[int]]:
        return [set(self.neighbors(v).tolist()) for v in range(self.n)]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, sorted."""
        out = []
        for u in range(self.n):
            for v in self.neighbors(u).tolist():
                if u < v:
                    out.append((u, v))
        return out

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None


def _ring_sets(n: int, k_ws: int) -> list[set[int]]:
    half = k_ws // 2
    adjacency = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, half + 1):
            v = (u + j) % n
            adjacency[u].add(v)
            adjacency[v].add(u)
    return adjacency


def build_ring_lattice(cfg: WsConfig) -> Graph:
    """k_ws-regular ring: node i joined to the k_ws/2 nearest nodes on each side."""
    return Graph.from_adjacency(_ring_sets(cfg.n, cfg.k_ws))


def _lattice_edge_order(n: int, k_ws: int) -> list[tuple[int, int]]:
    # canonical visit order: ascending source, then ascending clockwise offset
    half = k_ws // 2
    return [(u, (u + j) % n) for u in range(n) for j in range(1, half + 1)]


def rewire(g: Graph, rho_ws: float, rng: np.random.Generator, k_ws: int | None = None) -> Graph:
    """Rewire the far endpoint of each lattice edge with probability ``rho_ws``.

    ``g`` must be a ring lattice; ``k_ws`` defaults to its (uniform) degree.
    Stream consumption: one uniform per lattice edge in canonical order, drawn
    up front, then one integer per candidate endpoint for each selected edge.
    A candidate creating a self-loop or duplicate is redrawn; after
    ``MAX_REDRAWS`` failures the edge stays where it is.
    """
    if not 0.0 <= rho_ws <= 1.0:
        raise ConfigError("rho_ws", f"must lie in [0, 1], got {rho_ws}")
    if k_ws is None:
        k_ws = int(g.degrees[0]) if g.n else 0
    if rho_ws == 0.0:
        return g

    n = g.n
    adjacency = g.adjacency
    order = _lattice_edge_order(n, k_ws)
    coins = rng.random(len(order))
    rewired = 0
    for (u, v), coin in zip(order, coins):
        if coin >= rho_ws:
            continue
        for _ in range(MAX_REDRAWS):
            w = int(rng.integers(n))
            if w != u and w not in adjacency[u]:
                break
        else:
            log.info("rewire: no valid endpoint for edge (%d, %d) after %d draws", u, v, MAX_REDRAWS)
            continue
        adjacency[u].discard(v)
        adjacency[v].discard(u)
        adjacency[u].add(w)
        adjacency[w].add(u)
        rewired += 1
    return Graph.from_adjacency(adjacency, rewired=rewired)


@functools.lru_cache(maxsize=256)
def watts_strogatz(cfg: WsConfig) -> Graph:
    """Ring lattice followed by rewiring, driven by the graph stream of ``cfg.seed``."""
    graph_rng, _ = seed_streams(cfg.seed)
    return rewire(build_ring_lattice(cfg), cfg.rho_ws, graph_rng, cfg.k_ws)


@numba.njit(cache=True)
def _triangle_fractions(indptr, indices):
    n = indptr.shape[0] - 1
    out = np.zeros(n)
    mark = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        lo, hi = indptr[v], indptr[v + 1]
        deg = hi - lo
        if deg < 2:
            continue
        for e in range(lo, hi):
            mark[indices[e]] = True
        links = 0
        for e in range(lo, hi):
            u = indices[e]
            for f in range(indptr[u], indptr[u + 1]):
                if mark[indices[f]]:
                    links += 1
        for e in range(lo, hi):
            mark[indices[e]] = False
        # each neighbor-neighbor link seen from both ends
        out[v] = links / (deg * (deg - 1))
    return out


def clustering_coefficient(g: Graph) -> float:
    """Mean local clustering; nodes of degree < 2 count as 0."""
    if g.n == 0:
        raise DomainError("clustering coefficient of an empty graph")
    local = _triangle_fractions(g.indptr, g.indices)
    return float(np.sum(local) / g.n)


@numba.njit(cache=True)
def _bfs_all_sources(indptr, indices, labels, target):
    # sum of hop distances over ordered pairs inside the component labelled `target`
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    total = 0
    for s in range(n):
        if labels[s] != target:
            continue
        dist[:] = -1
        dist[s] = 0
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u] + 1
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if dist[w] < 0:
                    dist[w] = du
                    total += du
                    queue[tail] = w
                    tail += 1
    return total


@numba.njit(cache=True)
def _components(indptr, indices):
    n = indptr.shape[0] - 1
    labels = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    count = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = count
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if labels[w] < 0:
                    labels[w] = count
                    queue[tail] = w
                    tail += 1
        count += 1
    return labels, count


def connected_components(g: Graph) -> np.ndarray:
    """Component label per node, labels numbered in order of lowest member."""
    labels, _ = _components(g.indptr, g.indices)
    return labels


@dataclass(frozen=True)
class PathLength:
    mean: float
    disconnected: bool
    component_size: int

    def __float__(self):
        return self.mean


def characteristic_path_length(g: Graph) -> PathLength:
    """Mean shortest-path hop count over unordered node pairs.

    On a disconnected graph the mean is taken over pairs in the largest
    component (lowest label on ties) and ``disconnected`` is set.
    """
    if g.n == 0:
        raise DomainError("path length of an empty graph")
    labels = connected_components(g)
    sizes = np.bincount(labels)
    target = int(np.argmax(sizes))
    size = int(sizes[target])
    disconnected = len(sizes) > 1
    if disconnected:
        log.info("graph has %d components; averaging over largest (%d nodes)", len(sizes), size)
    if size < 2:
        return PathLength(0.0, disconnected, size)
    total = _bfs_all_sources(g.indptr, g.indices, labels, target)
    return PathLength(total / (size * (size - 1)), disconnected, size)


def degree_histogram(g: Graph) -> np.ndarray:
    """``hist[d]`` = number of nodes of degree ``d``."""
    return np.bincount(g.degrees, minlength=1)
