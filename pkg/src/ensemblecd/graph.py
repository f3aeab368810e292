"""Graph container, edge-list I/O, vertex orderings, and BFS primitives.

Vertices are dense integers ``0..n-1``. Edge-list files may use arbitrary
string tokens as vertex ids; :func:`load_edge_list` builds a sorted symbol
table and keeps the original names on the graph so files round-trip.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

log = logging.getLogger(__name__)


class GraphError(ValueError):
    """Malformed graph input or an invalid graph operation."""


class Graph:
    """Undirected simple graph with optional non-negative edge weights.

    Parameters
    ----------
    n : int
        Number of vertices; ids are ``0..n-1``.
    edges : array-like of shape (m, 2)
        Unordered vertex pairs. Self-loops and duplicate edges are rejected
        here; use :func:`load_edge_list` for forgiving file input.
    weights : array-like of shape (m,), optional
        Non-negative edge weights, default 1.0 everywhere.
    names : sequence of str, optional
        External vertex names aligned with internal ids.
    """

    __slots__ = ("n", "edge_u", "edge_v", "edge_w", "_adj", "_adj_w", "names", "io_stats")

    def __init__(self, n, edges, weights=None, names=None):
        n = int(n)
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        m = edges.shape[0]
        if m:
            if edges.min() < 0 or edges.max() >= n:
                raise GraphError("edge endpoint out of range 0..n-1")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphError("self-loops are not allowed")
        u = np.minimum(edges[:, 0], edges[:, 1])
        v = np.maximum(edges[:, 0], edges[:, 1])
        order = np.lexsort((v, u))
        u, v = u[order], v[order]
        if weights is None:
            w = np.ones(m, dtype=np.float64)
        else:
            w = np.asarray(weights, dtype=np.float64).reshape(-1)[order]
            if w.shape[0] != m:
                raise GraphError("weights length does not match edge count")
            if m and w.min() < 0:
                raise GraphError("edge weights must be non-negative")
        if m > 1 and np.any((u[1:] == u[:-1]) & (v[1:] == v[:-1])):
            raise GraphError("duplicate edges are not allowed")

        self.n = n
        self.edge_u = u
        self.edge_v = v
        self.edge_w = w
        self.names = list(names) if names is not None else None
        self.io_stats = {}

        # CSR-style adjacency: neighbor ids per vertex, sorted, weights aligned.
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        ww = np.concatenate([w, w])
        idx = np.lexsort((dst, src))
        src, dst, ww = src[idx], dst[idx], ww[idx]
        counts = np.bincount(src, minlength=n)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        self._adj = [dst[offsets[i]:offsets[i + 1]] for i in range(n)]
        self._adj_w = [ww[offsets[i]:offsets[i + 1]] for i in range(n)]
        for a in (self.edge_u, self.edge_v, self.edge_w):
            a.setflags(write=False)

    @property
    def m(self) -> int:
        return self.edge_u.shape[0]

    def neighbors(self, v: int) -> np.ndarray:
        return self._adj[v]

    def neighbor_weights(self, v: int) -> np.ndarray:
        return self._adj_w[v]

    def degrees(self) -> np.ndarray:
        return np.array([a.shape[0] for a in self._adj], dtype=np.int64)

    def weighted_degrees(self) -> np.ndarray:
        return np.array([w.sum() for w in self._adj_w], dtype=np.float64)

    def total_weight(self) -> float:
        return float(self.edge_w.sum())

    def has_edge(self, u: int, v: int) -> bool:
        row = self._adj[u]
        i = np.searchsorted(row, v)
        return i < row.shape[0] and row[i] == v

    def to_csr(self, weighted: bool = False) -> sp.csr_matrix:
        data = np.concatenate([self.edge_w, self.edge_w]) if weighted else np.ones(2 * self.m)
        rows = np.concatenate([self.edge_u, self.edge_v])
        cols = np.concatenate([self.edge_v, self.edge_u])
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def name_of(self, v: int) -> str:
        return self.names[v] if self.names is not None else str(v)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class VertexOrdering:
    """A permutation of ``0..n-1`` together with the seed that produced it."""

    perm: np.ndarray
    seed: int

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(perm.shape[0])):
            raise GraphError("ordering is not a permutation of 0..n-1")
        object.__setattr__(self, "perm", perm)

    def __len__(self):
        return self.perm.shape[0]


def random_ordering(n: int, seed: int) -> VertexOrdering:
    """Deterministic uniformly random permutation of ``0..n-1`` for a seed."""
    if n < 1:
        raise GraphError("ordering needs n >= 1")
    perm = np.random.default_rng(seed).permutation(n)
    return VertexOrdering(perm=perm, seed=seed)


def ordering_perm(ordering, n: int) -> np.ndarray:
    """Accept a VertexOrdering, a raw permutation, or None (identity)."""
    if ordering is None:
        return np.arange(n, dtype=np.int64)
    if isinstance(ordering, VertexOrdering):
        perm = ordering.perm
    else:
        perm = np.asarray(ordering, dtype=np.int64)
    if perm.shape[0] != n:
        raise GraphError("ordering length does not match vertex count")
    return perm


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source`` to every vertex.

    Unreachable vertices are marked with ``inf`` (float array, never an
    integer sentinel).
    """
    if not 0 <= source < g.n:
        raise GraphError("source vertex out of range")
    dist = np.full(g.n, np.inf)
    dist[source] = 0.0
    q = deque([source])
    while q:
        u = q.popleft()
        du = dist[u] + 1.0
        for v in g.neighbors(u):
            if dist[v] == np.inf:
                dist[v] = du
                q.append(v)
    return dist


def hop_matrix(g: Graph) -> np.ndarray:
    """All-pairs hop distances (float matrix with ``inf`` off-component)."""
    if g.m == 0:
        d = np.full((g.n, g.n), np.inf)
        np.fill_diagonal(d, 0.0)
        return d
    return csgraph.shortest_path(g.to_csr(), method="D", unweighted=True)


def induced_subgraph(g: Graph, vertices) -> tuple[Graph, np.ndarray]:
    """Subgraph on ``vertices`` with ids remapped to ``0..k-1``.

    Returns the subgraph and the array mapping new ids back to the
    original ones (``original_id = mapping[new_id]``).
    """
    verts = np.unique(np.asarray(list(vertices), dtype=np.int64))
    if verts.shape[0] == 0:
        raise GraphError("cannot induce a subgraph on an empty vertex set")
    if verts.min() < 0 or verts.max() >= g.n:
        raise GraphError("vertex out of range in induced_subgraph")
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[verts] = np.arange(verts.shape[0])
    mask = (new_id[g.edge_u] >= 0) & (new_id[g.edge_v] >= 0)
    edges = np.stack([new_id[g.edge_u[mask]], new_id[g.edge_v[mask]]], axis=1)
    names = [g.name_of(v) for v in verts] if g.names is not None else None
    sub = Graph(verts.shape[0], edges, weights=g.edge_w[mask], names=names)
    return sub, verts


def _sorted_symbols(tokens) -> list[str]:
    # Numeric files sort numerically so "0 1\n1 2" maps 0->0, 1->1, 2->2.
    try:
        return sorted(tokens, key=int)
    except ValueError:
        return sorted(tokens)


def load_edge_list(path) -> Graph:
    """Read a whitespace edge list: ``u v [w]`` per line, ``#`` comments.

    Duplicate edges and self-loops are dropped (counts reported in
    ``Graph.io_stats`` and logged). Vertex tokens may be arbitrary strings;
    they are mapped to dense ids through a sorted symbol table.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphError(f"{path}: line {lineno}: expected 'u v [w]', got {line!r}")
            try:
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise GraphError(f"{path}: line {lineno}: bad weight token {parts[2]!r}")
            rows.append((parts[0], parts[1], w))
    if not rows:
        raise GraphError(f"{path}: empty graph (no edges)")

    symbols = _sorted_symbols({t for r in rows for t in r[:2]})
    index = {s: i for i, s in enumerate(symbols)}
    seen = set()
    edges, weights = [], []
    self_loops = duplicates = 0
    for a, b, w in rows:
        u, v = index[a], index[b]
        if u == v:
            self_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        edges.append(key)
        weights.append(w)
    if not edges:
        raise GraphError(f"{path}: empty graph (all lines were self-loops)")
    if self_loops or duplicates:
        log.warning("%s: dropped %d self-loops and %d duplicate edges", path, self_loops, duplicates)
    g = Graph(len(symbols), edges, weights=weights, names=symbols)
    g.io_stats = {"self_loops_dropped": self_loops, "duplicates_dropped": duplicates}
    return g


def save_edge_list(g: Graph, path) -> None:
    """Write the graph in the edge-list format accepted by ``load_edge_list``."""
    with open(path, "w", encoding="utf-8") as fh:
        weighted = not np.allclose(g.edge_w, 1.0)
        for u, v, w in zip(g.edge_u, g.edge_v, g.edge_w):
            if weighted:
                fh.write(f"{g.name_of(u)} {g.name_of(v)} {w!r}\n")
            else:
                fh.write(f"{g.name_of(u)} {g.name_of(v)}\n")
