"""Pluggable disjoint community detectors and modularity scoring.

Every detector is deterministic given ``(graph, ordering, seed)``: the
ordering fixes the vertex sweep / processing sequence and the seed drives
all tie-breaking, so two runs differ only through those two knobs. All
detectors honor edge weights, which lets the ensemble pipelines reuse
them on derived weighted graphs.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphError, ordering_perm
from .structures import Partition, load_partition

log = logging.getLogger(__name__)


def modularity(g: Graph, p) -> float:
    """Newman modularity ``Q = sum_c [w_c/W - (d_c/(2W))^2]`` (weighted)."""
    labels = p.labels if isinstance(p, Partition) else np.asarray(p, dtype=np.int64)
    if labels.shape[0] != g.n:
        raise GraphError("partition does not cover the vertex set")
    total = g.total_weight()
    if g.m == 0 or total == 0.0:
        raise GraphError("modularity is undefined on a graph with no edges")
    _, idx = np.unique(labels, return_inverse=True)
    k = idx.max() + 1
    internal = np.zeros(k)
    same = idx[g.edge_u] == idx[g.edge_v]
    np.add.at(internal, idx[g.edge_u[same]], g.edge_w[same])
    degs = np.zeros(k)
    np.add.at(degs, idx, g.weighted_degrees())
    return float((internal / total - (degs / (2.0 * total)) ** 2).sum())


# ---------------------------------------------------------------------------
# Louvain


def _louvain_level(adj, wts, self_w, k, sweep, comm_rng):
    """Local-moving phase; returns (labels, moved_any)."""
    nodes = len(adj)
    m2 = float(k.sum())
    comm = np.arange(nodes)
    tot = k.copy()
    moved_any = False
    while True:
        changed = False
        for v in sweep:
            links: dict[int, float] = {}
            for u, w in zip(adj[v], wts[v]):
                cu = comm[u]
                links[cu] = links.get(cu, 0.0) + w
            cv = comm[v]
            tot[cv] -= k[v]
            best_score = None
            best: list[int] = []
            for c in sorted(set(links) | {cv}):
                score = links.get(c, 0.0) - k[v] * tot[c] / m2
                if best_score is None or score > best_score:
                    best_score, best = score, [c]
                elif score == best_score:
                    best.append(c)
            target = best[0] if len(best) == 1 else int(comm_rng.choice(best))
            comm[v] = target
            tot[target] += k[v]
            if target != cv:
                changed = True
                moved_any = True
        if not changed:
            return comm, moved_any


def _aggregate(adj, wts, self_w, comm, order_rank):
    """Collapse communities into super-vertices, summing edge weights."""
    ids, dense = np.unique(comm, return_inverse=True)
    k = ids.shape[0]
    new_self = np.zeros(k)
    cross: list[dict[int, float]] = [dict() for _ in range(k)]
    for v in range(len(adj)):
        cv = dense[v]
        new_self[cv] += self_w[v]
        for u, w in zip(adj[v], wts[v]):
            if u < v:
                continue
            cu = dense[u]
            if cu == cv:
                new_self[cv] += w
            else:
                cross[cv][cu] = cross[cv].get(cu, 0.0) + w
                cross[cu][cv] = cross[cu].get(cv, 0.0) + w
    new_adj = [np.array(sorted(d), dtype=np.int64) for d in cross]
    new_wts = [np.array([d[u] for u in sorted(d)]) for d in cross]
    new_rank = np.full(k, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(new_rank, dense, order_rank)
    return new_adj, new_wts, new_self, new_rank, dense


def louvain(g: Graph, ordering=None, seed: int = 0) -> Partition:
    """Greedy multi-level modularity optimization (Louvain).

    The local-moving phase sweeps vertices in ``ordering`` sequence; on
    aggregated levels communities are swept by the earliest position of
    any member. Ties between equally good moves are broken by ``seed``.
    """
    perm = ordering_perm(ordering, g.n)
    if g.m == 0 or g.total_weight() == 0.0:
        return Partition(np.arange(g.n))
    rng = np.random.default_rng(seed)
    adj = [g.neighbors(v).copy() for v in range(g.n)]
    wts = [g.neighbor_weights(v).copy() for v in range(g.n)]
    self_w = np.zeros(g.n)
    rank = np.empty(g.n, dtype=np.int64)
    rank[perm] = np.arange(g.n)

    mapping = np.arange(g.n)  # original vertex -> current super-vertex
    while True:
        k = np.array([w.sum() for w in wts]) + 2.0 * self_w
        sweep = np.argsort(rank, kind="stable")
        comm, moved = _louvain_level(adj, wts, self_w, k, sweep, rng)
        if not moved:
            break
        adj, wts, self_w, rank, dense = _aggregate(adj, wts, self_w, comm, rank)
        mapping = dense[comm[mapping]]
        if len(adj) == 1:
            break
    return Partition(mapping)


# ---------------------------------------------------------------------------
# Label propagation


def label_propagation(g: Graph, ordering=None, seed: int = 0, max_sweeps: int = 100) -> Partition:
    """Asynchronous label propagation.

    Vertices are processed in ``ordering`` sequence and adopt the label
    with the largest (weighted) count among their neighbors; a vertex
    keeps its current label whenever that label is already maximal, and
    remaining ties are broken uniformly at random by ``seed``. Stops at a
    fixpoint or after ``max_sweeps`` sweeps (with a logged warning).
    """
    perm = ordering_perm(ordering, g.n)
    rng = np.random.default_rng(seed)
    labels = np.arange(g.n)
    for _ in range(max_sweeps):
        changed = False
        for v in perm:
            neigh = g.neighbors(v)
            if neigh.shape[0] == 0:
                continue
            scores: dict[int, float] = {}
            for u, w in zip(neigh, g.neighbor_weights(v)):
                lu = labels[u]
                scores[lu] = scores.get(lu, 0.0) + w
            top = max(scores.values())
            best = sorted(l for l, s in scores.items() if s == top)
            if labels[v] in best:
                continue
            labels[v] = best[0] if len(best) == 1 else int(rng.choice(best))
            changed = True
        if not changed:
            break
    else:
        log.warning("label propagation did not converge within %d sweeps", max_sweeps)
    _, compact = np.unique(labels, return_inverse=True)
    return Partition(compact)


# ---------------------------------------------------------------------------
# Greedy agglomerative modularity (CNM)


def greedy_cnm(g: Graph, ordering=None, seed: int = 0) -> Partition:
    """Agglomerative modularity maximization.

    Repeatedly merges the connected community pair with the largest
    modularity gain (ties seed-broken), all the way down the dendrogram,
    and returns the partition at peak modularity along the sequence.
    """
    perm = ordering_perm(ordering, g.n)
    if g.m == 0 or g.total_weight() == 0.0:
        return Partition(np.arange(g.n))
    rng = np.random.default_rng(seed)
    total = g.total_weight()
    deg = g.weighted_degrees()

    nbr: list[dict[int, float]] = [dict() for _ in range(g.n)]
    for u, v, w in zip(g.edge_u, g.edge_v, g.edge_w):
        nbr[u][v] = nbr[u].get(v, 0.0) + w
        nbr[v][u] = nbr[v].get(u, 0.0) + w
    d = deg.astype(np.float64).copy()
    version = np.zeros(g.n, dtype=np.int64)
    alive = np.ones(g.n, dtype=bool)

    def gain(a: int, b: int) -> float:
        return nbr[a][b] / total - d[a] * d[b] / (2.0 * total * total)

    heap: list[tuple[float, float, int, int, int, int]] = []
    # Push initial candidate pairs in ordering sequence so the seed-driven
    # tiebreak draws depend on the ordering as well.
    for v in perm:
        for u in sorted(nbr[v]):
            if v < u:
                heapq.heappush(heap, (-gain(v, u), rng.random(), v, u, 0, 0))

    best_q = q = 0.0  # tracked relative to the all-singleton baseline
    best_step = 0
    merges: list[tuple[int, int]] = []
    while heap:
        negdq, _, a, b, va, vb = heapq.heappop(heap)
        if not (alive[a] and alive[b]) or version[a] != va or version[b] != vb:
            continue
        if b not in nbr[a]:
            continue
        q += -negdq
        # Absorb the smaller neighbor table into the larger one.
        if len(nbr[b]) > len(nbr[a]):
            a, b = b, a
        merges.append((a, b))
        if q > best_q:
            best_q = q
            best_step = len(merges)
        for c, w in nbr[b].items():
            if c == a:
                continue
            nbr[a][c] = nbr[a].get(c, 0.0) + w
            nbr[c][a] = nbr[a][c]
            del nbr[c][b]
        del nbr[a][b]
        d[a] += d[b]
        alive[b] = False
        nbr[b] = {}
        version[a] += 1
        for c in sorted(nbr[a]):
            heapq.heappush(heap, (-gain(a, c), rng.random(), a, c, version[a], version[c]))

    parent = np.arange(g.n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in merges[:best_step]:
        parent[find(b)] = find(a)
    labels = np.fromiter((find(v) for v in range(g.n)), dtype=np.int64, count=g.n)
    _, compact = np.unique(labels, return_inverse=True)
    return Partition(compact)


# ---------------------------------------------------------------------------
# Walktrap


def walktrap(g: Graph, ordering=None, seed: int = 0, t: int = 4) -> Partition:
    """Random-walk distance agglomeration (walktrap).

    Vertex profiles are the ``t``-step walk probability rows; communities
    are merged Ward-style by the smallest profile-distance increment and
    the final cut is taken at peak modularity. The computation runs in the
    permuted vertex space given by ``ordering``, so vertex order affects
    floating-point tie resolution exactly as it does in adjacency-order
    sensitive implementations.
    """
    import scipy.sparse as sp

    perm = ordering_perm(ordering, g.n)
    n = g.n
    if g.m == 0 or g.total_weight() == 0.0:
        return Partition(np.arange(n))
    rng = np.random.default_rng(seed)
    pos = np.empty(n, dtype=np.int64)
    pos[perm] = np.arange(n)

    rows = np.concatenate([pos[g.edge_u], pos[g.edge_v]])
    cols = np.concatenate([pos[g.edge_v], pos[g.edge_u]])
    data = np.concatenate([g.edge_w, g.edge_w])
    adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    dw = np.asarray(adj.sum(axis=1)).ravel()
    total = g.total_weight()
    inv_deg = np.where(dw > 0, 1.0 / np.where(dw > 0, dw, 1.0), 0.0)
    trans = sp.diags(inv_deg) @ adj
    profile_mat = trans.toarray()
    for _ in range(t - 1):
        profile_mat = trans @ profile_mat

    size = np.ones(n, dtype=np.int64)
    d = dw.copy()
    profiles: dict[int, np.ndarray] = {v: profile_mat[v] for v in range(n)}
    nbr: list[dict[int, float]] = [dict() for _ in range(n)]
    for u, v, w in zip(pos[g.edge_u], pos[g.edge_v], g.edge_w):
        u, v = int(u), int(v)
        nbr[u][v] = nbr[u].get(v, 0.0) + w
        nbr[v][u] = nbr[v].get(u, 0.0) + w
    version = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)

    def dsigma(a: int, b: int) -> float:
        diff = profiles[a] - profiles[b]
        r2 = float((diff * diff * inv_deg).sum())
        return (size[a] * size[b]) / (size[a] + size[b]) * r2 / n

    heap: list[tuple[float, float, int, int, int, int]] = []
    for v in range(n):
        for u in sorted(nbr[v]):
            if v < u:
                heapq.heappush(heap, (dsigma(v, u), rng.random(), v, u, 0, 0))

    q = best_q = 0.0
    best_step = 0
    merges: list[tuple[int, int]] = []
    while heap:
        _, _, a, b, va, vb = heapq.heappop(heap)
        if not (alive[a] and alive[b]) or version[a] != va or version[b] != vb:
            continue
        if b not in nbr[a]:
            continue
        cross = nbr[a][b]
        q += cross / total - d[a] * d[b] / (2.0 * total * total)
        merges.append((a, b))
        if q > best_q:
            best_q = q
            best_step = len(merges)
        profiles[a] = (size[a] * profiles[a] + size[b] * profiles[b]) / (size[a] + size[b])
        del profiles[b]
        size[a] += size[b]
        d[a] += d[b]
        for c, w in nbr[b].items():
            if c == a:
                continue
            nbr[a][c] = nbr[a].get(c, 0.0) + w
            nbr[c][a] = nbr[a][c]
            del nbr[c][b]
        del nbr[a][b]
        alive[b] = False
        nbr[b] = {}
        version[a] += 1
        for c in sorted(nbr[a]):
            heapq.heappush(heap, (dsigma(a, c), rng.random(), a, c, version[a], version[c]))

    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in merges[:best_step]:
        parent[find(b)] = find(a)
    labels = np.empty(n, dtype=np.int64)
    for x in range(n):
        labels[perm[x]] = find(x)
    _, compact = np.unique(labels, return_inverse=True)
    return Partition(compact)


# ---------------------------------------------------------------------------
# registry & external partitions


def import_partition(path, g: Graph) -> Partition:
    """Load an externally produced partition and validate it covers V."""
    return load_partition(path, g.n, names=g.names)


@dataclass(frozen=True)
class BaseDetector:
    """Named community detector: ``detect(graph, ordering, seed) -> Partition``."""

    name: str
    fn: object

    def detect(self, g: Graph, ordering=None, seed: int = 0) -> Partition:
        return self.fn(g, ordering, seed)


DETECTORS = {
    "louvain": BaseDetector("louvain", louvain),
    "labelprop": BaseDetector("labelprop", label_propagation),
    "cnm": BaseDetector("cnm", greedy_cnm),
    "walktrap": BaseDetector("walktrap", walktrap),
}


def get_detectors(names=None) -> list[BaseDetector]:
    """Resolve detector names (default: all four built-ins)."""
    if names is None:
        return [DETECTORS[k] for k in ("louvain", "labelprop", "cnm", "walktrap")]
    out = []
    for x in names:
        if isinstance(x, BaseDetector):
            out.append(x)
        elif isinstance(x, str):
            if x not in DETECTORS:
                raise KeyError(f"unknown detector {x!r}; available: {sorted(DETECTORS)}")
            out.append(DETECTORS[x])
        else:
            raise TypeError(f"cannot interpret {x!r} as a detector")
    return out
