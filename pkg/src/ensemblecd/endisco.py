"""Ensemble disjoint detection through a posterior feature space.

Every vertex is mapped to a distance profile over all base communities,
converted to a posterior membership distribution, and compared pairwise;
the resulting vertex-similarity matrix is sparsified back into a weighted
graph and re-clustered.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .detectors import BaseDetector, get_detectors
from .ensemble import BaseSolutionSet, generate_base_solutions, _derived_seeds
from .graph import Graph, GraphError, bfs_distances, hop_matrix, induced_subgraph, random_ordering
from .structures import Partition

INVOLVEMENTS = ("rcc", "idc")
SIMILARITIES = ("cos", "che")


def community_centroid(g: Graph, members) -> int:
    """Vertex with the highest closeness centrality inside the community.

    Closeness is computed on the induced subgraph; disconnected parts use
    the reachable-count correction. Ties go to the lowest vertex id.
    """
    sub, ids = induced_subgraph(g, members)
    k = sub.n
    if k == 1:
        return int(ids[0])
    best_v, best_c = int(ids[0]), -1.0
    for x in range(k):
        dist = bfs_distances(sub, x)
        reach = np.isfinite(dist) & (dist > 0)
        r = int(reach.sum())
        if r == 0:
            closeness = 0.0
        else:
            closeness = (r / (k - 1)) * (r / float(dist[reach].sum()))
        if closeness > best_c:
            best_c, best_v = closeness, int(ids[x])
    return best_v


def involvement_rcc(g: Graph, v: int, members) -> float:
    """|C| over the summed hop distances from ``v`` to the community.

    ``v``'s zero distance to itself is excluded when it belongs to the
    community; a singleton community containing only ``v`` scores 1. Any
    unreachable member makes the involvement 0.
    """
    mem = np.unique(np.asarray(list(members), dtype=np.int64))
    if mem.shape[0] == 0:
        raise GraphError("involvement needs a non-empty community")
    others = mem[mem != v]
    if others.shape[0] == 0:
        return 1.0
    dist = bfs_distances(g, v)
    s = float(dist[others].sum())
    if not np.isfinite(s):
        return 0.0
    return others.shape[0] / s


def involvement_idc(g: Graph, v: int, members) -> float:
    """Inverse hop distance from ``v`` to the community centroid.

    Defined as 1 when ``v`` is the centroid itself and 0 when the centroid
    is unreachable.
    """
    mem = np.unique(np.asarray(list(members), dtype=np.int64))
    if mem.shape[0] == 0:
        raise GraphError("involvement needs a non-empty community")
    uc = community_centroid(g, mem)
    if uc == v:
        return 1.0
    d = float(bfs_distances(g, v)[uc])
    if not np.isfinite(d):
        return 0.0
    if d == 0.0:
        return 1.0
    return 1.0 / d


def feature_profiles(g: Graph, solutions: BaseSolutionSet, inv: str = "rcc"):
    """Distance profiles ``d = 1 - involvement`` over all base communities.

    Returns the ``n x Clu`` profile matrix and the list of base-community
    vertex arrays (one column per community, in solution order). Dense by
    design; this is the pipeline's memory hot spot.
    """
    if inv not in INVOLVEMENTS:
        raise GraphError(f"unknown involvement {inv!r}")
    comms: list[np.ndarray] = []
    for part in solutions.partitions():
        comms.extend(part.communities())
    dist = hop_matrix(g)
    n = g.n
    F = np.empty((n, len(comms)))
    if inv == "rcc":
        for j, mem in enumerate(comms):
            s = dist[:, mem].sum(axis=1)
            cnt = np.full(n, float(mem.shape[0]))
            cnt[mem] -= 1.0
            with np.errstate(invalid="ignore", divide="ignore"):
                col = np.where(cnt == 0.0, 1.0, cnt / s)
            F[:, j] = 1.0 - np.where(np.isfinite(col), col, 0.0)
    else:
        for j, mem in enumerate(comms):
            uc = community_centroid(g, mem)
            d = dist[:, uc]
            with np.errstate(divide="ignore"):
                col = np.where(d == 0.0, 1.0, 1.0 / d)
            F[:, j] = 1.0 - np.where(np.isfinite(col), col, 0.0)
    return F, comms


def posterior(profile) -> np.ndarray:
    """Posterior membership distribution from a distance profile.

    ``P(C_i|v) = (D_v - F_i + 1) / (Clu*D_v + Clu - sum_k F_k)`` with
    ``D_v = max_i F_i``. Rows sum to 1 and every entry is positive thanks
    to the add-one smoothing in the numerator.
    """
    F = np.asarray(profile, dtype=np.float64)
    single = F.ndim == 1
    F = np.atleast_2d(F)
    if F.shape[1] < 1:
        raise GraphError("posterior needs at least one community")
    dv = F.max(axis=1, keepdims=True)
    clu = F.shape[1]
    denom = clu * dv + clu - F.sum(axis=1, keepdims=True)
    P = (dv - F + 1.0) / denom
    return P[0] if single else P


def build_ensemble_matrix(profiles, sim: str = "cos") -> np.ndarray:
    """Pairwise profile similarity: cosine or Chebyshev (1 - max abs diff).

    Exactly symmetric with unit diagonal.
    """
    P = np.atleast_2d(np.asarray(profiles, dtype=np.float64))
    if sim == "cos":
        norms = np.linalg.norm(P, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise GraphError("zero-norm profile in ensemble matrix")
        Pn = P / norms
        M = Pn @ Pn.T
    elif sim == "che":
        from scipy.spatial.distance import squareform, pdist

        M = 1.0 - squareform(pdist(P, metric="chebyshev"))
    else:
        raise GraphError(f"unknown similarity {sim!r}")
    M = (M + M.T) / 2.0
    np.clip(M, -1.0, 1.0, out=M)
    np.fill_diagonal(M, 1.0)
    return M


def ensemble_graph(M: np.ndarray, g: Graph) -> Graph:
    """Sparsify the ensemble matrix into a weighted re-clustering graph.

    Keeps a pair when it is an original edge or lands in the mutual
    top-ceil(avg degree) similarity lists of both endpoints. Cosine values
    on posterior profiles are nearly constant, so kept similarities are
    mapped through their empirical percentile to restore weight contrast
    (monotone in similarity, ties share a rank).
    """
    from scipy.stats import rankdata

    n = M.shape[0]
    kk = max(1, int(np.ceil(2.0 * g.m / g.n)))
    masked = M.copy()
    np.fill_diagonal(masked, -np.inf)
    sel = np.zeros((n, n), dtype=bool)
    if kk >= n - 1:
        sel[:] = True
        np.fill_diagonal(sel, False)
    else:
        top = np.argpartition(-masked, kk, axis=1)[:, :kk]
        rows = np.repeat(np.arange(n), kk)
        sel[rows, top.ravel()] = True
    keep = sel & sel.T
    keep[g.edge_u, g.edge_v] = True
    keep[g.edge_v, g.edge_u] = True
    iu, iv = np.nonzero(np.triu(keep, k=1))
    w = M[iu, iv]
    if w.shape[0] > 1:
        w = (rankdata(w, method="average") - 1.0) / (w.shape[0] - 1)
    pos = w > 0.0
    if not np.any(pos):
        raise GraphError("ensemble matrix sparsified to an empty graph")
    return Graph(n, np.stack([iu[pos], iv[pos]], axis=1), weights=w[pos])


def _resolve_ralgo(ralgo, default: str = "walktrap") -> BaseDetector:
    if isinstance(ralgo, BaseDetector):
        return ralgo
    return get_detectors([ralgo if ralgo is not None else default])[0]


@dataclass
class EndiscoResult:
    partition: Partition
    solutions: BaseSolutionSet
    reclustering_graph: Graph
    base_timings: list[float]
    total_seconds: float


def endisco_run(
    g: Graph,
    detectors=None,
    k: int | None = None,
    inv: str = "rcc",
    sim: str = "cos",
    ralgo=None,
    seed: int = 0,
    threads: int = 1,
    solutions: BaseSolutionSet | None = None,
) -> EndiscoResult:
    """Full pipeline with diagnostics; pass ``solutions`` to reuse base runs."""
    t0 = time.perf_counter()
    if solutions is None:
        solutions = generate_base_solutions(g, detectors, k=k, seed=seed, threads=threads)
    F, _ = feature_profiles(g, solutions, inv=inv)
    P = posterior(F)
    M = build_ensemble_matrix(P, sim=sim)
    eg = ensemble_graph(M, g)
    rs = _derived_seeds(seed + 2, 2)
    part = _resolve_ralgo(ralgo).detect(eg, random_ordering(g.n, rs[0]), rs[1])
    return EndiscoResult(
        partition=part,
        solutions=solutions,
        reclustering_graph=eg,
        base_timings=list(solutions.timings),
        total_seconds=time.perf_counter() - t0,
    )


def endisco(
    g: Graph,
    detectors=None,
    k: int | None = None,
    inv: str = "rcc",
    sim: str = "cos",
    ralgo=None,
    seed: int = 0,
    threads: int = 1,
) -> Partition:
    """Ensemble disjoint community detection (defaults: rcc involvement,
    cosine similarity, walktrap re-clustering)."""
    return endisco_run(
        g, detectors, k=k, inv=inv, sim=sim, ralgo=ralgo, seed=seed, threads=threads
    ).partition
