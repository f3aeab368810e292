"""Meta-clustering ensemble: disjoint, overlapping and fuzzy output.

Base communities become the vertices of a multipartite weighted graph
(one part per base partition, no edges within a part). Re-clustering that
graph yields meta-communities; a vertex-to-meta-community association
matrix then drives all three output modes.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .detectors import BaseDetector, get_detectors
from .endisco import _resolve_ralgo
from .ensemble import BaseSolutionSet, generate_base_solutions, _derived_seeds
from .graph import Graph, GraphError, random_ordering
from .structures import Cover, FuzzyAssignment, Partition

MATCHES = ("jc", "ap")
ASSOCIATIONS = ("simple", "weighted")


def match_jc(c_i, c_j) -> float:
    """Jaccard coefficient |A n B| / |A u B|."""
    a, b = set(c_i), set(c_j)
    if not a or not b:
        raise GraphError("matching needs non-empty communities")
    return len(a & b) / len(a | b)


def match_ap(c_i, c_j) -> float:
    """Average precision 0.5*(|A n B|/|A| + |A n B|/|B|)."""
    a, b = set(c_i), set(c_j)
    if not a or not b:
        raise GraphError("matching needs non-empty communities")
    inter = len(a & b)
    return 0.5 * (inter / len(a) + inter / len(b))


@dataclass
class MetaGraph:
    """Weighted graph over base communities (one part per base partition)."""

    communities: list[np.ndarray]
    partition_of: np.ndarray  # part index of each meta-vertex
    graph: Graph

    @property
    def n_meta(self) -> int:
        return len(self.communities)


def build_meta_graph(solutions: BaseSolutionSet, w: str = "jc") -> MetaGraph:
    """Multipartite community graph with jc/ap matching weights.

    Vertices of a single base partition are never connected; zero-weight
    cross pairs are omitted.
    """
    if w not in MATCHES:
        raise GraphError(f"unknown matching function {w!r}")
    parts = solutions.partitions()
    if len(parts) < 2:
        raise GraphError("meta graph needs at least two base partitions")
    comms: list[np.ndarray] = []
    part_of: list[int] = []
    for pi, p in enumerate(parts):
        for c in p.communities():
            comms.append(c)
            part_of.append(pi)
    part_of = np.asarray(part_of, dtype=np.int64)
    clu = len(comms)
    n = solutions.n

    membership = np.zeros((clu, n), dtype=np.int64)
    for j, mem in enumerate(comms):
        membership[j, mem] = 1
    inter = membership @ membership.T
    sizes = membership.sum(axis=1)
    if w == "jc":
        union = sizes[:, None] + sizes[None, :] - inter
        with np.errstate(invalid="ignore"):
            weights = inter / union
    else:
        weights = 0.5 * (inter / sizes[:, None] + inter / sizes[None, :])
    cross = part_of[:, None] != part_of[None, :]
    keep = cross & (inter > 0)
    iu, iv = np.nonzero(np.triu(keep, k=1))
    if iu.shape[0] == 0:
        raise GraphError("meta graph has no cross-partition overlap")
    mg = Graph(clu, np.stack([iu, iv], axis=1), weights=weights[iu, iv])
    return MetaGraph(communities=comms, partition_of=part_of, graph=mg)


def meta_cluster(mg: MetaGraph, ralgo=None, seed: int = 0) -> np.ndarray:
    """Cluster the meta graph; returns one meta-community label per
    base community (compact 0..L-1). Defaults to label propagation,
    the strongest performer on the dense weighted meta graph."""
    det = _resolve_ralgo(ralgo, default="labelprop")
    rs = _derived_seeds(seed + 3, 2)
    part = det.detect(mg.graph, random_ordering(mg.n_meta, rs[0]), rs[1])
    _, labels = np.unique(part.labels, return_inverse=True)
    return labels


def assoc_simple(v: int, member_communities) -> float:
    """Fraction of the meta-community's base communities containing v."""
    sets = [set(c) for c in member_communities]
    if not sets:
        raise GraphError("association needs a non-empty meta-community")
    return sum(v in s for s in sets) / len(sets)


def assoc_weighted(v: int, member_communities) -> float:
    """Coverage-weighted agreement of the member communities containing v.

    The fraction of member communities containing ``v`` is scaled by how
    consistently those communities agree on v's context (intersection
    over union of the containing sets); 0 if no member contains v. A
    vertex present in every member of a meta-community of identical sets
    scores 1.
    """
    sets = [set(c) for c in member_communities]
    if not sets:
        raise GraphError("association needs a non-empty meta-community")
    containing = [s for s in sets if v in s]
    if not containing:
        return 0.0
    inter = set.intersection(*containing)
    union = set.union(*containing)
    return (len(containing) / len(sets)) * (len(inter) / len(union))


def association_matrix(
    mg: MetaGraph, meta_labels: np.ndarray, n: int, assoc: str = "weighted"
) -> np.ndarray:
    """``n x L`` matrix of vertex-to-meta-community association scores."""
    if assoc not in ASSOCIATIONS:
        raise GraphError(f"unknown association function {assoc!r}")
    L = int(meta_labels.max()) + 1
    A = np.zeros((n, L))
    for l in range(L):
        members = [mg.communities[j] for j in np.flatnonzero(meta_labels == l)]
        B = np.zeros((len(members), n), dtype=bool)
        for r, mem in enumerate(members):
            B[r, mem] = True
        if assoc == "simple":
            A[:, l] = B.sum(axis=0) / len(members)
        else:
            # Group vertices by which member communities contain them, then
            # compute each signature's intersection/union size once.
            count = B.sum(axis=0)
            touched = np.flatnonzero(count > 0)
            if touched.shape[0] == 0:
                continue
            sig = np.packbits(B[:, touched], axis=0)
            _, first, inverse = np.unique(
                sig.T.copy().view([("", sig.dtype)] * sig.shape[0]).ravel(),
                return_index=True,
                return_inverse=True,
            )
            for s, v0 in enumerate(first):
                rows = B[:, touched[v0]]
                inter = B[rows].all(axis=0).sum()
                union = B[rows].any(axis=0).sum()
                coverage = rows.sum() / len(members)
                A[touched[inverse == s], l] = coverage * inter / union
    return A


def extract_disjoint(A: np.ndarray, g: Graph) -> Partition:
    """Row-argmax assignment; labels are association-matrix column indices.

    Ties (and all-zero rows) are resolved toward the community holding the
    majority of the vertex's neighbors, then toward the lowest column.
    """
    n, L = A.shape
    if n != g.n:
        raise GraphError("association matrix does not match the graph")
    best = A.max(axis=1)
    is_max = A == best[:, None]
    provisional = np.argmax(is_max, axis=1)
    labels = provisional.copy()
    ambiguous = np.flatnonzero((is_max.sum(axis=1) > 1) | (best == 0.0))
    for v in ambiguous:
        candidates = np.arange(L) if best[v] == 0.0 else np.flatnonzero(is_max[v])
        cand = set(int(c) for c in candidates)
        counts: dict[int, int] = {}
        for u in g.neighbors(v):
            lu = int(provisional[u])
            if lu in cand:
                counts[lu] = counts.get(lu, 0) + 1
        if counts:
            top = max(counts.values())
            labels[v] = min(c for c, k in counts.items() if k == top)
        else:
            labels[v] = min(cand)
    return Partition(labels)


def community_probability(avg_similarity: float) -> float:
    """Connection probability ``exp(AS^2) / (1 + exp(AS^2))``."""
    e = np.exp(avg_similarity * avg_similarity)
    return float(e / (1.0 + e))


def average_row_similarity(A: np.ndarray, g: Graph, members) -> float:
    """Mean cosine similarity of association rows over internal edges (0 if none)."""
    mem = set(int(v) for v in members)
    norms = np.linalg.norm(A, axis=1)
    total = 0.0
    count = 0
    for v in sorted(mem):
        for u in g.neighbors(v):
            if u > v and int(u) in mem:
                nu, nv = norms[u], norms[v]
                total += float(A[u] @ A[v] / (nu * nv)) if nu > 0 and nv > 0 else 0.0
                count += 1
    return total / count if count else 0.0


def auto_threshold_cover(A: np.ndarray, g: Graph) -> Cover:
    """Overlapping structure grown from the disjoint argmax assignment.

    Communities are processed in descending connection probability; each
    candidate vertex adjacent to the community joins when the probability
    does not drop. Members of already-processed communities are final and
    take no further memberships, which keeps strong communities intact.
    """
    n, L = A.shape
    base = extract_disjoint(A, g)
    memberships = [{int(l)} for l in base.labels]

    norms = np.linalg.norm(A, axis=1, keepdims=True)
    An = np.divide(A, norms, out=np.zeros_like(A), where=norms > 0)

    groups: dict[int, list[int]] = {}
    for v, l in enumerate(base.labels):
        groups.setdefault(int(l), []).append(v)

    stats = []
    for col, members in groups.items():
        mem = set(members)
        s = cnt = 0.0
        for v in members:
            for u in g.neighbors(v):
                if u > v and int(u) in mem:
                    s += float(An[u] @ An[v])
                    cnt += 1
        p = community_probability(s / cnt if cnt else 0.0)
        stats.append((col, s, cnt, p))
    stats.sort(key=lambda t: (-t[3], -len(groups[t[0]]), t[0]))

    finalized = np.zeros(n, dtype=bool)
    for col, s, cnt, p in stats:
        inside = set(groups[col])
        tested = set(inside)
        queue = deque(
            sorted(
                {
                    int(u)
                    for v in inside
                    for u in g.neighbors(v)
                    if int(u) not in inside and not finalized[u]
                }
            )
        )
        queued = set(queue)
        while queue:
            v = queue.popleft()
            queued.discard(v)
            if v in inside or finalized[v] or v in tested:
                continue
            tested.add(v)
            add_s = add_c = 0.0
            for u in g.neighbors(v):
                if int(u) in inside:
                    add_s += float(An[u] @ An[v])
                    add_c += 1
            if add_c == 0.0:
                continue
            new_as = (s + add_s) / (cnt + add_c)
            if community_probability(new_as) >= p:
                inside.add(v)
                memberships[v].add(col)
                s += add_s
                cnt += add_c
                p = community_probability(new_as)
                for u in sorted(int(x) for x in g.neighbors(v)):
                    if u not in inside and not finalized[u] and u not in tested and u not in queued:
                        queue.append(u)
                        queued.add(u)
        finalized[list(inside)] = True
    return Cover(memberships)


def extract_fuzzy(A: np.ndarray) -> FuzzyAssignment:
    """Row-normalize the association matrix; all-zero rows become uniform."""
    A = np.asarray(A, dtype=np.float64)
    sums = A.sum(axis=1, keepdims=True)
    out = np.divide(A, sums, out=np.full_like(A, 1.0 / A.shape[1]), where=sums > 0)
    return FuzzyAssignment(out, list(range(A.shape[1])))


@dataclass
class MedocResult:
    solutions: BaseSolutionSet
    meta_graph: MetaGraph
    meta_labels: np.ndarray
    association: np.ndarray
    disjoint: Partition
    cover: Cover | None
    fuzzy: FuzzyAssignment | None
    base_timings: list[float]
    total_seconds: float


def medoc_run(
    g: Graph,
    detectors=None,
    k: int | None = None,
    w: str = "jc",
    assoc: str = "simple",
    ralgo=None,
    mode: str = "disjoint",
    seed: int = 0,
    threads: int = 1,
    solutions: BaseSolutionSet | None = None,
) -> MedocResult:
    """Full pipeline with diagnostics; pass ``solutions`` to reuse base runs."""
    if mode not in ("disjoint", "overlapping", "fuzzy", "all"):
        raise GraphError(f"unknown mode {mode!r}")
    t0 = time.perf_counter()
    if solutions is None:
        solutions = generate_base_solutions(g, detectors, k=k, seed=seed, threads=threads)
    mg = build_meta_graph(solutions, w=w)
    labels = meta_cluster(mg, ralgo=ralgo, seed=seed)
    A = association_matrix(mg, labels, g.n, assoc=assoc)
    disjoint = extract_disjoint(A, g)
    cover = auto_threshold_cover(A, g) if mode in ("overlapping", "all") else None
    fuzzy = extract_fuzzy(A) if mode in ("fuzzy", "all") else None
    return MedocResult(
        solutions=solutions,
        meta_graph=mg,
        meta_labels=labels,
        association=A,
        disjoint=disjoint,
        cover=cover,
        fuzzy=fuzzy,
        base_timings=list(solutions.timings),
        total_seconds=time.perf_counter() - t0,
    )


def medoc(
    g: Graph,
    detectors=None,
    k: int | None = None,
    w: str = "jc",
    assoc: str = "simple",
    ralgo=None,
    mode: str = "disjoint",
    seed: int = 0,
    threads: int = 1,
):
    """Meta-clustering ensemble detection.

    Returns a Partition, Cover, or FuzzyAssignment according to ``mode``.
    Defaults follow the strongest measured configuration: Jaccard
    matching with the simple (coverage) association function.
    """
    res = medoc_run(
        g, detectors, k=k, w=w, assoc=assoc, ralgo=ralgo, mode=mode, seed=seed, threads=threads
    )
    if mode == "disjoint":
        return res.disjoint
    if mode == "overlapping":
        return res.cover
    if mode == "fuzzy":
        return res.fuzzy
    return res
