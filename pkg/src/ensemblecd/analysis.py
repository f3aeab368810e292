"""Post-hoc studies: community-centric core-periphery profiles, stable
communities across snapshots, solution degeneracy, and runtime ratios."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .detectors import BaseDetector, get_detectors
from .endisco import endisco_run
from .ensemble import consensus_clustering_report, generate_base_solutions
from .graph import Graph, GraphError, induced_subgraph, random_ordering
from .medoc import medoc_run
from .structures import Cover, Partition

ASSOC_BUCKETS = np.array([0.0, 0.25, 0.5, 0.75])  # bucket b covers [edge_b, next)
N_TIERS = 3


def k_shell_decomposition(g: Graph) -> np.ndarray:
    """Shell index per vertex by iterative peeling.

    Level ``k`` repeatedly removes vertices of remaining degree <= k;
    vertices isolated from the start get shell 0, every other vertex a
    shell >= 1 (its core number).
    """
    deg = g.degrees().astype(np.int64)
    shell = np.zeros(g.n, dtype=np.int64)
    alive = deg > 0
    k = 0
    while alive.any():
        k += 1
        while True:
            peel = np.flatnonzero(alive & (deg <= k))
            if peel.shape[0] == 0:
                break
            shell[peel] = k
            alive[peel] = False
            for v in peel:
                for u in g.neighbors(v):
                    if alive[u]:
                        deg[u] -= 1
    return shell


@dataclass
class ShellProfile:
    """Shell-tier vs association-bucket cross-tabulations per community."""

    community_shells: dict[int, dict[int, int]]
    community_tables: dict[int, np.ndarray]
    table: np.ndarray  # aggregated tiers x buckets
    pairs: np.ndarray  # (shell, association) rows pooled over communities


def _tier(shell: int, lo: int, hi: int) -> int:
    if hi == lo:
        return N_TIERS - 1
    width = (hi - lo + 1) / N_TIERS
    return min(N_TIERS - 1, int((shell - lo) / width))


def _bucket(a: float) -> int:
    return min(len(ASSOC_BUCKETS) - 1, int(np.searchsorted(ASSOC_BUCKETS, a, side="right") - 1))


def core_periphery_profile(g: Graph, communities, A: np.ndarray, columns=None) -> ShellProfile:
    """Per-community k-shell decomposition crossed with association scores.

    ``communities`` is a Partition or Cover whose labels index association
    columns (override with ``columns`` mapping label -> column). Shell
    tiers split the observed shell range into three equal bands; the
    association axis uses the four quarter buckets of [0, 1].
    """
    if isinstance(communities, Partition):
        groups = {int(l): mem for l, mem in zip(communities.community_ids(), communities.communities())}
    elif isinstance(communities, Cover):
        groups = {int(l): mem for l, mem in communities.communities().items()}
    else:
        raise TypeError("communities must be a Partition or a Cover")
    colmap = {l: (columns[l] if columns is not None else l) for l in groups}

    shells: dict[int, dict[int, int]] = {}
    tables: dict[int, np.ndarray] = {}
    agg = np.zeros((N_TIERS, len(ASSOC_BUCKETS)), dtype=np.int64)
    pairs: list[tuple[int, float]] = []
    for label, members in groups.items():
        sub, ids = induced_subgraph(g, members)
        local = k_shell_decomposition(sub)
        shells[label] = {int(v): int(s) for v, s in zip(ids, local)}
        lo, hi = int(local.min()), int(local.max())
        tab = np.zeros((N_TIERS, len(ASSOC_BUCKETS)), dtype=np.int64)
        for v, s in zip(ids, local):
            a = float(A[v, colmap[label]])
            tab[_tier(int(s), lo, hi), _bucket(a)] += 1
            pairs.append((int(s), a))
        tables[label] = tab
        agg += tab
    return ShellProfile(
        community_shells=shells,
        community_tables=tables,
        table=agg,
        pairs=np.array(pairs) if pairs else np.zeros((0, 2)),
    )


@dataclass
class StableReport:
    """Per-snapshot stable groups and consecutive-pair agreement."""

    stable_vertices: list[np.ndarray]
    stable_labels: list[np.ndarray]
    consecutive: list[dict | None]


def stable_communities(
    snapshots,
    detectors=None,
    k: int | None = None,
    seed: int = 0,
    tol: float = 1e-9,
    **medoc_params,
) -> StableReport:
    """Group fully-associated vertices per snapshot and compare neighbors.

    A vertex is stable when its peak association reaches 1 (within
    ``tol``); consecutive snapshots are compared by NMI/ARI restricted to
    vertices stable in both, reported as None (undefined) when the common
    stable set is empty.
    """
    verts: list[np.ndarray] = []
    labels: list[np.ndarray] = []
    for i, g in enumerate(snapshots):
        res = medoc_run(g, detectors, k=k, seed=seed + i, mode="disjoint", **medoc_params)
        peak = res.association.max(axis=1)
        stable = np.flatnonzero(peak >= 1.0 - tol)
        verts.append(stable)
        labels.append(np.argmax(res.association[stable], axis=1))
    consecutive: list[dict | None] = []
    for i in range(len(snapshots) - 1):
        common, ia, ib = np.intersect1d(verts[i], verts[i + 1], return_indices=True)
        if common.shape[0] == 0:
            consecutive.append(None)
            continue
        la, lb = labels[i][ia], labels[i + 1][ib]
        consecutive.append(
            {"nmi": metrics.nmi(la, lb), "ari": metrics.ari(la, lb), "common": int(common.shape[0])}
        )
    return StableReport(stable_vertices=verts, stable_labels=labels, consecutive=consecutive)


@dataclass
class DegeneracySummary:
    name: str
    median: float
    q1: float
    q3: float
    minimum: float
    maximum: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def _as_runner(x):
    if isinstance(x, tuple):
        return x
    if isinstance(x, BaseDetector):
        return x.name, x.detect
    if isinstance(x, str):
        det = get_detectors([x])[0]
        return det.name, det.detect
    raise TypeError(f"cannot interpret {x!r} as a runnable algorithm")


def endisco_runner(detectors=None, k=None, **params):
    """Degeneracy-study adapter; each run reseeds the whole pipeline."""

    def run(g, ordering, seed):
        return endisco_run(g, detectors, k=k, seed=seed, **params).partition

    return "endisco", run


def medoc_runner(detectors=None, k=None, **params):
    def run(g, ordering, seed):
        return medoc_run(g, detectors, k=k, seed=seed, mode="disjoint", **params).disjoint

    return "medoc", run


def degeneracy_report(
    g: Graph, algorithms, runs: int = 100, seed: int = 0, q=metrics.nmi
) -> list[DegeneracySummary]:
    """Pairwise-similarity spread of each algorithm over ``runs`` orderings."""
    if runs < 2:
        raise GraphError("degeneracy report needs at least two runs")
    ss = np.random.SeedSequence(seed)
    run_seeds = [int(c.generate_state(1)[0]) for c in ss.spawn(runs)]
    out = []
    for item in algorithms:
        name, fn = _as_runner(item)
        parts = [
            fn(g, random_ordering(g.n, rs), rs) for rs in run_seeds
        ]
        sims = [
            q(parts[i], parts[j]) for i in range(runs) for j in range(i + 1, runs)
        ]
        arr = np.asarray(sims)
        q1, med, q3 = np.percentile(arr, [25, 50, 75])
        out.append(
            DegeneracySummary(
                name=name,
                median=float(med),
                q1=float(q1),
                q3=float(q3),
                minimum=float(arr.min()),
                maximum=float(arr.max()),
            )
        )
    return out


@dataclass
class RuntimeReport:
    method: str
    theta: float
    total_seconds: float
    base_seconds: float
    extra: dict = field(default_factory=dict)


def runtime_ratio(
    g: Graph, method: str, detectors=None, k: int | None = None, seed: int = 0, **params
) -> RuntimeReport:
    """Wall-clock ratio of a full ensemble pipeline to its own base runs.

    The denominator is the summed wall-clock of the base runs executed
    inside the pipeline (for consensus: its first round), so the ratio is
    at least 1 by construction. Run single-threaded for reproducibility.
    """
    if method == "endisco":
        res = endisco_run(g, detectors, k=k, seed=seed, **params)
        total, base = res.total_seconds, sum(res.base_timings)
        extra = {}
    elif method == "medoc":
        res = medoc_run(g, detectors, k=k, seed=seed, mode="disjoint", **params)
        total, base = res.total_seconds, sum(res.base_timings)
        extra = {}
    elif method == "consensus":
        rep = consensus_clustering_report(g, detectors, k=k, seed=seed, **params)
        total, base = rep.total_seconds, sum(rep.base_timings)
        extra = {"rounds": rep.rounds, "converged": rep.converged}
    else:
        raise GraphError(f"unknown ensemble method {method!r}")
    if base <= 0:
        raise GraphError("base runs recorded no wall-clock time")
    return RuntimeReport(
        method=method, theta=total / base, total_seconds=total, base_seconds=base, extra=extra
    )


def write_report_csv(rows, path) -> None:
    """Long-format CSV: method, statistic, value."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "statistic", "value"])
        for name, stat, value in rows:
            writer.writerow([name, stat, repr(float(value))])


def degeneracy_rows(summaries) -> list[tuple[str, str, float]]:
    rows = []
    for s in summaries:
        for stat in ("median", "q1", "q3", "minimum", "maximum", "iqr"):
            rows.append((s.name, stat, getattr(s, stat)))
    return rows
