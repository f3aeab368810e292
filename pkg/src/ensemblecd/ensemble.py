"""Base-solution generation and the consensus-clustering baseline.

Running M detectors over K shared vertex orderings yields the M*K base
partitions every ensemble method consumes. Consensus clustering is the
iterated co-occurrence baseline the ensembles are compared against.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from .detectors import BaseDetector, get_detectors
from .graph import Graph, GraphError, random_ordering
from .structures import Partition, load_partition, save_partition

log = logging.getLogger(__name__)

K_CAP = 50


def default_k(n: int, cap: int = K_CAP) -> int:
    """K = min(ceil(0.2 n), cap); accuracy saturates around 0.2|V| runs."""
    return max(1, min(int(np.ceil(0.2 * n)), cap))


@dataclass(frozen=True)
class BaseSolution:
    algo: str
    ordering_index: int
    partition: Partition
    seed: int


@dataclass
class BaseSolutionSet:
    """The M*K base partitions, plus bookkeeping for selection/serialization."""

    solutions: list[BaseSolution]
    algorithms: list[str]
    k: int
    n: int
    seed: int
    failures: int = 0
    timings: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.solutions)

    def partitions(self) -> list[Partition]:
        return [s.partition for s in self.solutions]

    def subset(self, indices) -> "BaseSolutionSet":
        picked = [self.solutions[i] for i in sorted(indices)]
        return BaseSolutionSet(
            solutions=picked,
            algorithms=sorted({s.algo for s in picked}),
            k=self.k,
            n=self.n,
            seed=self.seed,
            failures=self.failures,
        )

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = []
        for i, s in enumerate(self.solutions):
            fname = f"{i:04d}_{s.algo}_k{s.ordering_index}.part"
            save_partition(s.partition, directory / fname)
            files.append(
                {"file": fname, "algo": s.algo, "ordering_index": s.ordering_index, "seed": s.seed}
            )
        manifest = {
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "algorithms": self.algorithms,
            "failures": self.failures,
            "solutions": files,
        }
        with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)

    @staticmethod
    def load(directory) -> "BaseSolutionSet":
        directory = Path(directory)
        with open(directory / "manifest.json", "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        n = manifest["n"]
        sols = [
            BaseSolution(
                algo=e["algo"],
                ordering_index=e["ordering_index"],
                partition=load_partition(directory / e["file"], n),
                seed=e["seed"],
            )
            for e in manifest["solutions"]
        ]
        return BaseSolutionSet(
            solutions=sols,
            algorithms=manifest["algorithms"],
            k=manifest["k"],
            n=n,
            seed=manifest["seed"],
            failures=manifest.get("failures", 0),
        )


def _derived_seeds(seed: int, count: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in ss.spawn(count)]


def _run_one(args):
    detector, g, perm, run_seed = args
    return detector.detect(g, perm, run_seed)


def generate_base_solutions(
    g: Graph,
    detectors=None,
    k: int | None = None,
    seed: int = 0,
    threads: int = 1,
) -> BaseSolutionSet:
    """Run every detector on K shared vertex orderings.

    Ordering ``k`` is identical across detectors so runs are comparable.
    Detector failures are logged and skipped; if every run fails the whole
    call raises. Per-run wall-clock is recorded in ``timings``.
    """
    dets = get_detectors(detectors)
    if not dets:
        raise GraphError("need at least one detector")
    if k is None:
        k = default_k(g.n)
    if k < 1:
        raise GraphError("need K >= 1 orderings")
    ordering_seeds = _derived_seeds(seed, k)
    run_seeds = _derived_seeds(seed + 1, k * len(dets))
    orderings = [random_ordering(g.n, s) for s in ordering_seeds]

    tasks = []
    for ki in range(k):
        for mi, det in enumerate(dets):
            tasks.append((det, orderings[ki], run_seeds[ki * len(dets) + mi], ki))

    solutions: list[BaseSolution] = []
    failures = 0
    timings: list[float] = []
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            t0 = time.perf_counter()
            results = list(pool.map(_run_one, [(d, g, o, s) for d, o, s, _ in tasks]))
            elapsed = time.perf_counter() - t0
        timings = [elapsed / len(tasks)] * len(tasks)
        for (det, _, s, ki), part in zip(tasks, results):
            solutions.append(BaseSolution(det.name, ki, part, s))
    else:
        for det, ordering, s, ki in tasks:
            t0 = time.perf_counter()
            try:
                part = det.detect(g, ordering, s)
            except Exception:
                log.exception("detector %s failed on ordering %d; run skipped", det.name, ki)
                failures += 1
                continue
            timings.append(time.perf_counter() - t0)
            solutions.append(BaseSolution(det.name, ki, part, s))
    if not solutions:
        raise GraphError(f"all {len(tasks)} base runs failed")
    if failures:
        log.warning("%d of %d base runs failed and were skipped", failures, len(tasks))
    return BaseSolutionSet(
        solutions=solutions,
        algorithms=[d.name for d in dets],
        k=k,
        n=g.n,
        seed=seed,
        failures=failures,
        timings=timings,
    )


def cooccurrence(partitions, n: int) -> np.ndarray:
    """Fraction of partitions placing each vertex pair together.

    Symmetric with unit diagonal; entries lie in [0, 1].
    """
    if not partitions:
        raise GraphError("need at least one partition")
    acc = np.zeros((n, n))
    for p in partitions:
        labels = p.labels if isinstance(p, Partition) else np.asarray(p)
        acc += labels[:, None] == labels[None, :]
    return acc / len(partitions)


@dataclass
class ConsensusReport:
    partition: Partition
    rounds: int
    converged: bool
    base_timings: list[float]
    total_seconds: float


def _blocks(matrix: np.ndarray, threshold: float) -> Partition:
    import scipy.sparse as sp

    keep = matrix >= threshold
    np.fill_diagonal(keep, True)
    _, labels = connected_components(sp.csr_matrix(keep), directed=False)
    return Partition(labels)


def consensus_clustering_report(
    g: Graph,
    detectors=None,
    k: int | None = None,
    seed: int = 0,
    max_rounds: int = 10,
    threshold: float = 0.5,
    threads: int = 1,
) -> ConsensusReport:
    """Iterated consensus clustering with full diagnostics.

    Each round reruns every detector on the consensus-weighted graph and
    rebuilds the co-occurrence matrix; iteration stops when the matrix is
    block-diagonal (all entries 0 or 1) or after ``max_rounds`` rounds.
    """
    t_start = time.perf_counter()
    current = g
    base_timings: list[float] = []
    matrix = None
    converged = False
    rounds = 0
    for r in range(max_rounds):
        rounds = r + 1
        sols = generate_base_solutions(current, detectors, k=k, seed=seed + r, threads=threads)
        if r == 0:
            base_timings = list(sols.timings)
        matrix = cooccurrence(sols.partitions(), g.n)
        if np.all((matrix == 0.0) | (matrix == 1.0)):
            converged = True
            break
        pruned = np.where(matrix >= threshold, matrix, 0.0)
        iu, iv = np.nonzero(np.triu(pruned, k=1))
        if iu.shape[0] == 0:
            # Nothing co-occurs often enough; blocks are singletons.
            converged = True
            matrix = np.eye(g.n)
            break
        current = Graph(g.n, np.stack([iu, iv], axis=1), weights=pruned[iu, iv])
    if not converged:
        log.warning("consensus did not converge within %d rounds", max_rounds)
    part = _blocks(matrix, threshold)
    return ConsensusReport(
        partition=part,
        rounds=rounds,
        converged=converged,
        base_timings=base_timings,
        total_seconds=time.perf_counter() - t_start,
    )


def consensus_clustering(
    g: Graph,
    detectors=None,
    k: int | None = None,
    seed: int = 0,
    max_rounds: int = 10,
    threshold: float = 0.5,
    threads: int = 1,
) -> Partition:
    return consensus_clustering_report(
        g, detectors, k=k, seed=seed, max_rounds=max_rounds, threshold=threshold, threads=threads
    ).partition
