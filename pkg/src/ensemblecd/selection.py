"""Base-solution selection: quality, diversity, a combined objective, and
a vertex-reinforced random walk over the solution graph.

Quality of a solution is its summed agreement with every other base
solution; diversity is low pairwise agreement inside the chosen subset.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import metrics
from .ensemble import BaseSolutionSet

log = logging.getLogger(__name__)


@dataclass
class SolutionScoreboard:
    """Pairwise similarity matrix (unit diagonal) and per-solution quality."""

    similarity: np.ndarray
    quality: np.ndarray

    @property
    def size(self) -> int:
        return self.quality.shape[0]


def build_scoreboard(solutions, q=metrics.nmi) -> SolutionScoreboard:
    """Score every base solution against every other with metric ``q``.

    ``quality[i] = sum_{j != i} q(i, j)``; identical solution sets yield
    equal qualities of ``count - 1``.
    """
    if isinstance(solutions, BaseSolutionSet):
        parts = solutions.partitions()
    else:
        parts = list(solutions)
    count = len(parts)
    sim = np.eye(count)
    for i in range(count):
        for j in range(i + 1, count):
            sim[i, j] = sim[j, i] = q(parts[i], parts[j])
    quality = sim.sum(axis=1) - 1.0
    return SolutionScoreboard(similarity=sim, quality=quality)


def _seed_index(sb: SolutionScoreboard) -> int:
    # Highest quality, ties by stable (lowest) index.
    return int(np.argmax(sb.quality))


def select_quality(sb: SolutionScoreboard, s: int) -> list[int]:
    """Top-``s`` solutions by quality, ties broken by stable index."""
    s = min(s, sb.size)
    order = np.lexsort((np.arange(sb.size), -sb.quality))
    return [int(i) for i in order[:s]]


def select_diversity(sb: SolutionScoreboard, s: int) -> list[int]:
    """Greedy max-diversity: seed at the best quality, then repeatedly add
    the solution with the smallest total similarity to the chosen set."""
    s = min(s, sb.size)
    chosen = [_seed_index(sb)]
    while len(chosen) < s:
        rest = [i for i in range(sb.size) if i not in chosen]
        totals = sb.similarity[np.ix_(rest, chosen)].sum(axis=1)
        chosen.append(rest[int(np.argmin(totals))])
    return chosen


def select_combined(sb: SolutionScoreboard, s: int, alpha: float = 0.5) -> list[int]:
    """Greedy maximization of ``alpha*sum(quality) + (1-alpha)*sum(1 - q)``
    over the chosen subset, seeded at the best quality."""
    s = min(s, sb.size)
    chosen = [_seed_index(sb)]
    while len(chosen) < s:
        rest = [i for i in range(sb.size) if i not in chosen]
        gain = alpha * sb.quality[rest] + (1.0 - alpha) * (
            1.0 - sb.similarity[np.ix_(rest, chosen)]
        ).sum(axis=1)
        chosen.append(rest[int(np.argmax(gain))])
    return chosen


def vrrw_occupancy(
    sb: SolutionScoreboard,
    lam: float = 0.9,
    alpha: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> np.ndarray:
    """Stationary occupancy of the vertex-reinforced random walk.

    Solutions form a graph weighted by pairwise diversity ``1 - q``; the
    transition mixes a quality prior with an organic transition reinforced
    by the current occupancy. The occupancy vector is renormalized each
    iteration and always sums to 1.
    """
    count = sb.size
    w = 1.0 - sb.similarity
    np.fill_diagonal(w, 0.0)
    wdeg = w.sum(axis=1)
    p0 = np.zeros((count, count))
    nz = wdeg > 0
    p0[nz] = alpha * w[nz] / wdeg[nz, None]
    np.fill_diagonal(p0, 1.0 - alpha)

    qsum = sb.quality.sum()
    prior = sb.quality / qsum if qsum > 0 else np.full(count, 1.0 / count)
    occ = prior.copy()
    if occ.sum() == 0:
        occ = np.full(count, 1.0 / count)
    for _ in range(max_iter):
        d = p0 @ occ
        with np.errstate(invalid="ignore", divide="ignore"):
            reinforced = np.where(d[:, None] > 0, p0 * occ[None, :] / d[:, None], 0.0)
        trans = (1.0 - lam) * prior[None, :] + lam * reinforced
        new = trans.T @ occ
        total = new.sum()
        if total <= 0:
            new = np.full(count, 1.0 / count)
        else:
            new /= total
        if np.max(np.abs(new - occ)) < tol:
            return new
        occ = new
    log.warning("vertex-reinforced walk did not converge within %d iterations", max_iter)
    return occ


def select_vrrw(
    sb: SolutionScoreboard,
    s: int,
    lam: float = 0.9,
    alpha: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> list[int]:
    """Top-``s`` solutions by stationary occupancy, ties by stable index."""
    s = min(s, sb.size)
    occ = vrrw_occupancy(sb, lam=lam, alpha=alpha, tol=tol, max_iter=max_iter)
    order = np.lexsort((np.arange(sb.size), -occ))
    return [int(i) for i in order[:s]]


STRATEGIES = {
    "quality": select_quality,
    "diversity": select_diversity,
    "combined": select_combined,
    "vrrw": select_vrrw,
}


def select_solutions(solutions: BaseSolutionSet, strategy: str, s: int, q=metrics.nmi, **kw):
    """Build the scoreboard and apply a named strategy; returns the subset."""
    if strategy not in STRATEGIES:
        raise KeyError(f"unknown strategy {strategy!r}; available: {sorted(STRATEGIES)}")
    sb = build_scoreboard(solutions, q=q)
    idx = STRATEGIES[strategy](sb, s, **kw)
    return solutions.subset(idx)
