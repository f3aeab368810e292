"""Planted-community benchmark generator.

Approximates the classical planted-partition protocol: power-law community
sizes and degrees, a mixing parameter ``mu`` splitting each vertex's stubs
into internal and external halves, and configuration-model wiring with
rejection of self-loops and duplicates. Overlapping and fuzzy ground truth
build on the same machinery.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .graph import Graph
from .structures import Cover, FuzzyAssignment, Partition

log = logging.getLogger(__name__)


class BenchError(ValueError):
    """Infeasible benchmark configuration."""


@dataclass(frozen=True)
class BenchConfig:
    """Generator knobs; defaults follow the common large-benchmark setup."""

    n: int
    k_avg: float = 50.0
    k_max: int = 150
    mu: float = 0.3
    c_min: int = 20
    c_max: int = 100
    o_n: float = 0.0
    o_m: int = 1
    seed: int = 0
    degree_exponent: float = 2.0
    size_exponent: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise BenchError("need n >= 2 vertices")
        if not 0.0 < self.mu < 1.0:
            raise BenchError("mixing parameter mu must lie strictly in (0, 1)")
        if not 1 <= self.c_min <= self.c_max <= self.n:
            raise BenchError("community sizes must satisfy 1 <= c_min <= c_max <= n")
        if not 0.0 <= self.o_n <= 1.0:
            raise BenchError("overlap fraction o_n must lie in [0, 1]")
        if self.o_m < 1:
            raise BenchError("memberships per overlapping vertex o_m must be >= 1")
        if not 1.0 <= self.k_avg < self.k_max:
            raise BenchError("need 1 <= k_avg < k_max")
        if self.k_max >= self.n:
            raise BenchError("k_max must be below n")


def _plaw_mean(a: float, b: float, tau: float) -> float:
    if abs(tau - 1.0) < 1e-12:
        return (b - a) / np.log(b / a)
    z = (b ** (1.0 - tau) - a ** (1.0 - tau)) / (1.0 - tau)
    if abs(tau - 2.0) < 1e-12:
        m1 = np.log(b / a)
    else:
        m1 = (b ** (2.0 - tau) - a ** (2.0 - tau)) / (2.0 - tau)
    return m1 / z


def _sample_powerlaw(rng, size, a, b, tau):
    u = rng.random(size)
    if abs(tau - 1.0) < 1e-12:
        return a * (b / a) ** u
    lo, hi = a ** (1.0 - tau), b ** (1.0 - tau)
    return (lo + u * (hi - lo)) ** (1.0 / (1.0 - tau))


def _sample_degrees(rng, cfg: BenchConfig) -> np.ndarray:
    # The lower cutoff is solved so the continuous power law hits k_avg.
    tau, b = cfg.degree_exponent, float(cfg.k_max)
    hi = b * (1.0 - 1e-9)
    if _plaw_mean(hi, b, tau) <= cfg.k_avg:
        raise BenchError("k_avg is too close to k_max for the degree exponent")
    a = brentq(lambda x: _plaw_mean(x, b, tau) - cfg.k_avg, 1e-6, hi)
    raw = _sample_powerlaw(rng, cfg.n, a, b, tau)
    return np.clip(np.rint(raw).astype(np.int64), 1, cfg.k_max)


def _community_sizes(rng, total: int, cfg: BenchConfig) -> np.ndarray:
    if total < cfg.c_min:
        raise BenchError(f"cannot place {total} membership slots in communities of size >= {cfg.c_min}")
    support = np.arange(cfg.c_min, cfg.c_max + 1)
    weights = support.astype(np.float64) ** (-cfg.size_exponent)
    weights /= weights.sum()
    sizes: list[int] = []
    while sum(sizes) < total:
        sizes.append(int(rng.choice(support, p=weights)))
    for _ in range(4 * total):
        current = sum(sizes)
        if current == total:
            break
        if current > total:
            excess = current - total
            reducible = [i for i, s in enumerate(sizes) if s > cfg.c_min]
            if reducible:
                for i in reducible:
                    take = min(excess, sizes[i] - cfg.c_min)
                    sizes[i] -= take
                    excess -= take
                    if excess == 0:
                        break
            elif len(sizes) > 1:
                sizes.pop()
            else:
                raise BenchError(
                    f"cannot partition {total} membership slots into communities of "
                    f"size in [{cfg.c_min}, {cfg.c_max}]"
                )
        else:
            deficit = total - current
            growable = [i for i, s in enumerate(sizes) if s < cfg.c_max]
            for i in growable:
                give = min(deficit, cfg.c_max - sizes[i])
                sizes[i] += give
                deficit -= give
                if deficit == 0:
                    break
            if deficit > 0:
                if deficit >= cfg.c_min:
                    sizes.append(int(min(deficit, cfg.c_max)))
                else:
                    raise BenchError(
                        f"cannot partition {total} membership slots into communities of "
                        f"size in [{cfg.c_min}, {cfg.c_max}]"
                    )
    if sum(sizes) != total:
        raise BenchError("community size fitting did not converge")
    return np.asarray(sizes, dtype=np.int64)


def _assign_members(rng, sizes: np.ndarray, req: np.ndarray, need: np.ndarray):
    """Place each vertex into ``req[v]`` distinct communities.

    Communities must have spare capacity and, where possible, room for the
    vertex's per-membership internal degree ``need[v]`` (clip otherwise).
    """
    n = req.shape[0]
    caps = sizes.copy()
    memberships: list[list[int]] = [[] for _ in range(n)]
    clipped = 0
    order = sorted(range(n), key=lambda v: (-req[v], -need[v], v))
    for v in order:
        chosen: list[int] = []
        for _ in range(int(req[v])):
            mask = caps > 0
            for c in chosen:
                mask[c] = False
            fits = np.flatnonzero(mask & (sizes - 1 >= need[v]))
            if fits.shape[0]:
                c = int(rng.choice(fits))
            else:
                avail = np.flatnonzero(mask)
                if avail.shape[0] == 0:
                    raise BenchError(
                        f"no community capacity left for vertex {v}; "
                        "raise c_max or lower o_m"
                    )
                c = int(avail[np.argmax(sizes[avail])])
                clipped += 1
            chosen.append(c)
            caps[c] -= 1
        memberships[v] = sorted(chosen)
    return memberships, clipped


def _pair_stubs(rng, stubs: np.ndarray, existing: set, forbid=None, max_attempts: int = 100):
    """Randomly pair stubs, rejecting self-loops, duplicates and forbidden
    pairs; leftovers after the retry cap are dropped."""
    edges: list[tuple[int, int]] = []
    pool = np.asarray(stubs, dtype=np.int64).copy()
    attempts = 0
    while pool.shape[0] >= 2 and attempts < max_attempts:
        attempts += 1
        rng.shuffle(pool)
        leftovers: list[int] = []
        if pool.shape[0] % 2:
            leftovers.append(int(pool[-1]))
        progressed = False
        for i in range(0, pool.shape[0] - 1, 2):
            u, v = int(pool[i]), int(pool[i + 1])
            if u == v or (forbid is not None and forbid(u, v)):
                leftovers.extend((u, v))
                continue
            key = (u, v) if u < v else (v, u)
            if key in existing:
                leftovers.extend((u, v))
                continue
            existing.add(key)
            edges.append(key)
            progressed = True
        pool = np.asarray(leftovers, dtype=np.int64)
        if not progressed and pool.shape[0] >= 2:
            continue
    return edges, int(pool.shape[0])


def _wire(rng, cfg: BenchConfig, degrees: np.ndarray, memberships: list[list[int]], sizes: np.ndarray):
    """Configuration-model wiring of internal and external stubs."""
    n = cfg.n
    internal_share: list[dict[int, int]] = [dict() for _ in range(n)]
    clipped_stubs = 0
    for v in range(n):
        ints = int(np.rint((1.0 - cfg.mu) * degrees[v]))
        comms = memberships[v]
        base, rem = divmod(ints, len(comms))
        extra = set(rng.choice(len(comms), size=rem, replace=False)) if rem else set()
        for j, c in enumerate(comms):
            share = base + (1 if j in extra else 0)
            room = int(sizes[c]) - 1
            if share > room:
                clipped_stubs += share - room
                share = room
            internal_share[v][c] = share

    members_of: dict[int, list[int]] = {}
    for v, comms in enumerate(memberships):
        for c in comms:
            members_of.setdefault(c, []).append(v)

    existing: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    dropped_internal = 0
    for c in sorted(members_of):
        shares = {v: internal_share[v][c] for v in members_of[c]}
        if sum(shares.values()) % 2:
            cand = [v for v, s in sorted(shares.items()) if s > 0]
            if cand:
                pick = max(cand, key=lambda v: (shares[v], -v))
                shares[pick] -= 1
                internal_share[pick][c] -= 1
        stubs = np.repeat(
            np.fromiter(shares.keys(), dtype=np.int64),
            np.fromiter(shares.values(), dtype=np.int64),
        )
        got, leftover = _pair_stubs(rng, stubs, existing)
        edges.extend(got)
        dropped_internal += leftover

    member_sets = [frozenset(c) for c in memberships]

    def same_side(u: int, v: int) -> bool:
        return not member_sets[u].isdisjoint(member_sets[v])

    ext = degrees - np.array([sum(s.values()) for s in internal_share], dtype=np.int64)
    ext = np.maximum(ext, 0)
    if ext.sum() % 2:
        ext[int(np.argmax(ext))] -= 1
    ext_stubs = np.repeat(np.arange(n), ext)
    got, dropped_external = _pair_stubs(rng, ext_stubs, existing, forbid=same_side)
    edges.extend(got)

    stats = {
        "clipped_internal_stubs": clipped_stubs,
        "dropped_internal_stubs": dropped_internal,
        "dropped_external_stubs": dropped_external,
    }
    if clipped_stubs or dropped_internal or dropped_external:
        log.warning(
            "benchmark wiring: %d internal stubs clipped, %d internal / %d external stubs unmatched",
            clipped_stubs,
            dropped_internal,
            dropped_external,
        )
    if not edges:
        raise BenchError("configuration produced no edges; raise k_avg")
    g = Graph(n, np.asarray(edges, dtype=np.int64))
    g.io_stats = stats
    return g


def gen_disjoint(cfg: BenchConfig) -> tuple[Graph, Partition]:
    """Planted disjoint benchmark: (graph, ground-truth partition)."""
    rng = np.random.default_rng(cfg.seed)
    degrees = _sample_degrees(rng, cfg)
    sizes = _community_sizes(rng, cfg.n, cfg)
    need = np.rint((1.0 - cfg.mu) * degrees).astype(np.int64)
    memberships, clipped = _assign_members(rng, sizes, np.ones(cfg.n, dtype=np.int64), need)
    g = _wire(rng, cfg, degrees, memberships, sizes)
    g.io_stats["clipped_assignments"] = clipped
    return g, Partition(np.array([m[0] for m in memberships], dtype=np.int64))


def _overlap_requirements(rng, cfg: BenchConfig):
    n_over = int(np.rint(cfg.o_n * cfg.n))
    req = np.ones(cfg.n, dtype=np.int64)
    if n_over:
        over = rng.choice(cfg.n, size=n_over, replace=False)
        req[over] = cfg.o_m
    return req, n_over


def gen_overlapping(cfg: BenchConfig) -> tuple[Graph, Cover]:
    """Planted overlapping benchmark: (graph, ground-truth cover).

    ``round(o_n * n)`` vertices receive ``o_m`` memberships; their internal
    stubs are split evenly among memberships.
    """
    rng = np.random.default_rng(cfg.seed)
    degrees = _sample_degrees(rng, cfg)
    req, n_over = _overlap_requirements(rng, cfg)
    slots = int(req.sum())
    sizes = _community_sizes(rng, slots, cfg)
    per_mem_need = np.ceil(np.rint((1.0 - cfg.mu) * degrees) / req).astype(np.int64)
    memberships, clipped = _assign_members(rng, sizes, req, per_mem_need)
    g = _wire(rng, cfg, degrees, memberships, sizes)
    g.io_stats["clipped_assignments"] = clipped
    g.io_stats["overlapping_vertices"] = n_over
    return g, Cover([set(m) for m in memberships])


def fuzzy_edge_probability(s, p1: float, p0: float):
    """Mixture edge probability ``s*p1 + (1-s)*p0`` for co-membership s."""
    s = np.asarray(s, dtype=np.float64)
    return s * p1 + (1.0 - s) * p0


def gen_fuzzy(cfg: BenchConfig) -> tuple[Graph, FuzzyAssignment]:
    """Planted fuzzy benchmark: (graph, ground-truth fuzzy assignment).

    Crisp overlapping memberships get uniform-random weights normalized
    per vertex; the pairwise co-membership ``s_ij = sum_c min(a_ic, a_jc)``
    mixes two edge probabilities ``p1, p0`` solved so the expected degree
    is ``k_avg`` and the expected inter-community edge fraction is ``mu``.
    """
    rng = np.random.default_rng(cfg.seed)
    req, _ = _overlap_requirements(rng, cfg)
    slots = int(req.sum())
    sizes = _community_sizes(rng, slots, cfg)
    memberships, _ = _assign_members(rng, sizes, req, np.zeros(cfg.n, dtype=np.int64))

    n, n_comm = cfg.n, sizes.shape[0]
    alpha = np.zeros((n, n_comm))
    for v, comms in enumerate(memberships):
        w = rng.random(len(comms))
        total = w.sum()
        if total == 0.0:
            w = np.full(len(comms), 1.0)
            total = w.sum()
        alpha[v, comms] = w / total

    co = np.zeros((n, n))
    for c in range(n_comm):
        mem = np.flatnonzero(alpha[:, c] > 0)
        w = alpha[mem, c]
        co[np.ix_(mem, mem)] += np.minimum.outer(w, w)
    iu = np.triu_indices(n, k=1)
    s_vec = co[iu]

    pairs = s_vec.shape[0]
    shared = s_vec > 0.0
    b0 = int((~shared).sum())
    a_sum = float(s_vec.sum())
    target = cfg.n * cfg.k_avg / 2.0
    if b0 == 0 or a_sum == 0.0:
        raise BenchError("degenerate co-membership structure; cannot solve for p0/p1")
    p0 = cfg.mu * target / b0
    p1 = (target - p0 * (pairs - a_sum)) / a_sum
    if not (0.0 <= p0 <= 1.0 and 0.0 <= p1 <= 1.0):
        raise BenchError(
            f"edge probabilities out of range (p0={p0:.4f}, p1={p1:.4f}); "
            "adjust k_avg, mu or community sizes"
        )
    probs = fuzzy_edge_probability(s_vec, p1, p0)
    draw = rng.random(pairs) < probs
    edges = np.stack([iu[0][draw], iu[1][draw]], axis=1)
    if edges.shape[0] == 0:
        raise BenchError("configuration produced no edges; raise k_avg")
    g = Graph(n, edges)
    g.io_stats = {"p0": p0, "p1": p1, "expected_edges": float(probs.sum())}
    return g, FuzzyAssignment(alpha, list(range(n_comm)))


def realized_stats(g: Graph, truth) -> dict:
    """Realized mean degree and mixing of a generated instance."""
    if isinstance(truth, Partition):
        share = truth.labels[g.edge_u] == truth.labels[g.edge_v]
    elif isinstance(truth, Cover):
        share = np.array(
            [not truth.memberships[u].isdisjoint(truth.memberships[v])
             for u, v in zip(g.edge_u, g.edge_v)]
        )
    elif isinstance(truth, FuzzyAssignment):
        support = truth.probs > 0.0
        share = np.array(
            [bool(np.any(support[u] & support[v])) for u, v in zip(g.edge_u, g.edge_v)]
        )
    else:
        raise TypeError("truth must be a Partition, Cover or FuzzyAssignment")
    return {
        "n": g.n,
        "m": g.m,
        "mean_degree": 2.0 * g.m / g.n,
        "realized_mu": float(1.0 - share.mean()) if g.m else 0.0,
    }
