"""Agreement metrics between community structures.

Disjoint: ``nmi`` (mutual information over the mean entropy) and ``ari``
(chance-corrected pair counting). Overlapping: ``onmi`` and ``omega``.
Fuzzy: ``fuzzy_rand``. All metrics are symmetric, invariant under
community relabeling, and score exactly 1.0 on identical inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .structures import Cover, FuzzyAssignment, Partition, partition_to_cover


def _labels(p) -> np.ndarray:
    if isinstance(p, Partition):
        return p.labels
    return np.asarray(p, dtype=np.int64)


def _contingency(l1: np.ndarray, l2: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense contingency counts plus marginal community sizes."""
    if l1.shape[0] != l2.shape[0]:
        raise ValueError("structures are defined on different vertex counts")
    _, i1 = np.unique(l1, return_inverse=True)
    _, i2 = np.unique(l2, return_inverse=True)
    k1, k2 = i1.max() + 1, i2.max() + 1
    table = np.zeros((k1, k2), dtype=np.int64)
    np.add.at(table, (i1, i2), 1)
    return table, table.sum(axis=1), table.sum(axis=0)


def _entropy(counts: np.ndarray, total: int) -> float:
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def nmi(p1, p2) -> float:
    """Normalized mutual information: ``I(X;Y) / ((H(X)+H(Y))/2)``.

    Natural logarithms; the base cancels in the ratio. Two partitions with
    zero entropy (both one block) are identical and score 1.
    """
    l1, l2 = _labels(p1), _labels(p2)
    table, a, b = _contingency(l1, l2)
    n = l1.shape[0]
    h1 = _entropy(a, n)
    h2 = _entropy(b, n)
    if h1 == 0.0 and h2 == 0.0:
        return 1.0
    # I = H(X) + H(Y) - H(X,Y); keeps identical inputs at exactly 1.0.
    hj = _entropy(table.ravel(), n)
    info = h1 + h2 - hj
    if info <= 0.0:
        return 0.0
    return min(1.0, info / ((h1 + h2) / 2.0))


def _pair_count(sizes) -> int:
    return sum(int(s) * (int(s) - 1) // 2 for s in sizes)


def ari(p1, p2) -> float:
    """Adjusted Rand index (Hubert-Arabie), exact integer pair counts."""
    l1, l2 = _labels(p1), _labels(p2)
    table, a, b = _contingency(l1, l2)
    n = l1.shape[0]
    index = _pair_count(table.ravel())
    sum_a = _pair_count(a)
    sum_b = _pair_count(b)
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        # Degenerate marginals (all-singletons or one block on both sides).
        return 1.0 if index == maximum else 0.0
    return (index - expected) / (maximum - expected)


def _pattern_labels(cover: Cover) -> np.ndarray:
    """Group vertices by their exact membership set."""
    key_of: dict[frozenset, int] = {}
    labels = np.empty(cover.n, dtype=np.int64)
    for v, s in enumerate(cover.memberships):
        labels[v] = key_of.setdefault(s, len(key_of))
    return labels


def _as_cover(c) -> Cover:
    if isinstance(c, Cover):
        return c
    if isinstance(c, Partition):
        return partition_to_cover(c)
    return Cover(c)


def onmi(c1, c2) -> float:
    """Overlapping NMI over binary membership patterns.

    Each vertex is described by the set of communities it belongs to; the
    score is the NMI between the two pattern groupings. On covers without
    overlap this is exactly ``nmi``, and identical covers score 1.
    """
    a, b = _as_cover(c1), _as_cover(c2)
    return nmi(_pattern_labels(a), _pattern_labels(b))


def _pair_comembership(cover: Cover) -> np.ndarray:
    """Upper-triangle vector of per-pair shared-community counts."""
    ids = cover.community_ids()
    pos = {c: j for j, c in enumerate(ids)}
    b = np.zeros((cover.n, len(ids)), dtype=np.int64)
    for v, s in enumerate(cover.memberships):
        for c in s:
            b[v, pos[c]] = 1
    counts = b @ b.T
    iu = np.triu_indices(cover.n, k=1)
    return counts[iu]


def omega(c1, c2) -> float:
    """Omega index: chance-corrected agreement on co-membership multiplicity.

    A vertex pair agrees when both covers place it together in the same
    number of communities (possibly zero). Reduces to ``ari`` when both
    inputs are partitions.
    """
    a, b = _as_cover(c1), _as_cover(c2)
    if a.n != b.n:
        raise ValueError("covers are defined on different vertex counts")
    t1 = _pair_comembership(a)
    t2 = _pair_comembership(b)
    pairs = t1.shape[0]
    if pairs == 0:
        return 1.0
    agree = int((t1 == t2).sum())
    h1 = np.bincount(t1)
    h2 = np.bincount(t2)
    width = max(h1.shape[0], h2.shape[0])
    h1 = np.pad(h1, (0, width - h1.shape[0]))
    h2 = np.pad(h2, (0, width - h2.shape[0]))
    expected = int((h1.astype(object) * h2.astype(object)).sum())
    numer = agree * pairs - expected
    denom = pairs * pairs - expected
    if denom == 0:
        return 1.0 if agree == pairs else 0.0
    return numer / denom


def _pair_agreement(f: FuzzyAssignment) -> np.ndarray:
    """f(i,j) = 1 - 0.5 * sum_c |a_ic - a_jc| over unordered pairs i < j."""
    from scipy.spatial.distance import pdist

    return 1.0 - 0.5 * pdist(f.probs, metric="cityblock")


def _as_fuzzy(f) -> FuzzyAssignment:
    if isinstance(f, FuzzyAssignment):
        return f
    if isinstance(f, Partition):
        from .structures import one_hot

        return one_hot(f)
    return FuzzyAssignment(f)


def fuzzy_rand(f1, f2) -> float:
    """Adjusted Rand index for fuzzy assignments (Huellermeier-Rifqi form).

    Per-pair agreement ``f(i,j) = 1 - 0.5*sum_c |a_ic - a_jc|`` is compared
    across the two assignments over all unordered pairs, then adjusted by
    the independence expectation:
    ``(RI_u - RI_e) / (1 - RI_e)`` with ``RI_u = 1 - sum|f1-f2|/M`` and
    ``RI_e = (s1*s2 + (M-s1)*(M-s2)) / M^2``, ``M`` the pair count.
    """
    a, b = _as_fuzzy(f1), _as_fuzzy(f2)
    if a.n != b.n:
        raise ValueError("fuzzy assignments are defined on different vertex counts")
    g1 = _pair_agreement(a)
    g2 = _pair_agreement(b)
    m = g1.shape[0]
    if m == 0:
        return 1.0
    ri_u = 1.0 - float(np.abs(g1 - g2).sum()) / m
    s1 = float(g1.sum())
    s2 = float(g2.sum())
    ri_e = (s1 * s2 + (m - s1) * (m - s2)) / (m * m)
    if math.isclose(ri_e, 1.0, abs_tol=1e-15):
        return 1.0 if math.isclose(ri_u, 1.0, abs_tol=1e-15) else 0.0
    return (ri_u - ri_e) / (1.0 - ri_e)


METRICS = {
    "nmi": nmi,
    "ari": ari,
    "onmi": onmi,
    "omega": omega,
    "fri": fuzzy_rand,
}
