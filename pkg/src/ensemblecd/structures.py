"""Community-structure containers: disjoint, overlapping and fuzzy.

File formats (all plain text, ``#`` comments ignored):

* partition: one ``vertex community_id`` pair per line;
* cover: one community per line as whitespace-separated vertex ids;
* fuzzy: one ``vertex community_id probability`` triple per line.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, GraphError

PROB_TOL = 1e-9


class StructureError(ValueError):
    """Invalid community structure."""


class Partition:
    """Disjoint community structure: one integer label per vertex.

    Labels are arbitrary ints (not necessarily compact); everything
    downstream is label-permutation invariant.
    """

    __slots__ = ("labels",)

    def __init__(self, labels):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] < 1:
            raise StructureError("partition needs one label per vertex")
        labels.setflags(write=False)
        self.labels = labels

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def community_ids(self) -> np.ndarray:
        return np.unique(self.labels)

    def communities(self) -> list[np.ndarray]:
        """Vertex sets grouped by label, ordered by label."""
        order = np.argsort(self.labels, kind="stable")
        sorted_labels = self.labels[order]
        cuts = np.flatnonzero(np.diff(sorted_labels)) + 1
        return [np.sort(c) for c in np.split(order, cuts)]

    def n_communities(self) -> int:
        return int(np.unique(self.labels).shape[0])

    def relabeled(self) -> "Partition":
        """Same grouping with labels compacted to 0..k-1."""
        _, inv = np.unique(self.labels, return_inverse=True)
        return Partition(inv)

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return f"Partition(n={self.n}, communities={self.n_communities()})"


class Cover:
    """Overlapping community structure: a non-empty label set per vertex."""

    __slots__ = ("memberships",)

    def __init__(self, memberships):
        mem = [frozenset(int(c) for c in s) for s in memberships]
        if not mem:
            raise StructureError("cover needs at least one vertex")
        for v, s in enumerate(mem):
            if not s:
                raise StructureError(f"vertex {v} belongs to no community")
        self.memberships = mem

    @property
    def n(self) -> int:
        return len(self.memberships)

    def community_ids(self) -> list[int]:
        return sorted(set().union(*self.memberships))

    def communities(self) -> dict[int, np.ndarray]:
        out: dict[int, list[int]] = {}
        for v, s in enumerate(self.memberships):
            for c in s:
                out.setdefault(c, []).append(v)
        return {c: np.array(vs, dtype=np.int64) for c, vs in sorted(out.items())}

    def __eq__(self, other):
        return isinstance(other, Cover) and self.memberships == other.memberships

    def __repr__(self):
        return f"Cover(n={self.n}, communities={len(self.community_ids())})"


def partition_to_cover(p: Partition) -> Cover:
    return Cover([{int(l)} for l in p.labels])


class FuzzyAssignment:
    """Per-vertex probability distribution over community columns.

    Stored as an ``n x L`` matrix whose rows sum to 1 (within 1e-9), plus
    the community id of each column.
    """

    __slots__ = ("probs", "columns")

    def __init__(self, probs, columns=None):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] < 1 or probs.shape[1] < 1:
            raise StructureError("fuzzy assignment needs an n x L matrix")
        if probs.min() < -PROB_TOL or probs.max() > 1 + PROB_TOL:
            raise StructureError("membership probabilities must lie in [0, 1]")
        sums = probs.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > PROB_TOL):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise StructureError(f"row {bad} sums to {sums[bad]!r}, expected 1")
        if columns is None:
            columns = list(range(probs.shape[1]))
        columns = [int(c) for c in columns]
        if len(columns) != probs.shape[1]:
            raise StructureError("column ids do not match matrix width")
        probs.setflags(write=False)
        self.probs = probs
        self.columns = columns

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def n_communities(self) -> int:
        return self.probs.shape[1]

    def argmax_partition(self) -> Partition:
        cols = np.asarray(self.columns, dtype=np.int64)
        return Partition(cols[np.argmax(self.probs, axis=1)])

    def __repr__(self):
        return f"FuzzyAssignment(n={self.n}, communities={self.n_communities})"


def one_hot(p: Partition, columns=None) -> FuzzyAssignment:
    """Crisp partition as a degenerate fuzzy assignment (rows are one-hot)."""
    ids = list(columns) if columns is not None else [int(c) for c in p.community_ids()]
    pos = {c: j for j, c in enumerate(ids)}
    mat = np.zeros((p.n, len(ids)))
    for v, l in enumerate(p.labels):
        mat[v, pos[int(l)]] = 1.0
    return FuzzyAssignment(mat, ids)


# ---------------------------------------------------------------------------
# file I/O


def _names_index(n, names):
    if names is None:
        return None
    if len(names) != n:
        raise StructureError("names length does not match vertex count")
    return {s: i for i, s in enumerate(names)}


def _resolve(token, n, index, path, lineno):
    if index is not None:
        if token not in index:
            raise StructureError(f"{path}: line {lineno}: unknown vertex {token!r}")
        return index[token]
    try:
        v = int(token)
    except ValueError:
        raise StructureError(f"{path}: line {lineno}: vertex token {token!r} is not an id")
    if not 0 <= v < n:
        raise StructureError(f"{path}: line {lineno}: vertex {v} out of range")
    return v


def _data_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line and not line.startswith("#"):
                yield lineno, line.split()


def save_partition(p: Partition, path, names=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v, l in enumerate(p.labels):
            name = names[v] if names is not None else v
            fh.write(f"{name} {l}\n")


def load_partition(path, n: int, names=None) -> Partition:
    """Read a partition file and validate that it covers all ``n`` vertices."""
    index = _names_index(n, names)
    labels = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    for lineno, parts in _data_lines(path):
        if len(parts) != 2:
            raise StructureError(f"{path}: line {lineno}: expected 'vertex community'")
        v = _resolve(parts[0], n, index, path, lineno)
        if seen[v]:
            raise StructureError(f"{path}: line {lineno}: vertex {parts[0]} assigned twice")
        try:
            labels[v] = int(parts[1])
        except ValueError:
            raise StructureError(f"{path}: line {lineno}: bad community id {parts[1]!r}")
        seen[v] = True
    if not seen.all():
        missing = np.flatnonzero(~seen)
        shown = ", ".join(
            names[v] if names is not None else str(v) for v in missing[:10]
        )
        more = "" if missing.shape[0] <= 10 else f" (+{missing.shape[0] - 10} more)"
        raise StructureError(f"{path}: vertices missing from partition: {shown}{more}")
    return Partition(labels)


def save_cover(c: Cover, path, names=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for _, members in sorted(c.communities().items()):
            toks = (names[v] if names is not None else str(v) for v in members)
            fh.write(" ".join(map(str, toks)) + "\n")


def load_cover(path, n: int, names=None) -> Cover:
    index = _names_index(n, names)
    memberships = [set() for _ in range(n)]
    cid = 0
    for lineno, parts in _data_lines(path):
        for tok in parts:
            memberships[_resolve(tok, n, index, path, lineno)].add(cid)
        cid += 1
    uncovered = [v for v, s in enumerate(memberships) if not s]
    if uncovered:
        raise StructureError(f"{path}: vertices in no community: {uncovered[:10]}")
    return Cover(memberships)


def save_fuzzy(f: FuzzyAssignment, path, names=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in range(f.n):
            for j, c in enumerate(f.columns):
                p = f.probs[v, j]
                if p > 0.0:
                    name = names[v] if names is not None else v
                    fh.write(f"{name} {c} {p!r}\n")


def load_fuzzy(path, n: int, names=None) -> FuzzyAssignment:
    index = _names_index(n, names)
    entries: dict[int, dict[int, float]] = {}
    for lineno, parts in _data_lines(path):
        if len(parts) != 3:
            raise StructureError(f"{path}: line {lineno}: expected 'vertex community prob'")
        v = _resolve(parts[0], n, index, path, lineno)
        try:
            c, p = int(parts[1]), float(parts[2])
        except ValueError:
            raise StructureError(f"{path}: line {lineno}: bad community/probability token")
        entries.setdefault(v, {})[c] = p
    cols = sorted({c for row in entries.values() for c in row})
    pos = {c: j for j, c in enumerate(cols)}
    mat = np.zeros((n, len(cols)))
    for v, row in entries.items():
        for c, p in row.items():
            mat[v, pos[c]] = p
    return FuzzyAssignment(mat, cols)
