"""Immutable weighted undirected graphs stored in CSR form."""

from __future__ import annotations

import csv
import os
from collections.abc import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""


class Graph:
    """Undirected weighted graph with a fixed node id space ``0..n-1``.

    Adjacency is kept as symmetric CSR arrays. Removing nodes never
    relabels anything: a removed node keeps its id, loses all its edges
    and is flagged absent in ``present``. This keeps ids stable across an
    attack, which is what every trace and partition refers to.

    Instances are read-only; arrays are flagged non-writeable.
    """

    __slots__ = ("indptr", "indices", "weights", "present", "labels",
                 "_degrees", "_total_weight")

    def __init__(self, indptr, indices, weights, present=None, labels=None):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        n = len(self.indptr) - 1
        if present is None:
            present = np.ones(n, dtype=bool)
        self.present = np.asarray(present, dtype=bool)
        self.labels = None if labels is None else list(labels)
        src = np.repeat(np.arange(n), np.diff(self.indptr))
        self._degrees = np.bincount(src, weights=self.weights, minlength=n)
        self._total_weight = float(self.weights.sum()) / 2.0
        for arr in (self.indptr, self.indices, self.weights, self.present,
                    self._degrees):
            arr.flags.writeable = False

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence], labels=None) -> "Graph":
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

        Duplicate undirected pairs are merged by summing their weights.
        Self-loops, non-positive weights and out-of-range ids raise
        ``ValueError``.
        """
        rows = [tuple(e) for e in edges]
        if not rows:
            return cls(np.zeros(n + 1, dtype=np.int64), [], [], labels=labels)
        u = np.fromiter((r[0] for r in rows), dtype=np.int64, count=len(rows))
        v = np.fromiter((r[1] for r in rows), dtype=np.int64, count=len(rows))
        w = np.fromiter((r[2] if len(r) > 2 else 1.0 for r in rows),
                        dtype=np.float64, count=len(rows))
        return cls.from_arrays(n, u, v, w, labels=labels)

    @classmethod
    def from_arrays(cls, n: int, u, v, w=None, labels=None) -> "Graph":
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
        if len(u) != len(v) or len(u) != len(w):
            raise ValueError("edge arrays differ in length")
        if len(u):
            if u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(u == v):
                k = int(np.flatnonzero(u == v)[0])
                raise ValueError(f"self-loop on node {int(u[k])}")
            if np.any(~(w > 0)):
                raise ValueError("edge weights must be strictly positive")
        # canonical (lo, hi) pairs, merged by weight sum
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        key = lo * n + hi
        uniq, inv = np.unique(key, return_inverse=True)
        wsum = np.bincount(inv, weights=w, minlength=len(uniq))
        lo, hi = uniq // n, uniq % n
        mat = csr_matrix(
            (np.concatenate([wsum, wsum]),
             (np.concatenate([lo, hi]), np.concatenate([hi, lo]))),
            shape=(n, n))
        mat.sort_indices()
        return cls(mat.indptr, mat.indices, mat.data, labels=labels)

    # -- basic queries ----------------------------------------------------

    @property
    def node_count(self) -> int:
        """Size of the id space (removed nodes included)."""
        return len(self.indptr) - 1

    @property
    def n_present(self) -> int:
        return int(self.present.sum())

    @property
    def total_weight(self) -> float:
        return self._total_weight

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def neighbor_weights(self, i: int) -> np.ndarray:
        return self.weights[self.indptr[i]:self.indptr[i + 1]]

    def half_edges(self):
        """Return ``(src, dst, w)`` arrays, each undirected edge twice."""
        src = np.repeat(np.arange(self.node_count), np.diff(self.indptr))
        return src, self.indices, self.weights

    def edges(self):
        """Return ``(u, v, w)`` arrays with ``u < v``, one row per edge."""
        src, dst, w = self.half_edges()
        keep = src < dst
        return src[keep], dst[keep], w[keep]

    def to_csr(self) -> csr_matrix:
        n = self.node_count
        return csr_matrix((self.weights, self.indices, self.indptr), shape=(n, n))

    def _check(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.node_count:
            raise IndexError(f"node {i} out of range 0..{self.node_count - 1}")
        if not self.present[i]:
            raise IndexError(f"node {i} has been removed")
        return i

    def __repr__(self):
        return (f"Graph(n={self.n_present}/{self.node_count}, "
                f"edges={self.edge_count}, M={self.total_weight:g})")

    # -- derived graphs ---------------------------------------------------

    def remove_nodes(self, nodes) -> "Graph":
        """Return a copy with ``nodes`` and their incident edges deleted."""
        drop = np.zeros(self.node_count, dtype=bool)
        drop[np.asarray(nodes, dtype=np.int64)] = True
        src, dst, w = self.half_edges()
        keep = ~(drop[src] | drop[dst])
        counts = np.bincount(src[keep], minlength=self.node_count)
        indptr = np.concatenate([[0], np.cumsum(counts)])
        return Graph(indptr, dst[keep], w[keep], self.present & ~drop, self.labels)


def degree(g: Graph, i: int) -> float:
    """Weighted degree ``k_i`` of node ``i``."""
    return float(g.degrees[g._check(i)])


def remove_node(g: Graph, i: int) -> Graph:
    return g.remove_nodes([g._check(i)])


def component_labels(g: Graph, removed=None):
    """Connected-component label per node; removed nodes get ``-1``."""
    alive = g.present.copy()
    if removed is not None:
        alive &= ~np.asarray(removed, dtype=bool)
    src, dst, w = g.half_edges()
    keep = alive[src] & alive[dst]
    n = g.node_count
    mat = csr_matrix((w[keep], (src[keep], dst[keep])), shape=(n, n))
    _, labels = connected_components(mat, directed=False)
    labels = labels.astype(np.int64)
    labels[~alive] = -1
    return labels


def largest_component(g: Graph, removed=None):
    """Size and members of the largest component among surviving nodes.

    Ties between equally large components go to the one holding the
    smallest node id.
    """
    labels = component_labels(g, removed)
    alive = labels >= 0
    if not alive.any():
        return 0, np.empty(0, dtype=np.int64)
    sizes = np.bincount(labels[alive])
    best = sizes.max()
    # first node (ascending id) whose component has the maximal size
    candidates = np.flatnonzero(alive & (sizes[np.maximum(labels, 0)] == best))
    members = np.flatnonzero(labels == labels[candidates[0]])
    return int(best), members


# -- file I/O ----------------------------------------------------------------

def _sort_ids(ids):
    try:
        return sorted(ids, key=int)
    except ValueError:
        return sorted(ids)


def load_edge_list(path, weighted: bool = True) -> Graph:
    """Read a whitespace-separated ``u v [w]`` edge list.

    Lines starting with ``#`` and blank lines are skipped. External ids are
    compacted to ``0..N-1`` in numeric order when every id is an integer,
    lexicographic order otherwise; the originals are kept in
    ``Graph.labels``. With ``weighted=False`` a third column is ignored.

    Isolated nodes cannot appear in an edge line; a ``#! node <id>``
    comment declares one (other readers see an ordinary comment).
    """
    us, vs, ws = [], [], []
    extra = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if s.startswith("#! node "):
                extra.update(s[len("#! node "):].split())
                continue
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"{path}:{lineno}: expected 'u v [w]', got {s!r}")
            a, b = parts[0], parts[1]
            if a == b:
                raise GraphFormatError(f"{path}:{lineno}: self-loop on node {a}")
            w = 1.0
            if len(parts) == 3 and weighted:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise GraphFormatError(f"{path}:{lineno}: bad weight {parts[2]!r}") from None
                if not w > 0 or not np.isfinite(w):
                    raise GraphFormatError(f"{path}:{lineno}: weight must be positive, got {parts[2]}")
            us.append(a)
            vs.append(b)
            ws.append(w)
    labels = _sort_ids(set(us) | set(vs) | extra)
    index = {lab: k for k, lab in enumerate(labels)}
    u = np.array([index[a] for a in us], dtype=np.int64)
    v = np.array([index[b] for b in vs], dtype=np.int64)
    return Graph.from_arrays(len(labels), u, v, np.array(ws), labels=labels)


def save_edge_list(g: Graph, path, use_labels: bool = True) -> None:
    u, v, w = g.edges()
    names = g.labels if (use_labels and g.labels is not None) else None
    with open(path, "w", encoding="utf-8") as fh:
        for i in np.flatnonzero(g.present & (g.degrees == 0)).tolist():
            fh.write(f"#! node {names[i] if names is not None else i}\n")
        for a, b, x in zip(u.tolist(), v.tolist(), w.tolist()):
            if names is not None:
                a, b = names[a], names[b]
            fh.write(f"{a}\t{b}\t{x!r}\n")


def save_id_map(g: Graph, path) -> None:
    labels = g.labels if g.labels is not None else list(range(g.node_count))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["external_id", "internal_id"])
        for k, lab in enumerate(labels):
            out.writerow([lab, k])


def id_map_path(output_path) -> str:
    root, _ = os.path.splitext(str(output_path))
    return root + ".idmap.csv"
