"""Community assignments and the per-partition statistics every score needs."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix

from .graph import Graph

# above this many (node, community) cells the dense aggregation is skipped


class PartitionFormatError(ValueError):
    pass


class Partition:
    """Disjoint cover of the node id space by communities ``0..C-1``.

    ``community_of[i]`` is the community of node ``i``. Construction
    compacts arbitrary integer labels to consecutive ids (in ascending
    label order) and keeps the original labels in ``community_labels``.
    """

    __slots__ = ("community_of", "community_labels")

    def __init__(self, community_of, community_labels=None):
        raw = np.asarray(community_of)
        if raw.ndim != 1:
            raise ValueError("community vector must be one-dimensional")
        labels, compact = np.unique(raw, return_inverse=True)
        self.community_of = compact.astype(np.int64).reshape(-1)
        self.community_of.flags.writeable = False
        if community_labels is None:
            community_labels = labels.tolist()
        else:
            community_labels = [community_labels[k] for k in labels.tolist()]
        self.community_labels = community_labels

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n))

    @classmethod
    def from_groups(cls, n: int, groups) -> "Partition":
        c = np.full(n, -1, dtype=np.int64)
        for k, members in enumerate(groups):
            c[np.asarray(list(members), dtype=np.int64)] = k
        if np.any(c < 0):
            raise ValueError(f"nodes not covered: {np.flatnonzero(c < 0).tolist()}")
        return cls(c)

    @property
    def n_nodes(self) -> int:
        return len(self.community_of)

    @property
    def n_communities(self) -> int:
        return len(self.community_labels)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.community_of == c)

    def groups(self):
        order = np.argsort(self.community_of, kind="stable")
        bounds = np.cumsum(np.bincount(self.community_of, minlength=self.n_communities))
        return np.split(order, bounds[:-1])

    def __eq__(self, other):
        return (isinstance(other, Partition)
                and np.array_equal(self.community_of, other.community_of))

    def __repr__(self):
        return f"Partition(n={self.n_nodes}, C={self.n_communities})"


@dataclass(frozen=True, eq=False)
class PartitionStats:
    """Cached degree bookkeeping for one (graph, partition) pair.

    Only nodes present in the graph contribute. Community degrees sum to
    ``2M``. ``mu`` is the per-community *sum* of internal/total degree
    ratios, so it ranges over ``[0, |community|]``; isolated nodes add 0.
    The sparse community-degree table is held as sorted triplets
    ``(pair_node, pair_comm, pair_weight)``.
    """

    community_of: np.ndarray
    degrees: np.ndarray
    total_weight: float
    d: np.ndarray
    sizes: np.ndarray
    m_internal: float
    k_internal: np.ndarray
    mu: np.ndarray
    sum_d_sq: float
    pair_node: np.ndarray
    pair_comm: np.ndarray
    pair_weight: np.ndarray

    @property
    def n_communities(self) -> int:
        return len(self.d)

    @cached_property
    def k_external(self) -> np.ndarray:
        return self.degrees - self.k_internal

    @cached_property
    def k_comm(self) -> csr_matrix:
        """``k_i^c`` as an N x C sparse matrix."""
        return csr_matrix((self.pair_weight, (self.pair_node, self.pair_comm)),
                          shape=(len(self.degrees), len(self.d)))


# below these sizes a bincount over a dense N x C scratch array beats the
# sparse product, whose fixed per-call overhead dominates on small graphs
SMALL_HALF_EDGES = 1 << 16
SMALL_CELLS = 1 << 20


def _aggregate_pairs(g: Graph, c, n_comm):
    """``k_i^c`` for every adjacent (node, community) pair, row-sorted."""
    n = g.node_count
    if len(g.indices) <= SMALL_HALF_EDGES and n * n_comm <= SMALL_CELLS:
        src, dst, w = g.half_edges()
        dense = np.bincount(src * n_comm + c[dst], weights=w, minlength=n * n_comm)
        # weights are strictly positive, so a nonzero sum marks a real pair
        keys = np.flatnonzero(dense)
        return keys // n_comm, keys % n_comm, dense[keys]
    # A @ onehot(c): linear in the edge count, no N x C array
    adj = csr_matrix((g.weights, g.indices, g.indptr), shape=(n, n))
    onehot = csr_matrix((np.ones(n), c, np.arange(n + 1)), shape=(n, n_comm))
    kc = adj @ onehot
    kc.sort_indices()
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(kc.indptr))
    return rows, kc.indices.astype(np.int64), kc.data


def compute_stats(g: Graph, p: Partition) -> PartitionStats:
    """One pass over the edges filling every partition statistic."""
    n = g.node_count
    if p.n_nodes != n:
        raise ValueError(f"partition covers {p.n_nodes} nodes, graph has {n}")
    c = p.community_of
    n_comm = p.n_communities
    k = g.degrees
    rows, cols, vals = _aggregate_pairs(g, c, n_comm)
    own = cols == c[rows]
    k_int = np.zeros(n)
    k_int[rows[own]] = vals[own]
    present = g.present
    d = np.bincount(c, weights=k, minlength=n_comm)
    sizes = np.bincount(c[present], minlength=n_comm)
    ratio = np.divide(k_int, k, out=np.zeros(n), where=k > 0)
    mu = np.bincount(c, weights=ratio, minlength=n_comm)
    return PartitionStats(
        community_of=c,
        degrees=k,
        total_weight=g.total_weight,
        d=d,
        sizes=sizes,
        m_internal=float(k_int.sum()) / 2.0,
        k_internal=k_int,
        mu=mu,
        sum_d_sq=float(np.dot(d, d)),
        pair_node=rows,
        pair_comm=cols,
        pair_weight=vals,
    )


def neighboring_communities(g: Graph, p: Partition, i=None):
    """Number of distinct foreign communities adjacent to a node.

    With ``i=None`` the whole vector is returned.
    """
    if i is not None:
        i = g._check(i)
        cs = p.community_of[g.neighbors(i)]
        return int(len(np.unique(cs[cs != p.community_of[i]])))
    stats = compute_stats(g, p)
    return bridging_counts(stats)


def bridging_counts(stats: PartitionStats) -> np.ndarray:
    foreign = stats.pair_comm != stats.community_of[stats.pair_node]
    return np.bincount(stats.pair_node[foreign], minlength=len(stats.degrees))


# -- file I/O ----------------------------------------------------------------

def save_partition(p: Partition, path, node_labels=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["node_id", "community_id"])
        for i, c in enumerate(p.community_of.tolist()):
            out.writerow([node_labels[i] if node_labels is not None else i, c])


def save_community_map(p: Partition, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["external_community_id", "community_id"])
        for k, lab in enumerate(p.community_labels):
            out.writerow([lab, k])


def load_partition(path, n_nodes: int, node_labels=None) -> Partition:
    """Read a ``node_id,community_id`` CSV covering every node exactly once.

    ``node_labels`` maps internal ids to the external ids used in the
    file (as produced by :func:`modvit.graph.load_edge_list`). Community
    ids are compacted; originals survive in ``community_labels``.
    """
    if node_labels is None:
        index = {str(i): i for i in range(n_nodes)}
    else:
        index = {str(lab): i for i, lab in enumerate(node_labels)}
    comm = np.full(n_nodes, -1, dtype=np.int64)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, 1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and row[0].strip() == "node_id":
                continue
            if len(row) != 2:
                raise PartitionFormatError(f"{path}:{lineno}: expected 'node_id,community_id'")
            node, label = row[0].strip(), row[1].strip()
            if node not in index:
                raise PartitionFormatError(f"{path}:{lineno}: unknown node id {node}")
            i = index[node]
            if comm[i] >= 0:
                raise PartitionFormatError(f"{path}:{lineno}: duplicate line for node {node}")
            try:
                val = int(label)
            except ValueError:
                raise PartitionFormatError(f"{path}:{lineno}: community id must be an integer") from None
            if val < 0:
                raise PartitionFormatError(f"{path}:{lineno}: negative community id")
            comm[i] = val
    missing = np.flatnonzero(comm < 0)
    if len(missing):
        names = missing.tolist() if node_labels is None else [node_labels[j] for j in missing]
        raise PartitionFormatError(f"{path}: nodes missing from partition: {names}")
    return Partition(comm)
