"""Multi-level greedy modularity maximisation with a connectivity split.

Louvain-style: local node moves until no move gains more than
``min_gain`` modularity, then communities are collapsed into weighted
super-nodes and the procedure repeats. Afterwards every community that
is internally disconnected is split into its connected pieces, which
can only raise modularity.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Graph
from .partition import Partition


def _local_moves(indptr, indices, weights, k, m2, rng, min_gain):
    """One level of greedy moves on an aggregated graph; returns labels."""
    n = len(k)
    labels = list(range(n))
    tot = list(k)
    ind = indices.tolist()
    wts = weights.tolist()
    ptr = indptr.tolist()
    kk = list(k)
    m = m2 / 2.0
    threshold = min_gain * m
    moved_any = False
    while True:
        moved = False
        for i in rng.permutation(n).tolist():
            ci = labels[i]
            ki = kk[i]
            links = {}
            for pos in range(ptr[i], ptr[i + 1]):
                j = ind[pos]
                if j != i:
                    cj = labels[j]
                    links[cj] = links.get(cj, 0.0) + wts[pos]
            tot[ci] -= ki
            stay = links.get(ci, 0.0) - tot[ci] * ki / m2
            best_c, best_gain = ci, stay
            for c in sorted(links):
                gain = links[c] - tot[c] * ki / m2
                if gain > best_gain:
                    best_c, best_gain = c, gain
            if best_c != ci and best_gain - stay > threshold:
                labels[i] = best_c
                tot[best_c] += ki
                moved = moved_any = True
            else:
                tot[ci] += ki
        if not moved:
            break
    return np.asarray(labels, dtype=np.int64), moved_any


def _aggregate(indptr, indices, weights, labels):
    n_new = int(labels.max()) + 1
    src = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    mat = csr_matrix((weights, (labels[src], labels[indices])), shape=(n_new, n_new))
    mat.sum_duplicates()
    mat.sort_indices()
    return mat.indptr, mat.indices, mat.data


def _relabel(values):
    _, inv = np.unique(values, return_inverse=True)
    return inv.reshape(-1).astype(np.int64)


def split_disconnected(g: Graph, community_of) -> np.ndarray:
    """Split each community into the connected pieces of its own edges."""
    c = np.asarray(community_of)
    src, dst, w = g.half_edges()
    keep = c[src] == c[dst]
    n = g.node_count
    mat = csr_matrix((w[keep], (src[keep], dst[keep])), shape=(n, n))
    _, comp = connected_components(mat, directed=False)
    return comp


def _order_by_first_member(labels):
    first = {}
    for i, c in enumerate(labels.tolist()):
        first.setdefault(c, i)
    order = {c: r for r, c in enumerate(sorted(first, key=first.get))}
    return np.array([order[c] for c in labels.tolist()], dtype=np.int64)


def detect_communities(g: Graph, seed: int = 0, max_levels: int | None = None,
                       min_gain: float = 1e-9) -> Partition:
    """Partition ``g`` by greedy modularity maximisation.

    Deterministic for a fixed ``seed`` (which only shuffles the node visit
    order). Ties between equally good target communities go to the lowest
    community id. Community ids in the result are numbered by their
    smallest member. Removed nodes become singleton communities.
    """
    n = g.node_count
    if n == 0:
        raise ValueError("cannot partition an empty graph")
    rng = np.random.default_rng(seed)
    membership = np.arange(n)
    m2 = float(g.weights.sum())
    if m2 > 0:
        indptr, indices, weights = g.indptr, g.indices, g.weights
        level = 0
        while max_levels is None or level < max_levels:
            k = np.bincount(np.repeat(np.arange(len(indptr) - 1), np.diff(indptr)),
                            weights=weights, minlength=len(indptr) - 1)
            labels, moved = _local_moves(indptr, indices, weights, k, m2, rng, min_gain)
            if not moved:
                break
            labels = _relabel(labels)
            membership = labels[membership]
            indptr, indices, weights = _aggregate(indptr, indices, weights, labels)
            level += 1
    membership = split_disconnected(g, membership)
    return Partition(_order_by_first_member(membership))
