"""Modularity, its single-node removal update, and batch modularity vitality.

Modularity is evaluated in the link/degree form

    Q = M_in / M - sum_c d_c^2 / (4 M^2)

and deleting node ``i`` (no regrouping) changes only ``M``, ``M_in`` and
the community degrees it touches::

    Q_i = (M_in - k_i^in) / (M - k_i) - sum_c (d_c - h_ic)^2 / (4 (M - k_i)^2)
    h_ic = k_i^c + k_i [c == c_i]

Because ``h_ic`` is zero outside the node's own community and its
neighbours' communities, the sum is ``sum_c d_c^2`` corrected by one term
per nonzero ``h_ic``. The whole vector costs one pass over the
(node, community) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .partition import Partition, PartitionStats, compute_stats

# M - k_i below this fraction of M counts as "no edges left"
_EMPTY_REL = 1e-12


def modularity(g: Graph, p: Partition, stats: PartitionStats | None = None) -> float:
    """Newman modularity; 0 for a graph without edges."""
    s = compute_stats(g, p) if stats is None else stats
    m = s.total_weight
    if m <= 0:
        return 0.0
    return s.m_internal / m - s.sum_d_sq / (4.0 * m * m)


def _h_pairs(s: PartitionStats):
    """Nonzero ``h_ic`` as (node, community, value) triplets.

    The own-community entry of every node gets ``k_i`` added; nodes with
    no internal edge get a fresh own-community entry.
    """
    k = s.degrees
    node, comm, val = s.pair_node, s.pair_comm, s.pair_weight.copy()
    own = comm == s.community_of[node]
    val[own] += k[node[own]]
    missing = np.ones(len(k), dtype=bool)
    missing[node[own]] = False
    missing &= k > 0
    extra = np.flatnonzero(missing)
    if len(extra):
        node = np.concatenate([node, extra])
        comm = np.concatenate([comm, s.community_of[extra]])
        val = np.concatenate([val, k[extra]])
    return node, comm, val


def _removal_terms(s: PartitionStats, sign: float):
    """Per node ``sum_c (d_c + sign*h_ic)^2`` via the sparse correction."""
    node, comm, h = _h_pairs(s)
    corr = np.bincount(node, weights=2.0 * sign * s.d[comm] * h + h * h,
                       minlength=len(s.degrees))
    return s.sum_d_sq + corr


def modularity_after_removal(g: Graph, p: Partition, stats: PartitionStats | None,
                             i: int) -> float:
    """Modularity of ``G - {i}`` under the induced partition, in O(deg_i + 1)."""
    s = compute_stats(g, p) if stats is None else stats
    i = g._check(i)
    m = s.total_weight
    k = s.degrees[i]
    rest = m - k
    if rest <= _EMPTY_REL * m or m <= 0:
        return 0.0
    lo, hi = g.indptr[i], g.indptr[i + 1]
    touched, inv = np.unique(s.community_of[g.indices[lo:hi]], return_inverse=True)
    h_vals = np.bincount(inv, weights=g.weights[lo:hi], minlength=len(touched))
    ci = s.community_of[i]
    pos = np.searchsorted(touched, ci)
    if pos < len(touched) and touched[pos] == ci:
        h_vals[pos] += k
    else:
        touched = np.append(touched, ci)
        h_vals = np.append(h_vals, k)
    d = s.d[touched]
    sq = s.sum_d_sq - float(np.sum(2.0 * d * h_vals - h_vals * h_vals))
    return (s.m_internal - s.k_internal[i]) / rest - sq / (4.0 * rest * rest)


def modularity_after_removal_all(s: PartitionStats) -> np.ndarray:
    m = s.total_weight
    rest = m - s.degrees
    empty = (rest <= _EMPTY_REL * m) | (m <= 0)
    safe = np.where(empty, 1.0, rest)
    sq = _removal_terms(s, -1.0)
    out = (s.m_internal - s.k_internal) / safe - sq / (4.0 * safe * safe)
    out[empty] = 0.0
    return out


@dataclass(frozen=True)
class VitalityReport:
    """Original modularity plus the signed vitality of every node.

    Negative entries mark community bridges (removal raises modularity),
    positive ones community hubs. Absent nodes carry ``nan``.
    """

    q_original: float
    vitality: np.ndarray
    stats: PartitionStats

    def h_summary(self, i: int) -> dict:
        """Nonzero ``h_ic`` of node ``i`` keyed by community id."""
        node, comm, val = _h_pairs(self.stats)
        sel = node == i
        return dict(zip(comm[sel].tolist(), val[sel].tolist()))


def modularity_vitality_all(g: Graph, p: Partition,
                            stats: PartitionStats | None = None) -> VitalityReport:
    s = compute_stats(g, p) if stats is None else stats
    q = modularity(g, p, s)
    vit = q - modularity_after_removal_all(s)
    vit[~g.present] = np.nan
    return VitalityReport(q, vit, s)


def community_degree_all(g: Graph, p: Partition,
                         stats: PartitionStats | None = None) -> np.ndarray:
    """Community-Degree: the removal update with ``h`` added, not subtracted.

    ``sum_c (d_c + h_ic)^2 / (4 (M - k_i)^2)``, defined as 0 when no edges
    would remain.
    """
    s = compute_stats(g, p) if stats is None else stats
    m = s.total_weight
    rest = m - s.degrees
    empty = (rest <= _EMPTY_REL * m) | (m <= 0)
    safe = np.where(empty, 1.0, rest)
    out = _removal_terms(s, +1.0) / (4.0 * safe * safe)
    out[empty] = 0.0
    out[~g.present] = np.nan
    return out
