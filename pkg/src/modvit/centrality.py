"""Community-aware node scores used as attack orderings.

Every scorer maps ``(graph, partition)`` to a :class:`ScoreVector`. Nodes
absent from the graph score ``nan`` and never appear in a ranking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Graph
from .partition import Partition, PartitionStats, bridging_counts, compute_stats
from .vitality import community_degree_all, modularity_vitality_all


class ConvergenceError(RuntimeError):
    """Power iteration failed to reach its tolerance."""


class UndefinedScoreError(ValueError):
    """The score is mathematically undefined for this partition."""


# methods ranked low-to-high; every other method is ranked high-to-low
ASCENDING = frozenset({"mv"})

METHODS = ("mv", "amv", "rmv", "cd", "mas", "chb", "wmc-d", "amc-d", "cc", "deg")

DISPLAY = {"mv": "MV", "amv": "AMV", "rmv": "RMV", "cd": "CD", "mas": "Mas",
           "chb": "CHB", "wmc-d": "WMC-D", "amc-d": "AMC-D", "cc": "CC",
           "deg": "Deg"}


def rank_nodes(scores: np.ndarray, ascending: bool) -> np.ndarray:
    """Attack order over non-nan entries; ties go to the smaller id."""
    ids = np.flatnonzero(~np.isnan(scores))
    key = scores[ids] if ascending else -scores[ids]
    return ids[np.lexsort((ids, key))]


@dataclass(frozen=True, eq=False)
class ScoreVector:
    method: str
    scores: np.ndarray
    ranking: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ranking",
                           rank_nodes(self.scores, self.method in ASCENDING))

    def __len__(self):
        return len(self.scores)

    @property
    def priority(self) -> np.ndarray:
        """Scores oriented so that larger means attacked earlier."""
        return -self.scores if self.method in ASCENDING else self.scores


def _masked(g: Graph, values) -> np.ndarray:
    out = np.asarray(values, dtype=np.float64).copy()
    out[~g.present] = np.nan
    return out


def degree_scores(g: Graph, p: Partition | None = None,
                  stats: PartitionStats | None = None) -> ScoreVector:
    return ScoreVector("deg", _masked(g, g.degrees))


def chb_scores(g: Graph, p: Partition, stats: PartitionStats | None = None) -> ScoreVector:
    """Community hub-bridge: ``|community| k_in + b_i k_ext``."""
    s = compute_stats(g, p) if stats is None else stats
    size = s.sizes[s.community_of]
    b = bridging_counts(s)
    return ScoreVector("chb", _masked(g, size * s.k_internal + b * s.k_external))


def wmc_scores(g: Graph, p: Partition, stats: PartitionStats | None = None) -> ScoreVector:
    """Weighted modular centrality with degree as the base measure."""
    s = compute_stats(g, p) if stats is None else stats
    mu = s.mu[s.community_of]
    return ScoreVector("wmc-d", _masked(g, mu * s.k_internal + (1.0 - mu) * s.k_external))


def amc_scores(g: Graph, p: Partition, stats: PartitionStats | None = None) -> ScoreVector:
    """Bridge-favouring counterpart of :func:`wmc_scores` (weights swapped)."""
    s = compute_stats(g, p) if stats is None else stats
    mu = s.mu[s.community_of]
    return ScoreVector("amc-d", _masked(g, (1.0 - mu) * s.k_internal + mu * s.k_external))


def commn_scores(g: Graph, p: Partition, stats: PartitionStats | None = None,
                 reach=None) -> ScoreVector:
    """Commn-centrality.

    ``reach`` overrides the per-community scale ``R_c`` (array of length C);
    the default is the community's maximum internal degree. A community
    whose members have no external edges makes the score undefined and
    raises :class:`UndefinedScoreError`. A zero maximum internal degree
    contributes a zero internal term.
    """
    s = compute_stats(g, p) if stats is None else stats
    c = s.community_of
    present = g.present
    n_comm = s.n_communities
    max_in = np.zeros(n_comm)
    max_ext = np.zeros(n_comm)
    np.maximum.at(max_in, c[present], s.k_internal[present])
    np.maximum.at(max_ext, c[present], s.k_external[present])
    live = s.sizes > 0
    dead = np.flatnonzero(live & (max_ext <= 0))
    if len(dead):
        raise UndefinedScoreError(
            f"commn-centrality undefined: community {int(dead[0])} has no external links")
    r = max_in if reach is None else np.asarray(reach, dtype=np.float64)
    frac = np.divide(s.mu, s.sizes, out=np.zeros(n_comm), where=s.sizes > 0)[c]
    inner = np.divide(s.k_internal, max_in[c], out=np.zeros(len(c)), where=max_in[c] > 0)
    outer = np.divide(s.k_external, max_ext[c], out=np.zeros(len(c)), where=max_ext[c] > 0)
    rc = r[c]
    vals = (1.0 - frac) * inner * rc + (1.0 + frac) * (outer * rc) ** 2
    return ScoreVector("cc", _masked(g, vals))


# -- Masuda's group-network score ------------------------------------------------

def group_network(s: PartitionStats, self_loops: bool = False) -> np.ndarray:
    """C x C matrix of edge weight between communities."""
    n_comm = s.n_communities
    own = s.community_of[s.pair_node]
    mat = np.zeros((n_comm, n_comm))
    np.add.at(mat, (own, s.pair_comm), s.pair_weight)
    if not self_loops:
        np.fill_diagonal(mat, 0.0)
    return mat


def power_iteration(mat: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000):
    """Dominant eigenpair of a symmetric nonnegative matrix.

    Iterates on ``mat + I`` so that a bipartite spectrum (``-lambda`` and
    ``lambda``) cannot make the iterate oscillate. Returns the eigenvalue
    and a nonnegative unit-norm eigenvector.
    """
    n = mat.shape[0]
    shifted = mat + np.eye(n)
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        nxt = shifted @ v
        nxt /= np.linalg.norm(nxt)
        if np.max(np.abs(nxt - v)) < tol:
            v = nxt
            break
        v = nxt
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    v = np.abs(v)
    return float(v @ mat @ v), v


def dominant_group_vector(mat: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000):
    """Leading eigenpair of the group network, one component at a time.

    The component with the largest eigenvalue (smallest community id on a
    tie) supplies the eigenvector; every other entry is zero.
    """
    n_comm = mat.shape[0]
    u = np.zeros(n_comm)
    if n_comm == 0 or not np.any(mat > 0):
        return 0.0, u
    _, comp = connected_components(csr_matrix(mat > 0), directed=False)
    best_lam, best_vec, best_idx = 0.0, None, None
    for label in np.unique(comp):
        idx = np.flatnonzero(comp == label)
        if len(idx) < 2:
            continue
        lam, vec = power_iteration(mat[np.ix_(idx, idx)], tol, max_iter)
        if best_vec is None or lam > best_lam + tol:
            best_lam, best_vec, best_idx = lam, vec, idx
    if best_vec is None or best_lam <= 0:
        return 0.0, u
    u[best_idx] = best_vec
    return best_lam, u


def masuda_scores(g: Graph, p: Partition, stats: PartitionStats | None = None,
                  group_self_loops: bool = False) -> ScoreVector:
    """Masuda's mod-strategy score on the weighted group network."""
    s = compute_stats(g, p) if stats is None else stats
    lam, u = dominant_group_vector(group_network(s, group_self_loops))
    n = len(s.degrees)
    if lam <= 0:
        return ScoreVector("mas", _masked(g, np.zeros(n)))
    foreign = s.pair_comm != s.community_of[s.pair_node]
    reach = np.bincount(s.pair_node[foreign],
                        weights=u[s.pair_comm[foreign]] * s.pair_weight[foreign],
                        minlength=n)
    x = reach / lam
    return ScoreVector("mas", _masked(g, (2.0 * u[s.community_of] - x) * reach))


# -- vitality-derived scores ----------------------------------------------------

def mv_scores(g: Graph, p: Partition, stats: PartitionStats | None = None) -> ScoreVector:
    return ScoreVector("mv", modularity_vitality_all(g, p, stats).vitality)


def amv_scores(g: Graph, p: Partition, stats: PartitionStats | None = None) -> ScoreVector:
    return ScoreVector("amv", np.abs(modularity_vitality_all(g, p, stats).vitality))


def rmv_scores(g: Graph, p: Partition, stats: PartitionStats | None = None) -> ScoreVector:
    return ScoreVector("rmv", modularity_vitality_all(g, p, stats).vitality)


def cd_scores(g: Graph, p: Partition, stats: PartitionStats | None = None) -> ScoreVector:
    return ScoreVector("cd", community_degree_all(g, p, stats))


SCORERS = {
    "mv": mv_scores,
    "amv": amv_scores,
    "rmv": rmv_scores,
    "cd": cd_scores,
    "mas": masuda_scores,
    "chb": chb_scores,
    "wmc-d": wmc_scores,
    "amc-d": amc_scores,
    "cc": commn_scores,
    "deg": degree_scores,
}


def score(method: str, g: Graph, p: Partition,
          stats: PartitionStats | None = None) -> ScoreVector:
    try:
        fn = SCORERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    return fn(g, p, stats)
