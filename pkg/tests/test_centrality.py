import numpy as np
import pytest

from modvit.centrality import (
    METHODS, ConvergenceError, UndefinedScoreError, chb_scores, commn_scores,
    dominant_group_vector, masuda_scores, power_iteration, rank_nodes, score,
    amc_scores, wmc_scores, degree_scores,
)
from modvit.graph import Graph
from modvit.partition import Partition, compute_stats

from conftest import dense_adjacency, random_instance, two_cliques

EXACT = 1e-12


def test_barbell_hand_values(barbell):
    g, p = barbell
    assert chb_scores(g, p).scores[2] == 7
    assert chb_scores(g, p).scores[0] == 6
    assert abs(masuda_scores(g, p).scores[2] - 0.5) <= EXACT
    assert masuda_scores(g, p).scores[0] == 0
    assert abs(wmc_scores(g, p).scores[2] - 11 / 3) <= EXACT
    assert abs(amc_scores(g, p).scores[2] + 2 / 3) <= EXACT
    assert degree_scores(g).scores[2] == 3


def test_barbell_group_eigenpair(barbell):
    g, p = barbell
    from modvit.centrality import group_network
    lam, u = dominant_group_vector(group_network(compute_stats(g, p)))
    assert abs(lam - 1) <= EXACT
    np.testing.assert_allclose(u, [2 ** -0.5] * 2, atol=1e-10)


def test_degree_triangle(triangle):
    assert degree_scores(triangle).scores.tolist() == [2, 2, 2]


def test_isolated_node_scores():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2)])
    p = Partition([0, 0, 1, 1])
    assert chb_scores(g, p).scores[3] == 0
    assert degree_scores(g).scores[3] == 0


def test_wmc_without_external_links():
    # k_ext = 0 leaves only the internal term, so WMC = mu k_i (= k_i when mu = 1)
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    p = Partition([0, 0, 1])
    s = compute_stats(g, p)
    assert s.mu[0] == 1.5  # 1/1 + 1/2, the literal sum
    assert abs(wmc_scores(g, p).scores[0] - 1.5 * 1) <= EXACT


def test_mas_single_community_all_zero(barbell):
    g, _ = barbell
    assert not masuda_scores(g, Partition(np.zeros(6, int))).scores.any()


def test_commn_undefined_for_disconnected_communities():
    g, p = two_cliques(4)
    with pytest.raises(UndefinedScoreError, match="community 0"):
        commn_scores(g, p)


def test_commn_barbell_oracle(barbell):
    g, p = barbell
    s = compute_stats(g, p)
    cc = commn_scores(g, p).scores
    assert np.isfinite(cc).all()
    frac = (8 / 3) / 3
    # R = max internal degree = 2; node 2: k_in 2 (max 2), k_ext 1 (max 1)
    assert abs(cc[2] - ((1 - frac) * 1 * 2 + (1 + frac) * (1 * 2) ** 2)) <= EXACT
    assert abs(cc[0] - (1 - frac) * 1 * 2) <= EXACT
    assert s.k_external[0] == 0


def test_commn_single_node_ratio_one():
    # node 1 holds both the max internal and max external degree of its community
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    p = Partition([0, 0, 1, 1])
    s = compute_stats(g, p)
    r = 1.0
    frac = s.mu[0] / 2
    want = (1 - frac) * r + (1 + frac) * r ** 2
    assert abs(commn_scores(g, p).scores[1] - want) <= EXACT


def _mas_oracle(g, p):
    """Masuda score from a dense eigendecomposition, one component at a time."""
    a = dense_adjacency(g)
    c = p.community_of
    n_comm = c.max() + 1
    onehot = np.eye(n_comm)[c]
    b = onehot.T @ a @ onehot
    np.fill_diagonal(b, 0)
    kc = a @ onehot
    from scipy.sparse.csgraph import connected_components
    _, comp = connected_components(b > 0, directed=False)
    best = (0.0, None)
    for lab in np.unique(comp):
        idx = np.flatnonzero(comp == lab)
        if len(idx) < 2:
            continue
        w, v = np.linalg.eigh(b[np.ix_(idx, idx)])
        if w[-1] > best[0] + 1e-9:
            u = np.zeros(n_comm)
            u[idx] = np.abs(v[:, -1])
            best = (w[-1], u)
    lam, u = best
    if u is None:
        return np.zeros(len(c))
    out = np.zeros(len(c))
    for i in range(len(c)):
        reach = sum(u[x] * kc[i, x] for x in range(n_comm) if x != c[i])
        out[i] = (2 * u[c[i]] - reach / lam) * reach
    return out


@pytest.mark.parametrize("seed", range(12))
def test_masuda_matches_eigh(seed):
    rng = np.random.default_rng(seed)
    g, p = random_instance(rng, n=80, p=0.06, n_comm=int(rng.integers(2, 9)), weighted=True)
    np.testing.assert_allclose(masuda_scores(g, p).scores, _mas_oracle(g, p), atol=1e-8)


def test_power_iteration_bipartite_spectrum():
    lam, v = power_iteration(np.array([[0.0, 2.0], [2.0, 0.0]]))
    assert abs(lam - 2) < 1e-9
    np.testing.assert_allclose(v, [2 ** -0.5] * 2, atol=1e-9)


def test_power_iteration_reports_non_convergence():
    rng = np.random.default_rng(0)
    m = rng.random((30, 30))
    with pytest.raises(ConvergenceError):
        power_iteration(m + m.T, max_iter=2)


def test_group_self_loops_changes_only_sensitivity(barbell):
    g, p = barbell
    with_loops = masuda_scores(g, p, group_self_loops=True).scores
    assert np.isfinite(with_loops).all()


def test_chb_wmc_amc_oracle():
    rng = np.random.default_rng(21)
    g, p = random_instance(rng, n=70, p=0.08, n_comm=6, weighted=True)
    a = dense_adjacency(g)
    c = p.community_of
    same = c[:, None] == c[None, :]
    k_in = (a * same).sum(1)
    k_ext = (a * ~same).sum(1)
    k = a.sum(1)
    size = np.bincount(c)
    b = np.array([len({c[j] for j in np.flatnonzero(a[i]) if c[j] != c[i]}) for i in range(70)])
    ratio = np.divide(k_in, k, out=np.zeros(70), where=k > 0)
    mu = np.bincount(c, weights=ratio)[c]
    np.testing.assert_allclose(chb_scores(g, p).scores, size[c] * k_in + b * k_ext, atol=1e-12)
    np.testing.assert_allclose(wmc_scores(g, p).scores, mu * k_in + (1 - mu) * k_ext, atol=1e-12)
    np.testing.assert_allclose(amc_scores(g, p).scores, (1 - mu) * k_in + mu * k_ext, atol=1e-12)


def test_singleton_partition_reductions():
    rng = np.random.default_rng(5)
    g, _ = random_instance(rng, n=40, p=0.15)
    p = Partition.singletons(40)
    s = compute_stats(g, p)
    assert not s.k_internal.any()
    b = (dense_adjacency(g) > 0).sum(1)
    np.testing.assert_allclose(chb_scores(g, p).scores, b * g.degrees)
    np.testing.assert_allclose(wmc_scores(g, p).scores, g.degrees)


@pytest.mark.parametrize("method", [m for m in METHODS if m != "cc"])
def test_label_equivariance(method):
    rng = np.random.default_rng(13)
    g, p = random_instance(rng, n=60, p=0.1, n_comm=5, weighted=True)
    perm = rng.permutation(60)
    u, v, w = g.edges()
    h = Graph.from_arrays(60, perm[u], perm[v], w)
    q = np.empty(60, dtype=np.int64)
    q[perm] = p.community_of
    a = score(method, g, p).scores
    b = score(method, h, Partition(q)).scores
    np.testing.assert_allclose(b[perm], a, rtol=1e-9, atol=1e-12)


def test_label_equivariance_commn(barbell):
    g, p = barbell
    perm = np.array([5, 3, 1, 0, 2, 4])
    u, v, w = g.edges()
    h = Graph.from_arrays(6, perm[u], perm[v], w)
    q = np.empty(6, dtype=np.int64)
    q[perm] = p.community_of
    np.testing.assert_allclose(commn_scores(h, Partition(q)).scores[perm],
                               commn_scores(g, p).scores, atol=1e-12)


@pytest.mark.parametrize("factor", [0.001, 3.0, 1e4])
def test_masuda_ranking_scale_invariant(factor):
    rng = np.random.default_rng(2)
    g, p = random_instance(rng, n=80, p=0.06, n_comm=6, weighted=True)
    u, v, w = g.edges()
    h = Graph.from_arrays(80, u, v, w * factor)
    a, b = masuda_scores(g, p), masuda_scores(h, p)
    np.testing.assert_array_equal(a.ranking, b.ranking)
    np.testing.assert_allclose(b.scores, a.scores * factor, rtol=1e-8, atol=1e-12)


def test_rank_nodes_ties_by_id():
    s = np.array([1.0, 3.0, 1.0, np.nan, 3.0])
    assert rank_nodes(s, ascending=False).tolist() == [1, 4, 0, 2]
    assert rank_nodes(s, ascending=True).tolist() == [0, 2, 1, 4]


def test_attack_directions(barbell):
    g, p = barbell
    assert score("mv", g, p).ranking[0] == 2  # most negative first
    assert score("rmv", g, p).ranking[0] == 0  # most positive first
    assert score("amv", g, p).ranking[0] == 0  # |0.137| > |-0.018|
    with pytest.raises(ValueError):
        score("betweenness", g, p)


def test_scores_length(barbell):
    g, p = barbell
    for m in METHODS:
        assert len(score(m, g, p)) == 6
