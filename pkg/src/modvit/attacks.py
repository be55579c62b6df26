"""Node-removal attacks, fragmentation traces and their cost integrals.

Three strategies share one bookkeeping path:

* ``initial``    score once, remove in ranking order;
* ``recomputed`` rescore the residual graph after every removal;
* ``mba``        module-based attack: score once, but only remove nodes
                 that currently bridge communities *and* sit in the
                 largest component.

The partition is never regrouped; removed nodes simply drop out of it.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np

from .centrality import ScoreVector, score
from .graph import Graph, component_labels, largest_component
from .partition import Partition, compute_stats

STRATEGIES = ("initial", "recomputed", "mba")


class ResidualState:
    """Incrementally updated degrees and modularity terms of a shrinking graph."""

    def __init__(self, g: Graph, p: Partition):
        s = compute_stats(g, p)
        self.g = g
        self.c = p.community_of
        self.alive = g.present.copy()
        self.k = g.degrees.copy()
        self.k_ext = s.k_external.copy()
        self.d = s.d.copy()
        self.m = s.total_weight
        self.m_internal = s.m_internal
        self.m0 = s.total_weight
        self.removed_weight = 0.0

    def remove(self, i: int) -> float:
        """Delete node ``i``; returns the edge weight removed with it."""
        if not self.alive[i]:
            raise ValueError(f"node {i} already removed")
        g = self.g
        lo, hi = g.indptr[i], g.indptr[i + 1]
        nb = g.indices[lo:hi]
        w = g.weights[lo:hi]
        live = self.alive[nb]
        nb, w = nb[live], w[live]
        ci = self.c[i]
        same = self.c[nb] == ci
        ki = float(w.sum())
        self.m_internal -= float(w[same].sum())
        np.subtract.at(self.d, self.c[nb], w)
        self.d[ci] -= ki
        self.k[nb] -= w
        self.k_ext[nb[~same]] -= w[~same]
        self.k[i] = 0.0
        self.k_ext[i] = 0.0
        self.alive[i] = False
        self.m -= ki
        self.removed_weight += ki
        return ki

    def modularity(self) -> float:
        if self.m <= 1e-12 * max(self.m0, 1.0):
            return 0.0
        return self.m_internal / self.m - float(self.d @ self.d) / (4.0 * self.m * self.m)

    @property
    def eta(self) -> float:
        return self.removed_weight / self.m0 if self.m0 > 0 else 0.0

    def bridges(self) -> np.ndarray:
        return self.alive & (self.k_ext > 0)


def fragmentation_sizes(g: Graph, order) -> np.ndarray:
    """Largest-component size after 0, 1, ..., len(order) removals.

    Computed backwards: start from the survivors and re-insert removed
    nodes last-first with union-find, so each prefix costs only the
    re-inserted node's edges.
    """
    order = [int(v) for v in order]
    n = g.node_count
    removed = np.zeros(n, dtype=bool)
    removed[order] = True
    labels = component_labels(g, removed)
    alive = labels >= 0
    parent = np.where(alive, 0, -1)
    sizes = np.zeros(n, dtype=np.int64)
    best = 0
    if alive.any():
        counts = np.bincount(labels[alive])
        # root of each component: its smallest member
        first = np.full(len(counts), n, dtype=np.int64)
        np.minimum.at(first, labels[alive], np.flatnonzero(alive))
        parent = np.where(alive, first[np.maximum(labels, 0)], -1)
        used = counts > 0
        sizes[first[used]] = counts[used]
        best = int(counts.max())
    parent = parent.tolist()
    sizes = sizes.tolist()

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    ptr = g.indptr.tolist()
    ind = g.indices.tolist()
    out = [0] * (len(order) + 1)
    out[len(order)] = best
    for t in range(len(order) - 1, -1, -1):
        v = order[t]
        parent[v] = v
        sizes[v] = 1
        for pos in range(ptr[v], ptr[v + 1]):
            u = ind[pos]
            if parent[u] < 0:
                continue
            ru, rv = find(u), find(v)
            if ru != rv:
                if sizes[ru] < sizes[rv]:
                    ru, rv = rv, ru
                parent[rv] = ru
                sizes[ru] += sizes[rv]
        best = max(best, sizes[find(v)])
        out[t] = best
    return np.asarray(out, dtype=np.int64)


@dataclass
class AttackTrace:
    """Removal log; row ``t`` describes the graph after ``t`` removals."""

    method: str
    strategy: str
    n: int
    removed: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    sigma: np.ndarray
    q: np.ndarray

    def __len__(self):
        return len(self.removed)

    def rows(self):
        node = [-1] + self.removed.tolist()
        for t in range(len(self.rho)):
            yield t, node[t], self.rho[t], self.eta[t], self.sigma[t], self.q[t]


def build_trace(g: Graph, p: Partition, order, method: str, strategy: str) -> AttackTrace:
    """Replay ``order`` on ``g`` and record rho, eta, sigma and Q per step."""
    order = np.asarray(order, dtype=np.int64)
    n = g.n_present
    state = ResidualState(g, p)
    eta = [0.0]
    q = [state.modularity()]
    for v in order.tolist():
        state.remove(v)
        eta.append(state.eta)
        q.append(state.modularity())
    sigma = fragmentation_sizes(g, order) / n
    rho = np.arange(len(order) + 1) / n
    return AttackTrace(method, strategy, n, order, rho, np.asarray(eta), sigma, np.asarray(q))


def _budget_count(g: Graph, budget: float) -> int:
    if not 0.0 < budget <= 1.0:
        raise ValueError("budget must lie in (0, 1]")
    if g.n_present == 0:
        raise ValueError("cannot attack an empty graph")
    return min(g.n_present, max(1, int(round(budget * g.n_present))))


def initial_attack(g: Graph, p: Partition, method: str, budget: float = 1.0,
                   scores: ScoreVector | None = None) -> AttackTrace:
    k = _budget_count(g, budget)
    sv = score(method, g, p) if scores is None else scores
    return build_trace(g, p, sv.ranking[:k], method, "initial")


def recomputed_order(g: Graph, p: Partition, method: str, k: int, on_step=None):
    """Removal order of a recomputed attack.

    ``on_step(graph, scores, node)`` is called before each removal. Once
    the residual graph has no edges every scorer is identically zero, so
    the remaining nodes are taken in ascending id without rescoring.
    """
    cur = g
    order = []
    while len(order) < k:
        if cur.total_weight <= 0 and on_step is None:
            rest = np.flatnonzero(cur.present)[: k - len(order)]
            order.extend(rest.tolist())
            break
        sv = score(method, cur, p, compute_stats(cur, p))
        node = int(sv.ranking[0])
        if on_step is not None:
            on_step(cur, sv, node)
        order.append(node)
        cur = cur.remove_nodes([node])
    return order


def recomputed_attack(g: Graph, p: Partition, method: str, budget: float = 1.0) -> AttackTrace:
    k = _budget_count(g, budget)
    return build_trace(g, p, recomputed_order(g, p, method, k), method, "recomputed")


def mba_order(g: Graph, p: Partition, ranking) -> list[int]:
    """Module-based attack order.

    Walk the ranking as a queue. The head is removed if it is a bridge in
    the largest component, dropped if it is no longer a bridge, and sent
    to the back if it is a bridge outside the largest component. Stops
    once the largest component holds no bridge.
    """
    state = ResidualState(g, p)
    removed = ~g.present.copy()
    queue = deque(int(v) for v in ranking)

    def eligible_mask():
        _, members = largest_component(g, removed)
        in_lc = np.zeros(g.node_count, dtype=bool)
        in_lc[members] = True
        return state.bridges(), in_lc

    bridge, in_lc = eligible_mask()
    eligible = int(np.count_nonzero(bridge & in_lc))
    order = []
    while eligible > 0:
        tau = queue.popleft()
        if bridge[tau] and in_lc[tau]:
            state.remove(tau)
            removed[tau] = True
            order.append(tau)
            bridge, in_lc = eligible_mask()
            eligible = int(np.count_nonzero(bridge & in_lc))
        elif bridge[tau]:
            queue.append(tau)
    return order


def mba_attack(g: Graph, p: Partition, method: str,
               scores: ScoreVector | None = None) -> AttackTrace:
    sv = score(method, g, p) if scores is None else scores
    return build_trace(g, p, mba_order(g, p, sv.ranking), method, "mba")


def run_attack(g: Graph, p: Partition, method: str, strategy: str,
               budget: float = 1.0) -> AttackTrace:
    if strategy == "initial":
        return initial_attack(g, p, method, budget)
    if strategy == "recomputed":
        return recomputed_attack(g, p, method, budget)
    if strategy == "mba":
        return mba_attack(g, p, method)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")


# -- cost --------------------------------------------------------------------

@dataclass(frozen=True)
class CostReport:
    c_rho: float
    c_eta: float


def _area(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x[-1] < 1.0:
        x = np.append(x, 1.0)
        y = np.append(y, y[-1])
    return float(np.trapezoid(y, x))


def cost(trace: AttackTrace) -> CostReport:
    """Area under sigma against rho and against eta, both over [0, 1].

    A trace that stops early is extended at its last sigma value.
    """
    if len(trace.rho) == 0:
        raise ValueError("empty trace")
    return CostReport(_area(trace.rho, trace.sigma), _area(trace.eta, trace.sigma))


# -- trace files -------------------------------------------------------------

TRACE_HEADER = ["step", "node_id", "rho", "eta", "sigma", "q"]


def save_trace(trace: AttackTrace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(TRACE_HEADER)
        for t, node, rho, eta, sigma, q in trace.rows():
            out.writerow([t, node, repr(float(rho)), repr(float(eta)),
                          repr(float(sigma)), repr(float(q))])


def load_trace(path, method: str = "", strategy: str = "", n: int | None = None) -> AttackTrace:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != TRACE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRACE_HEADER)}")
        rows = [r for r in reader if r]
    if not rows:
        raise ValueError(f"{path}: trace has no rows")
    arr = np.array([[float(x) for x in r[2:]] for r in rows])
    nodes = np.array([int(r[1]) for r in rows[1:]], dtype=np.int64)
    if n is None:
        n = int(round(1.0 / arr[1, 0])) if len(rows) > 1 and arr[1, 0] > 0 else 0
    return AttackTrace(method, strategy, n, nodes, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])


__all__ = [
    "AttackTrace", "CostReport", "ResidualState", "STRATEGIES", "build_trace",
    "cost", "fragmentation_sizes", "initial_attack", "load_trace", "mba_attack",
    "mba_order", "recomputed_attack", "recomputed_order",
    "run_attack", "save_trace",
]
