"""Community deception by deleting the nodes that hold communities together.

Removing a node lowers modularity by exactly its modularity vitality, so
the greedy choice at every step is the node of largest vitality on the
current residual graph. The one-shot variant ranks once on the original
graph.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .attacks import ResidualState
from .centrality import rank_nodes
from .graph import Graph
from .partition import Partition, compute_stats
from .vitality import modularity_vitality_all

PLATEAU = 1e-9


@dataclass
class DeceptionPlan:
    removals: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    q: list = field(default_factory=list)
    # vitality of each removed node on the graph it was removed from
    gains: list = field(default_factory=list)
    stopping: str = "node_budget"

    def rows(self):
        node = [-1] + list(self.removals)
        for t in range(len(self.q)):
            yield t, node[t], self.rho[t], self.eta[t], self.q[t]


def _start(g: Graph, p: Partition):
    state = ResidualState(g, p)
    plan = DeceptionPlan(rho=[0.0], eta=[0.0], q=[state.modularity()])
    return state, plan


def _record(plan: DeceptionPlan, state: ResidualState, node: int, gain: float, n: int):
    state.remove(node)
    plan.removals.append(int(node))
    plan.gains.append(float(gain))
    plan.rho.append(len(plan.removals) / n)
    plan.eta.append(state.eta)
    plan.q.append(state.modularity())


def _limit(g: Graph, budget) -> int:
    if budget is None:
        return g.n_present
    if not 0.0 < budget <= 1.0:
        raise ValueError("budget must lie in (0, 1]")
    return min(g.n_present, max(1, int(round(budget * g.n_present))))


def deceive_initial(g: Graph, p: Partition, budget: float) -> DeceptionPlan:
    """Remove nodes in descending order of their original vitality."""
    n = g.n_present
    k = _limit(g, budget)
    vit = modularity_vitality_all(g, p).vitality
    state, plan = _start(g, p)
    for node in rank_nodes(vit, ascending=False)[:k].tolist():
        _record(plan, state, node, vit[node], n)
    return plan


def deceive_greedy(g: Graph, p: Partition, budget: float | None = None,
                   target_q: float | None = None, plateau: float = PLATEAU) -> DeceptionPlan:
    """Repeatedly delete the node of largest vitality on the residual graph.

    Stops at the node budget, once modularity reaches ``target_q``, or
    when no single removal would lower modularity by ``plateau`` or more.
    """
    n = g.n_present
    k = _limit(g, budget)
    state, plan = _start(g, p)
    cur = g
    while True:
        if len(plan.removals) >= k:
            plan.stopping = "node_budget"
            break
        if target_q is not None and plan.q[-1] <= target_q:
            plan.stopping = "target_q"
            break
        vit = modularity_vitality_all(cur, p, compute_stats(cur, p)).vitality
        ranking = rank_nodes(vit, ascending=False)
        if len(ranking) == 0 or vit[ranking[0]] < plateau:
            plan.stopping = "plateau"
            break
        node = int(ranking[0])
        _record(plan, state, node, vit[node], n)
        cur = cur.remove_nodes([node])
    return plan


PLAN_HEADER = ["step", "node_id", "rho", "eta", "q"]


def save_plan(plan: DeceptionPlan, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(PLAN_HEADER)
        for t, node, rho, eta, q in plan.rows():
            out.writerow([t, node, repr(float(rho)), repr(float(eta)), repr(float(q))])


def load_plan(path) -> DeceptionPlan:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader) != PLAN_HEADER:
            raise ValueError(f"{path}: expected header {','.join(PLAN_HEADER)}")
        rows = [r for r in reader if r]
    arr = np.array([[float(x) for x in r[2:]] for r in rows])
    return DeceptionPlan(removals=[int(r[1]) for r in rows[1:]],
                         rho=arr[:, 0].tolist(), eta=arr[:, 1].tolist(),
                         q=arr[:, 2].tolist(), stopping="")
