"""Seeded benchmark networks: cellular, connected Erdos-Renyi, scale-free.

All randomness comes from numpy's PCG64 seeded through ``SeedSequence``;
the cellular model spawns one child stream per cell so a cell's edges do
not depend on how many draws other cells consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, largest_component
from .partition import Partition

FAMILIES = ("cellular", "er", "scale_free")


@dataclass(frozen=True)
class GeneratorConfig:
    family: str = "cellular"
    n: int = 1000
    seed: int = 0
    p: float = 0.015
    m: int = 8
    gamma: float = 1.5
    # cellular knobs: number-of-cells range and the two density ranges
    cells: tuple = (10, 20)
    p_in: tuple = (0.1, 0.25)
    p_out: tuple = (0.0, 0.5)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


def _er_pairs(rng, n, p):
    """Upper-triangle ER(n, p) edges as two index arrays."""
    if n < 2 or p <= 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return iu[keep].astype(np.int64), ju[keep].astype(np.int64)


def cell_sizes(rng, n: int, n_cells: int) -> list[int]:
    """Draw cell sizes from N(n/n_cells, var=n_cells/5), rounded, floor 2.

    The last cell absorbs the remainder; if that leaves it below two
    nodes the whole draw is repeated.
    """
    mean, sd = n / n_cells, np.sqrt(n_cells / 5.0)
    while True:
        sizes = [max(2, int(round(x))) for x in rng.normal(mean, sd, n_cells - 1)]
        last = n - sum(sizes)
        if last >= 2:
            return sizes + [last]


def generate_cellular(cfg: GeneratorConfig = GeneratorConfig()):
    """Dense ER cells joined by single edges along an ER cell-to-cell graph.

    Returns the graph and the ground-truth cell partition.
    """
    seq = np.random.SeedSequence(cfg.seed)
    top_seq, cell_seq = seq.spawn(2)
    rng = np.random.default_rng(top_seq)
    lo, hi = cfg.cells
    n_cells = int(rng.integers(lo, hi + 1))
    if cfg.n < 2 * n_cells:
        raise ValueError(f"{cfg.n} nodes cannot fill {n_cells} cells of two or more")
    sizes = cell_sizes(rng, cfg.n, n_cells)
    p_out = float(rng.uniform(*cfg.p_out))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    us, vs = [], []
    for k, child in enumerate(cell_seq.spawn(n_cells)):
        crng = np.random.default_rng(child)
        p_in = float(crng.uniform(*cfg.p_in))
        a, b = _er_pairs(crng, sizes[k], p_in)
        us.append(a + offsets[k])
        vs.append(b + offsets[k])
    ca, cb = _er_pairs(rng, n_cells, p_out)
    if len(ca):
        ends_a = offsets[ca] + (rng.random(len(ca)) * np.asarray(sizes)[ca]).astype(np.int64)
        ends_b = offsets[cb] + (rng.random(len(cb)) * np.asarray(sizes)[cb]).astype(np.int64)
        us.append(ends_a)
        vs.append(ends_b)
    g = Graph.from_arrays(cfg.n, np.concatenate(us), np.concatenate(vs))
    truth = Partition(np.repeat(np.arange(n_cells), sizes))
    return g, truth


def generate_er_connected(cfg: GeneratorConfig = GeneratorConfig(family="er"),
                          max_attempts: int = 10_000) -> Graph:
    """ER(n, p) resampled until connected."""
    if not 0.0 < cfg.p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    rng = np.random.default_rng(cfg.seed)
    for _ in range(max_attempts):
        a, b = _er_pairs(rng, cfg.n, cfg.p)
        g = Graph.from_arrays(cfg.n, a, b)
        if largest_component(g)[0] == cfg.n:
            return g
    raise ValueError(
        f"no connected ER({cfg.n}, {cfg.p}) graph in {max_attempts} attempts; p is likely too small")


def generate_scale_free(cfg: GeneratorConfig = GeneratorConfig(family="scale_free")) -> Graph:
    """Growth with attachment probability proportional to ``degree ** gamma``.

    Starts from an (m+1)-clique; every later node links to ``m`` distinct
    existing nodes, so the edge count is ``m (n - m - 1) + m (m + 1) / 2``.
    ``gamma = 1`` is the linear Barabasi-Albert rule.
    """
    n, m, gamma = cfg.n, cfg.m, cfg.gamma
    if m >= n:
        raise ValueError("m must be smaller than n")
    rng = np.random.default_rng(cfg.seed)
    seed_size = m + 1
    deg = np.zeros(n)
    iu, ju = np.triu_indices(seed_size, k=1)
    us, vs = [iu], [ju]
    deg[:seed_size] = m
    for new in range(seed_size, n):
        weight = deg[:new] ** gamma
        targets = rng.choice(new, size=m, replace=False, p=weight / weight.sum())
        us.append(np.full(m, new))
        vs.append(targets)
        deg[targets] += 1
        deg[new] = m
    return Graph.from_arrays(n, np.concatenate(us), np.concatenate(vs))


def generate(cfg: GeneratorConfig):
    """Dispatch on family; returns ``(graph, truth_partition_or_None)``."""
    if cfg.family == "cellular":
        return generate_cellular(cfg)
    if cfg.family == "er":
        return generate_er_connected(cfg), None
    return generate_scale_free(cfg), None
