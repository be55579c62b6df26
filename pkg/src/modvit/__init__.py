"""Modularity vitality: signed community-aware node centrality and attack tools."""

__version__ = "0.1.0"

from .graph import Graph, degree, largest_component, load_edge_list, remove_node  # noqa: E402
from .partition import Partition, compute_stats, load_partition, neighboring_communities, save_partition  # noqa: E402
from .vitality import (  # noqa: E402
    VitalityReport,
    community_degree_all,
    modularity,
    modularity_after_removal,
    modularity_vitality_all,
)
from .detection import detect_communities  # noqa: E402
from .centrality import ScoreVector, score  # noqa: E402
from .attacks import AttackTrace, cost, initial_attack, mba_attack, recomputed_attack  # noqa: E402
from .correlation import kendall_tau  # noqa: E402
from .deception import deceive_greedy, deceive_initial  # noqa: E402

__all__ = [
    "AttackTrace", "Graph", "Partition", "ScoreVector", "VitalityReport",
    "community_degree_all", "compute_stats", "cost", "deceive_greedy",
    "deceive_initial", "degree", "detect_communities", "initial_attack",
    "kendall_tau", "largest_component", "load_edge_list", "load_partition",
    "mba_attack", "modularity", "modularity_after_removal",
    "modularity_vitality_all", "neighboring_communities", "recomputed_attack",
    "remove_node", "save_partition", "score",
]
