"""Acceptance criteria for the core component.

Each test prints one PASS/FAIL line; the lines are repeated in the
terminal summary (see conftest.py). The benchmark-scale tests share
module-level fixtures so each network family is generated only once.
"""

import time

import numpy as np
import pytest

from modvit.attacks import ResidualState
from modvit.benchmark import TABLE_METHODS, ExperimentSpec, cell_seed, run_cell
from modvit.centrality import DISPLAY, amc_scores, chb_scores, masuda_scores, score
from modvit.correlation import kendall_tau
from modvit.deception import deceive_greedy, deceive_initial
from modvit.detection import detect_communities
from modvit.generators import GeneratorConfig, generate, generate_cellular
from modvit.graph import Graph, remove_node
from modvit.partition import Partition, compute_stats
from modvit.vitality import (
    community_degree_all, modularity, modularity_after_removal, modularity_vitality_all,
)

from conftest import BARBELL_EDGES, random_instance

REPLICATIONS = 100
MASTER_SEED = 0
ACCEPTANCE = []


def report(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def _run_family(family, strategies):
    spec = ExperimentSpec(families=[family], replications=REPLICATIONS,
                          strategies=list(strategies), seed=MASTER_SEED)
    return [run_cell(family, i, spec) for i in range(REPLICATIONS)], spec


def _mean_cost(runs, strategy, method, col):
    vals = [r["costs"][f"{strategy}/{method}"][col] for r in runs]
    return float(np.mean(vals))


@pytest.fixture(scope="module")
def cellular_runs():
    return _run_family("cellular", ("initial", "recomputed", "mba"))


@pytest.fixture(scope="module")
def er_runs():
    return _run_family("er", ("initial",))


@pytest.fixture(scope="module")
def sf_runs():
    return _run_family("scale_free", ("initial",))


# 1 -------------------------------------------------------------------------

def test_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        g, p = random_instance(rng, n=100, p=0.05, n_comm=int(rng.integers(2, 9)))
        s = compute_stats(g, p)
        for i in range(100):
            fast = modularity_after_removal(g, p, s, i)
            naive = modularity(remove_node(g, i), p)
            err = abs(fast - naive) / abs(naive) if naive != 0 else abs(fast)
            worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10
    assert report("oracle equivalence", ok,
                  f"max relative error {worst:.2e} (<= 1e-12), {elapsed:.2f} s (< 10 s)")


# 2 -------------------------------------------------------------------------

def test_hand_fixture():
    g = Graph.from_edges(6, BARBELL_EDGES)
    p = Partition([0, 0, 0, 1, 1, 1])
    rep = modularity_vitality_all(g, p)
    checks = {
        "Q": (rep.q_original, 5 / 14),
        "MV(0)": (rep.vitality[0], 5 / 14 - 0.22),
        "MV(2)": (rep.vitality[2], -1 / 56),
        "CHB(2)": (chb_scores(g, p).scores[2], 7.0),
        "Mas(2)": (masuda_scores(g, p).scores[2], 0.5),
        "CD(0)": (community_degree_all(g, p)[0], 1.70),
    }
    errs = {k: abs(a - b) for k, (a, b) in checks.items()}
    ok = max(errs.values()) <= 1e-12
    assert report("barbell hand fixture", ok,
                  ", ".join(f"{k} err {v:.1e}" for k, v in errs.items()))


# 3 -------------------------------------------------------------------------

CELLULAR_MV_TARGET = {"initial": 0.165, "recomputed": 0.107, "mba": 0.086}


def test_cellular_attack_costs(cellular_runs):
    runs, spec = cellular_runs
    ok = True
    parts = []
    for strategy, target in CELLULAR_MV_TARGET.items():
        means = {m: _mean_cost(runs, strategy, m, 0) for m in TABLE_METHODS}
        mv = means["mv"]
        band = abs(mv - target) <= 0.07
        beaten = [f"{DISPLAY[m]} {v:.3f}" for m, v in means.items() if m != "mv" and v < mv]
        ok &= band and not beaten
        parts.append(f"{strategy} MV {mv:.3f} (target {target}+-0.07 {'ok' if band else 'OUT'}"
                     + (f"; beaten by {', '.join(beaten)})" if beaten else "; best)"))
        print(strategy, {DISPLAY[m]: round(v, 3) for m, v in means.items()})
    assert report("cellular attack costs", ok, "; ".join(parts))


# 4 -------------------------------------------------------------------------

DEGREE_FAMILY = ("deg", "wmc-d", "amc-d", "cd")


def test_er_scale_free_ordering(sf_runs, er_runs):
    sf, _ = sf_runs
    er, _ = er_runs
    sf_eta = {m: _mean_cost(sf, "initial", m, 1) for m in TABLE_METHODS}
    er_rho = {m: _mean_cost(er, "initial", m, 0) for m in TABLE_METHODS}
    sf_best = min(sf_eta, key=sf_eta.get)
    er_best = min(er_rho, key=er_rho.get)
    ok = sf_best == "mv" and er_best in DEGREE_FAMILY
    print("scale-free initial C_eta", {DISPLAY[m]: round(v, 3) for m, v in sf_eta.items()})
    print("ER initial C_rho", {DISPLAY[m]: round(v, 3) for m, v in er_rho.items()})
    assert report("ER and scale-free ordering", ok,
                  f"scale-free best C_eta {DISPLAY[sf_best]} {sf_eta[sf_best]:.3f} "
                  f"(MV {sf_eta['mv']:.3f}); ER best C_rho {DISPLAY[er_best]} "
                  f"{er_rho[er_best]:.3f} (degree family required)")


# 5 -------------------------------------------------------------------------

def test_detector_sanity(cellular_runs, er_runs, sf_runs):
    targets = {"cellular": (cellular_runs, 0.91), "er": (er_runs, 0.240),
               "scale_free": (sf_runs, 0.196)}
    ok = True
    parts = []
    for family, ((runs, _), target) in targets.items():
        q = float(np.mean([r["modularity"] for r in runs]))
        inside = abs(q - target) <= 0.05
        ok &= inside
        parts.append(f"{family} {q:.3f} (target {target}+-0.05)")
    assert report("detector sanity", ok, "; ".join(parts))


# 6 -------------------------------------------------------------------------

def test_correlation_structure():
    taus = {"mv_amv": [], "amc_amv": [], "amc_mv": []}
    for i in range(REPLICATIONS):
        seed = cell_seed(MASTER_SEED, i)
        g, _ = generate(GeneratorConfig(family="cellular", seed=seed))
        p = detect_communities(g, seed=seed)
        s = compute_stats(g, p)
        mv = score("mv", g, p, s)
        amv = score("amv", g, p, s)
        amc = amc_scores(g, p, s)
        taus["mv_amv"].append(kendall_tau(mv, amv))
        taus["amc_amv"].append(kendall_tau(amc, amv))
        taus["amc_mv"].append(kendall_tau(amc, mv))
    m = {k: float(np.mean(v)) for k, v in taus.items()}
    ok = m["mv_amv"] < 0 and m["amc_amv"] > m["amc_mv"]
    assert report("correlation structure", ok,
                  f"tau(MV,AMV) {m['mv_amv']:.3f} (< 0); tau(AMC-D,AMV) {m['amc_amv']:.3f} "
                  f"> tau(AMC-D,MV) {m['amc_mv']:.3f}")


# 7 -------------------------------------------------------------------------

# cellular edge count grows with n^2 at fixed cell count: ~1e5, 2e5, 4e5 edges
SCALING_N = (3360, 4750, 6720)


def test_scaling():
    times, sizes = [], []
    for n in SCALING_N:
        g, truth = generate_cellular(GeneratorConfig(n=n, seed=1))
        best = np.inf
        for _ in range(7):
            t0 = time.perf_counter()
            modularity_vitality_all(g, truth)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
        sizes.append(g.total_weight)
    ratios = [b / a for a, b in zip(times, times[1:])]
    ok = all(r <= 3 for r in ratios) and max(times) < 5
    assert report("scaling", ok,
                  "M " + "/".join(f"{m:.0f}" for m in sizes)
                  + " times " + "/".join(f"{t * 1e3:.1f} ms" for t in times)
                  + " ratios " + "/".join(f"{r:.2f}" for r in ratios) + " (<= 3, each < 5 s)")


# 8 -------------------------------------------------------------------------

def test_deception_step_identity():
    worst = 0.0
    greedy_q, initial_q = [], []
    for seed in range(20):
        g, _ = generate_cellular(GeneratorConfig(seed=seed))
        p = detect_communities(g, seed=seed)
        plan = deceive_greedy(g, p, budget=0.05)
        q = np.asarray(plan.q)
        worst = max(worst, float(np.max(np.abs(q[1:] - (q[:-1] - np.asarray(plan.gains))))))
        greedy_q.append(q[-1])
        initial_q.append(deceive_initial(g, p, budget=0.05).q[-1])
    wins = int(np.sum(np.asarray(greedy_q) <= np.asarray(initial_q)))
    ok = worst <= 1e-12 and np.mean(greedy_q) <= np.mean(initial_q)
    assert report("deception step identity", ok,
                  f"max |Q_t+1 - (Q_t - v_t)| {worst:.1e}; mean final Q greedy "
                  f"{np.mean(greedy_q):.4f} <= initial {np.mean(initial_q):.4f} "
                  f"(greedy no worse on {wins}/20)")
