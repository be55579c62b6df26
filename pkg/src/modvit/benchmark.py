"""Cross-product experiments: generated networks x methods x strategies."""

from __future__ import annotations

import hashlib
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .attacks import STRATEGIES, cost, run_attack, save_trace
from .centrality import DISPLAY
from .detection import detect_communities
from .generators import GeneratorConfig, generate
from .vitality import modularity

TABLE_METHODS = ("mv", "amv", "cd", "amc-d", "mas", "chb", "wmc-d", "deg")
ROW_ORDER = ("initial", "mba", "recomputed")
ROW_NAMES = {"initial": "Initial", "mba": "MBA", "recomputed": "Recomputed"}


@dataclass
class ExperimentSpec:
    families: list = field(default_factory=lambda: ["cellular"])
    replications: int = 100
    methods: list = field(default_factory=lambda: list(TABLE_METHODS))
    strategies: list = field(default_factory=lambda: list(STRATEGIES))
    seed: int = 0
    budget: float = 1.0
    n: int = 1000
    save_traces: bool = False

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        spec = cls(**raw)
        if spec.methods == "all" or spec.methods == ["all"]:
            spec.methods = list(TABLE_METHODS)
        if spec.strategies == "all" or spec.strategies == ["all"]:
            spec.strategies = list(STRATEGIES)
        return spec


def cell_seed(master: int, index: int) -> int:
    """Independent 32-bit seed for benchmark cell ``index``."""
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


@dataclass
class RunManifest:
    command: list
    seeds: dict
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    version: str = __version__
    python: str = platform.python_version()
    stage_seconds: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(output) -> str:
    return str(output) + ".manifest.json"


def run_cell(family: str, index: int, spec: ExperimentSpec, trace_dir=None) -> dict:
    """Generate one network, partition it, and run every attack on it."""
    seed = cell_seed(spec.seed, index)
    t0 = time.perf_counter()
    g, _ = generate(GeneratorConfig(family=family, n=spec.n, seed=seed))
    p = detect_communities(g, seed=seed)
    out = {"family": family, "index": index, "seed": seed,
           "modularity": modularity(g, p), "communities": p.n_communities,
           "costs": {}, "failures": []}
    for strategy in spec.strategies:
        for method in spec.methods:
            try:
                tr = run_attack(g, p, method, strategy, spec.budget)
            except Exception as exc:  # one failed attack must not sink the run
                out["failures"].append(
                    {"family": family, "index": index, "strategy": strategy,
                     "method": method, "error": f"{type(exc).__name__}: {exc}"})
                continue
            c = cost(tr)
            out["costs"][f"{strategy}/{method}"] = (c.c_rho, c.c_eta)
            if trace_dir is not None:
                name = f"{family}_{index:04d}_{strategy}_{method}.csv"
                save_trace(tr, os.path.join(trace_dir, name))
    out["seconds"] = time.perf_counter() - t0
    return out


def _run_cell_args(args):
    return run_cell(*args)


def run_benchmark(spec: ExperimentSpec, jobs: int = 1, trace_dir=None) -> list[dict]:
    tasks = [(family, i, spec, trace_dir)
             for family in spec.families for i in range(spec.replications)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell_args, tasks))
    return [run_cell(*t) for t in tasks]


def aggregate(results: list[dict], spec: ExperimentSpec) -> dict:
    """Mean costs per family as ``{family: {(strategy, metric): {method: mean}}}``."""
    table = {}
    for family in spec.families:
        runs = [r for r in results if r["family"] == family]
        fam = {}
        for strategy in spec.strategies:
            for col, metric in enumerate(("C_rho", "C_eta")):
                row = {}
                for method in spec.methods:
                    vals = [r["costs"][f"{strategy}/{method}"][col] for r in runs
                            if f"{strategy}/{method}" in r["costs"]]
                    row[method] = float(np.mean(vals)) if vals else float("nan")
                fam[(strategy, metric)] = row
        table[family] = fam
    return table


def write_aggregate(table: dict, spec: ExperimentSpec, path, delimiter=",") -> None:
    """One row per (strategy, metric), one column per method, per family."""
    methods = list(spec.methods)
    lines = [delimiter.join(["family", "row"] + [DISPLAY[m] for m in methods])]
    order = [s for s in ROW_ORDER if s in spec.strategies]
    for family, fam in table.items():
        for strategy in order:
            for metric in ("C_rho", "C_eta"):
                row = fam[(strategy, metric)]
                cells = [repr(row[m]) for m in methods]
                lines.append(delimiter.join(
                    [family, f"{ROW_NAMES[strategy]} {metric}"] + cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_runs(results: list[dict], spec: ExperimentSpec, path, delimiter=",") -> None:
    header = ["family", "index", "seed", "modularity", "communities", "strategy",
              "method", "c_rho", "c_eta"]
    lines = [delimiter.join(header)]
    for r in results:
        for strategy in spec.strategies:
            for method in spec.methods:
                key = f"{strategy}/{method}"
                if key not in r["costs"]:
                    continue
                c_rho, c_eta = r["costs"][key]
                lines.append(delimiter.join(str(x) for x in (
                    r["family"], r["index"], r["seed"], repr(r["modularity"]),
                    r["communities"], strategy, method, repr(c_rho), repr(c_eta))))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_benchmark(spec: ExperimentSpec, out_dir, jobs: int = 1, delimiter=",",
                  command=None):
    """Run ``spec`` and write ``aggregate.csv``, ``runs.csv`` and a manifest.

    Returns ``(table, results, failures)``.
    """
    os.makedirs(out_dir, exist_ok=True)
    trace_dir = None
    if spec.save_traces:
        trace_dir = os.path.join(out_dir, "traces")
        os.makedirs(trace_dir, exist_ok=True)
    t0 = time.perf_counter()
    results = run_benchmark(spec, jobs, trace_dir)
    elapsed = time.perf_counter() - t0
    table = aggregate(results, spec)
    agg_path = os.path.join(out_dir, "aggregate.csv")
    runs_path = os.path.join(out_dir, "runs.csv")
    write_aggregate(table, spec, agg_path, delimiter)
    write_runs(results, spec, runs_path, delimiter)
    failures = [f for r in results for f in r["failures"]]
    manifest = RunManifest(
        command=list(command if command is not None else sys.argv),
        seeds={"master": spec.seed,
               "cells": {f"{r['family']}/{r['index']}": r["seed"] for r in results}},
        outputs=[agg_path, runs_path],
        stage_seconds={"benchmark": elapsed},
        failures=failures,
        extra={"spec": asdict(spec)},
    )
    manifest.write(os.path.join(out_dir, "manifest.json"))
    return table, results, failures
