"""Command-line driver: generate, partition, score, attack, deceive, cost,
correlate, benchmark and report.

Exit codes: 0 success, 2 input error, 3 eigensolver non-convergence,
4 partial benchmark failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .attacks import STRATEGIES, cost, load_trace, run_attack, save_trace
from .benchmark import ExperimentSpec, RunManifest, cmd_benchmark, file_digest, manifest_path
from .centrality import DISPLAY, METHODS, ConvergenceError, ScoreVector, UndefinedScoreError, masuda_scores, score
from .correlation import tau_matrix
from .deception import deceive_greedy, deceive_initial, save_plan
from .detection import detect_communities
from .generators import GeneratorConfig, generate
from .graph import GraphFormatError, id_map_path, load_edge_list, save_edge_list, save_id_map
from .partition import PartitionFormatError, load_partition, save_partition
from .vitality import modularity

EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4

FAMILY_ALIASES = {"cellular": "cellular", "er": "er", "sf": "scale_free",
                  "scale_free": "scale_free"}
LONG_HEADER = ["method", "x", "x_value", "sigma", "q"]


def _delim(args) -> str:
    return "\t" if args.format == "tsv" else ","


class _Run:
    """Collects what a manifest needs while a subcommand runs."""

    def __init__(self, args):
        self.args = args
        self.inputs = {}
        self.stages = {}
        self.extra = {}
        self._t = time.perf_counter()

    def input(self, path):
        if path is not None:
            self.inputs[str(path)] = file_digest(path)

    def stage(self, name):
        now = time.perf_counter()
        self.stages[name] = now - self._t
        self._t = now

    def finish(self, output, graph=None):
        """Write the manifest (and id map) next to ``output``."""
        if output is None:
            return
        outputs = [str(output)]
        if graph is not None:
            save_id_map(graph, id_map_path(output))
            outputs.append(id_map_path(output))
        RunManifest(
            command=[os.path.basename(sys.argv[0])] + self.args.argv,
            seeds={"seed": self.args.seed},
            inputs=self.inputs,
            outputs=outputs,
            stage_seconds=self.stages,
            extra=self.extra,
        ).write(manifest_path(output))


def _open_out(path):
    if path is None:
        return sys.stdout
    return open(path, "w", newline="", encoding="utf-8")


def _write_rows(path, header, rows, delimiter=","):
    fh = _open_out(path)
    try:
        out = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        out.writerow(header)
        out.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _load_graph(args, run):
    run.input(args.edges)
    g = load_edge_list(args.edges, weighted=not args.unweighted)
    run.stage("load")
    if getattr(args, "partition", None):
        run.input(args.partition)
        p = load_partition(args.partition, g.node_count, g.labels)
    else:
        p = detect_communities(g, seed=args.seed)
        run.extra["partition"] = "detected"
    run.stage("partition")
    return g, p


def _fmt(x) -> str:
    return repr(float(x))


# -- subcommands -------------------------------------------------------------

def cmd_generate(args) -> int:
    run = _Run(args)
    cfg_kw = {"family": FAMILY_ALIASES[args.family], "n": args.n, "seed": args.seed}
    for key in ("p", "m", "gamma"):
        if getattr(args, key) is not None:
            cfg_kw[key] = getattr(args, key)
    g, truth = generate(GeneratorConfig(**cfg_kw))
    run.stage("generate")
    out = args.output
    save_edge_list(g, out if out is not None else "/dev/stdout")
    run.extra.update(family=cfg_kw["family"], n=g.node_count, m=g.total_weight)
    run.finish(out)
    if args.partition_out:
        if truth is None:
            truth = detect_communities(g, seed=args.seed)
            run.extra["partition"] = "detected"
        else:
            run.extra["partition"] = "planted"
        save_partition(truth, args.partition_out)
        run.finish(args.partition_out)
    return 0


def cmd_partition(args) -> int:
    run = _Run(args)
    run.input(args.edges)
    g = load_edge_list(args.edges, weighted=not args.unweighted)
    p = detect_communities(g, seed=args.seed, max_levels=args.max_levels,
                           min_gain=args.min_gain)
    run.stage("detect")
    q = modularity(g, p)
    print(f"Q={q!r} communities={p.n_communities}", file=sys.stderr)
    if args.output is None:
        save_partition(p, "/dev/stdout", g.labels)
    else:
        save_partition(p, args.output, g.labels)
    run.extra.update(q=q, communities=p.n_communities)
    run.finish(args.output, g)
    return 0


def cmd_score(args) -> int:
    run = _Run(args)
    g, p = _load_graph(args, run)
    if args.method == "mas" and args.group_self_loops:
        sv = masuda_scores(g, p, group_self_loops=True)
    else:
        sv = score(args.method, g, p)
    run.stage("score")
    q = modularity(g, p)
    print(f"Q={q!r}", file=sys.stderr)
    rows = [(i, _fmt(s)) for i, s in enumerate(sv.scores.tolist())]
    _write_rows(args.output, ["node_id", "score"], rows, _delim(args))
    run.extra.update(method=args.method, q=q)
    run.finish(args.output, g)
    return 0


def cmd_attack(args) -> int:
    run = _Run(args)
    g, p = _load_graph(args, run)
    tr = run_attack(g, p, args.method, args.strategy, args.budget)
    run.stage("attack")
    c = cost(tr)
    print(f"C_rho={c.c_rho!r} C_eta={c.c_eta!r}", file=sys.stderr)
    save_trace(tr, args.output if args.output else "/dev/stdout")
    run.extra.update(method=args.method, strategy=args.strategy, n=tr.n,
                     c_rho=c.c_rho, c_eta=c.c_eta)
    run.finish(args.output, g)
    return 0


def cmd_deceive(args) -> int:
    run = _Run(args)
    g, p = _load_graph(args, run)
    if args.strategy == "initial":
        if args.budget is None:
            raise ValueError("the initial strategy needs --budget")
        plan = deceive_initial(g, p, args.budget)
    else:
        plan = deceive_greedy(g, p, budget=args.budget, target_q=args.target_q)
    run.stage("deceive")
    print(f"Q: {plan.q[0]!r} -> {plan.q[-1]!r} ({plan.stopping})", file=sys.stderr)
    save_plan(plan, args.output if args.output else "/dev/stdout")
    run.extra.update(strategy=args.strategy, stopping=plan.stopping,
                     q_start=plan.q[0], q_end=plan.q[-1])
    run.finish(args.output, g)
    return 0


def cmd_cost(args) -> int:
    run = _Run(args)
    rows = []
    for path in args.traces:
        run.input(path)
        c = cost(load_trace(path))
        rows.append((path, _fmt(c.c_rho), _fmt(c.c_eta)))
    _write_rows(args.output, ["trace", "c_rho", "c_eta"], rows, _delim(args))
    run.finish(args.output)
    return 0


def read_scores(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        head = fh.readline()
        delimiter = "\t" if "\t" in head else ","
        if [h.strip() for h in head.split(delimiter)] != ["node_id", "score"]:
            raise ValueError(f"{path}: expected header node_id,score")
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    ids = np.array([int(r[0]) for r in rows], dtype=np.int64)
    vals = np.array([float(r[1]) for r in rows])
    if len(ids) and not np.array_equal(ids, np.arange(len(ids))):
        raise ValueError(f"{path}: node ids must be 0..N-1 in order")
    return vals


def _sidecar_extra(path) -> dict:
    mp = manifest_path(path)
    if not os.path.exists(mp):
        return {}
    with open(mp, encoding="utf-8") as fh:
        return json.load(fh).get("extra", {})


def _label(path) -> str:
    """Method name from a manifest sidecar, else the file stem."""
    extra = _sidecar_extra(path)
    if "method" in extra:
        name = DISPLAY.get(extra["method"], extra["method"])
        return f"{name}/{extra['strategy']}" if "strategy" in extra else name
    return os.path.splitext(os.path.basename(path))[0]


def cmd_correlate(args) -> int:
    run = _Run(args)
    vectors = {}
    for path in args.scores:
        run.input(path)
        name = _label(path)
        if name in vectors:
            name = path
        # with a known method, correlate attack rankings rather than raw values
        method = _sidecar_extra(path).get("method")
        vals = read_scores(path)
        vectors[name] = ScoreVector(method, vals) if method in METHODS else vals
    if len({len(v) for v in vectors.values()}) > 1:
        raise ValueError("score files cover different node counts")
    names, mat = tau_matrix(vectors)
    rows = [[names[i]] + [_fmt(x) for x in mat[i]] for i in range(len(names))]
    _write_rows(args.output, ["method"] + names, rows, _delim(args))
    run.finish(args.output)
    return 0


def long_rows(traces: dict):
    """Long-format rows ``(method, x, x_value, sigma, q)`` for every trace."""
    if not traces:
        raise ValueError("report needs at least one trace")
    sizes = {tr.n for tr in traces.values()}
    if len(sizes) > 1:
        raise ValueError(f"traces come from graphs of different sizes: {sorted(sizes)}")
    for name, tr in traces.items():
        for axis in ("rho", "eta"):
            xs = getattr(tr, axis)
            for x, s, q in zip(xs.tolist(), tr.sigma.tolist(), tr.q.tolist()):
                yield name, axis, _fmt(x), _fmt(s), _fmt(q)


def cmd_report(args) -> int:
    run = _Run(args)
    traces = {}
    for path in args.traces:
        run.input(path)
        n = None
        mp = manifest_path(path)
        if os.path.exists(mp):
            with open(mp, encoding="utf-8") as fh:
                n = json.load(fh).get("extra", {}).get("n")
        name = _label(path)
        if name in traces:
            name = path
        traces[name] = load_trace(path, n=n)
    _write_rows(args.output, LONG_HEADER, list(long_rows(traces)), _delim(args))
    run.finish(args.output)
    return 0


def cmd_bench(args) -> int:
    spec = ExperimentSpec.from_file(args.config)
    if args.seed_given:
        spec.seed = args.seed
    _, _, failures = cmd_benchmark(spec, args.output, jobs=args.jobs,
                                   delimiter=_delim(args),
                                   command=["modvit"] + args.argv)
    for f in failures:
        print(f"failed: {f['family']}#{f['index']} {f['strategy']}/{f['method']}: {f['error']}",
              file=sys.stderr)
    return EXIT_PARTIAL if failures else 0


# -- parser ------------------------------------------------------------------

def _jobs_default() -> int:
    try:
        return max(1, int(os.environ.get("MODVIT_JOBS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS lets the flags appear before or after the subcommand
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("csv", "tsv"), default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="modvit", parents=[common],
                                 description="Modularity vitality toolkit.")
    ap.add_argument("--version", action="version", version=f"modvit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def graph_args(sp):
        sp.add_argument("edges", help="edge list 'u v [w]'")
        sp.add_argument("--partition", help="node_id,community_id CSV (detected if omitted)")
        sp.add_argument("--unweighted", action="store_true", help="ignore a weight column")
        sp.add_argument("-o", "--output")

    sp = sub.add_parser("generate", parents=[common], help="generate a synthetic network")
    sp.add_argument("--family", choices=sorted(FAMILY_ALIASES), required=True)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--p", type=float, help="ER edge probability")
    sp.add_argument("--m", type=int, help="edges per new node (scale-free)")
    sp.add_argument("--gamma", type=float, help="attachment exponent (scale-free)")
    sp.add_argument("-o", "--output")
    sp.add_argument("--partition-out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("partition", parents=[common], help="detect communities")
    sp.add_argument("edges")
    sp.add_argument("--unweighted", action="store_true")
    sp.add_argument("--max-levels", type=int)
    sp.add_argument("--min-gain", type=float, default=1e-9)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("score", parents=[common], help="node scores for one method")
    graph_args(sp)
    sp.add_argument("--method", choices=METHODS, default="mv")
    sp.add_argument("--group-self-loops", action="store_true",
                    help="keep intra-community weight on the group-network diagonal (mas)")
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("attack", parents=[common], help="run a node-removal attack")
    graph_args(sp)
    sp.add_argument("--strategy", choices=STRATEGIES, default="initial")
    sp.add_argument("--method", choices=METHODS, default="mv")
    sp.add_argument("--budget", type=float, default=1.0)
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("deceive", parents=[common], help="hide communities by node deletion")
    graph_args(sp)
    sp.add_argument("--strategy", choices=("initial", "greedy"), default="greedy")
    stop = sp.add_mutually_exclusive_group(required=True)
    stop.add_argument("--budget", type=float)
    stop.add_argument("--target-q", type=float)
    sp.set_defaults(func=cmd_deceive)

    sp = sub.add_parser("cost", parents=[common], help="C_rho and C_eta of traces")
    sp.add_argument("traces", nargs="+")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_cost)

    sp = sub.add_parser("correlate", parents=[common], help="Kendall tau-b matrix")
    sp.add_argument("scores", nargs="+")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("benchmark", parents=[common], help="run an experiment spec")
    sp.add_argument("config", help="JSON experiment spec")
    sp.add_argument("-o", "--output", default="benchmark-out", help="output directory")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("report", parents=[common], help="long-format curves from traces")
    sp.add_argument("traces", nargs="*")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    args.seed_given = hasattr(args, "seed")
    if not args.seed_given:
        args.seed = 0
    if not hasattr(args, "jobs"):
        args.jobs = _jobs_default()
    if not hasattr(args, "format"):
        args.format = "csv"
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraphFormatError, PartitionFormatError, UndefinedScoreError,
            ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
