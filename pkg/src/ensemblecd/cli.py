"""Command-line interface: generate, detect, ensemble, select, evaluate, analyze.

Every command is deterministic under a fixed ``--seed`` and drops a JSON
run manifest (config echo, seeds, input hashes, stage timings, outputs)
next to its first output file. Exit codes: 0 success, 1 runtime failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analysis, metrics
from .benchgen import BenchConfig, gen_disjoint, gen_fuzzy, gen_overlapping, realized_stats
from .detectors import DETECTORS, get_detectors
from .endisco import endisco_run
from .ensemble import BaseSolutionSet, consensus_clustering_report, default_k, generate_base_solutions
from .graph import Graph, load_edge_list, random_ordering, save_edge_list
from .medoc import medoc_run
from .selection import STRATEGIES, build_scoreboard, select_combined, select_vrrw
from .structures import (
    Cover,
    FuzzyAssignment,
    Partition,
    load_cover,
    load_fuzzy,
    load_partition,
    save_cover,
    save_fuzzy,
    save_partition,
)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    def __init__(self, command: str, args: argparse.Namespace):
        skip = {"func", "manifest"}
        self.data = {
            "command": command,
            "version": __version__,
            "config": {k: v for k, v in sorted(vars(args).items()) if k not in skip},
            "inputs": {},
            "timings": {},
            "outputs": [],
        }
        self._t0 = time.perf_counter()
        self._stage_start = self._t0

    def add_input(self, path):
        self.data["inputs"][str(path)] = _sha256(path)

    def stage(self, name: str):
        now = time.perf_counter()
        self.data["timings"][name] = round(now - self._stage_start, 6)
        self._stage_start = now

    def add_output(self, path):
        self.data["outputs"].append(str(path))

    def write(self, path=None):
        self.data["timings"]["total"] = round(time.perf_counter() - self._t0, 6)
        if path is None:
            if not self.data["outputs"]:
                return
            path = self.data["outputs"][0] + ".manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)


def _algos(spec: str | None):
    if spec is None:
        return None
    return get_detectors([s.strip() for s in spec.split(",") if s.strip()])


# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    mani = Manifest("generate", args)
    cfg = BenchConfig(
        n=args.n,
        k_avg=args.k_avg,
        k_max=args.k_max,
        mu=args.mu,
        c_min=args.c_min,
        c_max=args.c_max,
        o_n=args.o_n,
        o_m=args.o_m,
        seed=args.seed,
        degree_exponent=args.degree_exponent,
        size_exponent=args.size_exponent,
    )
    if args.kind == "disjoint":
        g, truth = gen_disjoint(cfg)
        truth_path = f"{args.out_prefix}.truth.part"
        save_partition(truth, truth_path)
    elif args.kind == "overlapping":
        g, truth = gen_overlapping(cfg)
        truth_path = f"{args.out_prefix}.truth.cover"
        save_cover(truth, truth_path)
    else:
        g, truth = gen_fuzzy(cfg)
        truth_path = f"{args.out_prefix}.truth.fuzzy"
        save_fuzzy(truth, truth_path)
    mani.stage("generate")
    graph_path = f"{args.out_prefix}.edges"
    save_edge_list(g, graph_path)
    mani.stage("write")
    mani.add_output(graph_path)
    mani.add_output(truth_path)
    mani.data["realized"] = realized_stats(g, truth)
    mani.data["realized"].update({k: v for k, v in g.io_stats.items()})
    mani.write(args.manifest)
    print(json.dumps(mani.data["realized"], sort_keys=True))
    return 0


def cmd_detect(args) -> int:
    mani = Manifest("detect", args)
    mani.add_input(args.graph)
    g = load_edge_list(args.graph)
    det = get_detectors([args.algo])[0]
    part = det.detect(g, random_ordering(g.n, args.seed), args.seed + 1)
    mani.stage("detect")
    save_partition(part, args.out, names=g.names)
    mani.add_output(args.out)
    mani.write(args.manifest)
    print(f"{det.name}: {part.n_communities()} communities")
    return 0


def cmd_endisco(args) -> int:
    mani = Manifest("endisco", args)
    mani.add_input(args.graph)
    g = load_edge_list(args.graph)
    res = endisco_run(
        g,
        _algos(args.algos),
        k=args.k,
        inv=args.inv,
        sim=args.sim,
        ralgo=args.ralgo,
        seed=args.seed,
        threads=args.threads,
    )
    mani.stage("pipeline")
    save_partition(res.partition, args.out, names=g.names)
    mani.add_output(args.out)
    mani.data["base_runs"] = len(res.solutions)
    mani.write(args.manifest)
    print(f"endisco: {res.partition.n_communities()} communities from {len(res.solutions)} base runs")
    return 0


def cmd_medoc(args) -> int:
    mani = Manifest("medoc", args)
    mani.add_input(args.graph)
    g = load_edge_list(args.graph)
    res = medoc_run(
        g,
        _algos(args.algos),
        k=args.k,
        w=args.match,
        assoc=args.assoc,
        ralgo=args.ralgo,
        mode=args.mode,
        seed=args.seed,
        threads=args.threads,
    )
    mani.stage("pipeline")
    if args.mode == "disjoint":
        save_partition(res.disjoint, args.out, names=g.names)
        summary = f"{res.disjoint.n_communities()} communities"
    elif args.mode == "overlapping":
        save_cover(res.cover, args.out, names=g.names)
        summary = f"{len(res.cover.community_ids())} overlapping communities"
    else:
        save_fuzzy(res.fuzzy, args.out, names=g.names)
        summary = f"{res.fuzzy.n_communities} fuzzy columns"
    mani.add_output(args.out)
    mani.data["base_runs"] = len(res.solutions)
    mani.write(args.manifest)
    print(f"medoc ({args.mode}): {summary}")
    return 0


def cmd_consensus(args) -> int:
    mani = Manifest("consensus", args)
    mani.add_input(args.graph)
    g = load_edge_list(args.graph)
    rep = consensus_clustering_report(
        g,
        _algos(args.algos),
        k=args.k,
        seed=args.seed,
        max_rounds=args.max_rounds,
        threshold=args.threshold,
        threads=args.threads,
    )
    mani.stage("pipeline")
    save_partition(rep.partition, args.out, names=g.names)
    mani.add_output(args.out)
    mani.data["rounds"] = rep.rounds
    mani.data["converged"] = rep.converged
    mani.write(args.manifest)
    print(
        f"consensus: {rep.partition.n_communities()} communities after {rep.rounds} rounds"
        + ("" if rep.converged else " (not converged)")
    )
    return 0


def _load_structures(metric: str, truth_path, detected_path, graph_path=None):
    names = None
    n = None
    if graph_path:
        g = load_edge_list(graph_path)
        names, n = g.names, g.n
    else:
        tokens = set()
        for path in (truth_path, detected_path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    parts = line.split()
                    if metric in ("nmi", "ari", "fri"):
                        tokens.add(parts[0])
                    else:
                        tokens.update(parts)
        try:
            names = sorted(tokens, key=int)
        except ValueError:
            names = sorted(tokens)
        n = len(names)
    loaders = {
        "nmi": load_partition,
        "ari": load_partition,
        "onmi": load_cover,
        "omega": load_cover,
        "fri": load_fuzzy,
    }
    load = loaders[metric]
    return load(truth_path, n, names=names), load(detected_path, n, names=names)


def cmd_evaluate(args) -> int:
    truth, detected = _load_structures(args.metric, args.truth, args.detected, args.graph)
    value = metrics.METRICS[args.metric](truth, detected)
    print(f"{value!r}")
    return 0


def cmd_select(args) -> int:
    mani = Manifest("select", args)
    mani.add_input(Path(args.solutions) / "manifest.json")
    sols = BaseSolutionSet.load(args.solutions)
    q = metrics.nmi if args.metric == "nmi" else metrics.onmi
    sb = build_scoreboard(sols, q=q)
    mani.stage("scoreboard")
    s = max(1, round(args.s_frac * len(sols)))
    if args.strategy == "combined":
        idx = select_combined(sb, s, alpha=args.alpha)
    elif args.strategy == "vrrw":
        idx = select_vrrw(sb, s, lam=args.lam, alpha=args.alpha)
    else:
        idx = STRATEGIES[args.strategy](sb, s)
    subset = sols.subset(idx)
    subset.save(args.out)
    mani.stage("select")
    mani.add_output(str(Path(args.out) / "manifest.json"))
    mani.write(args.manifest)
    print(f"selected {len(subset)} of {len(sols)} base solutions ({args.strategy})")
    return 0


def cmd_solutions(args) -> int:
    mani = Manifest("solutions", args)
    mani.add_input(args.graph)
    g = load_edge_list(args.graph)
    sols = generate_base_solutions(g, _algos(args.algos), k=args.k, seed=args.seed, threads=args.threads)
    mani.stage("runs")
    sols.save(args.out)
    mani.add_output(str(Path(args.out) / "manifest.json"))
    mani.write(args.manifest)
    print(f"wrote {len(sols)} base solutions to {args.out}")
    return 0


def cmd_analyze(args) -> int:
    mani = Manifest("analyze", args)
    rows: list[tuple[str, str, float]] = []
    if args.task == "stable":
        if len(args.snapshots) < 2:
            raise ValueError("--task stable needs at least two --snapshots files")
    elif not args.graph:
        raise ValueError(f"--task {args.task} requires --graph")
    if args.task == "kshell":
        mani.add_input(args.graph)
        g = load_edge_list(args.graph)
        shells = analysis.k_shell_decomposition(g)
        rows = [(g.name_of(v), "shell", int(s)) for v, s in enumerate(shells)]
    elif args.task == "degeneracy":
        mani.add_input(args.graph)
        g = load_edge_list(args.graph)
        algos = [d.name for d in (_algos(args.algos) or get_detectors(None))]
        items: list = list(algos)
        if args.with_ensembles:
            items += [analysis.endisco_runner(k=args.k), analysis.medoc_runner(k=args.k)]
        summaries = analysis.degeneracy_report(g, items, runs=args.runs, seed=args.seed)
        rows = analysis.degeneracy_rows(summaries)
    elif args.task == "runtime":
        mani.add_input(args.graph)
        g = load_edge_list(args.graph)
        for method in args.methods.split(","):
            thetas = [
                analysis.runtime_ratio(g, method.strip(), _algos(args.algos), k=args.k, seed=args.seed + r).theta
                for r in range(args.repeats)
            ]
            rows.append((method.strip(), "theta_median", float(np.median(thetas))))
    elif args.task == "stable":
        snapshots = []
        for path in args.snapshots:
            mani.add_input(path)
            snapshots.append(load_edge_list(path))
        rep = analysis.stable_communities(snapshots, k=args.k, seed=args.seed)
        for i, entry in enumerate(rep.consecutive):
            name = f"t{i + 1}-t{i + 2}"
            if entry is None:
                rows.append((name, "undefined", float("nan")))
            else:
                rows.append((name, "nmi", entry["nmi"]))
                rows.append((name, "ari", entry["ari"]))
    elif args.task == "coreperiphery":
        mani.add_input(args.graph)
        g = load_edge_list(args.graph)
        res = medoc_run(g, _algos(args.algos), k=args.k, seed=args.seed, mode="disjoint")
        prof = analysis.core_periphery_profile(g, res.disjoint, res.association)
        for t in range(prof.table.shape[0]):
            for b in range(prof.table.shape[1]):
                rows.append((f"tier{t}", f"bucket{b}", int(prof.table[t, b])))
    mani.stage("analyze")
    analysis.write_report_csv(rows, args.out)
    mani.add_output(args.out)
    mani.write(args.manifest)
    print(f"wrote {len(rows)} report rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------


def _common(p, out_required=True):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest.json)")
    if out_required:
        p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ensemblecd", description=__doc__)
    ap.add_argument("--version", action="version", version=f"ensemblecd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="planted benchmark graphs with ground truth")
    p.add_argument("--kind", choices=("disjoint", "overlapping", "fuzzy"), default="disjoint")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-avg", type=float, default=50.0)
    p.add_argument("--k-max", type=int, default=150)
    p.add_argument("--mu", type=float, default=0.3)
    p.add_argument("--c-min", type=int, default=20)
    p.add_argument("--c-max", type=int, default=100)
    p.add_argument("--o-n", type=float, default=0.0)
    p.add_argument("--o-m", type=int, default=1)
    p.add_argument("--degree-exponent", type=float, default=2.0)
    p.add_argument("--size-exponent", type=float, default=1.0)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="run a single base detector")
    p.add_argument("--graph", required=True)
    p.add_argument("--algo", choices=sorted(DETECTORS), required=True)
    _common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("solutions", help="generate and store the M*K base solutions")
    p.add_argument("--graph", required=True)
    p.add_argument("--algos", default=None, help="comma-separated detector names")
    p.add_argument("--k", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_solutions)

    p = sub.add_parser("endisco", help="ensemble disjoint detection (feature-space)")
    p.add_argument("--graph", required=True)
    p.add_argument("--algos", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--inv", choices=("rcc", "idc"), default="rcc")
    p.add_argument("--sim", choices=("cos", "che"), default="cos")
    p.add_argument("--ralgo", choices=sorted(DETECTORS), default=None)
    _common(p)
    p.set_defaults(func=cmd_endisco)

    p = sub.add_parser("medoc", help="meta-clustering ensemble (disjoint/overlapping/fuzzy)")
    p.add_argument("--graph", required=True)
    p.add_argument("--algos", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--match", choices=("jc", "ap"), default="jc")
    p.add_argument("--assoc", choices=("simple", "weighted"), default="simple")
    p.add_argument("--ralgo", choices=sorted(DETECTORS), default=None)
    p.add_argument("--mode", choices=("disjoint", "overlapping", "fuzzy"), default="disjoint")
    _common(p)
    p.set_defaults(func=cmd_medoc)

    p = sub.add_parser("consensus", help="iterated consensus-clustering baseline")
    p.add_argument("--graph", required=True)
    p.add_argument("--algos", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.5)
    _common(p)
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("evaluate", help="compare a detected structure against ground truth")
    p.add_argument("--metric", choices=sorted(metrics.METRICS), required=True)
    p.add_argument("--graph", default=None, help="optional graph for vertex-name resolution")
    p.add_argument("truth")
    p.add_argument("detected")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("select", help="pick a subset of stored base solutions")
    p.add_argument("--solutions", required=True, help="directory produced by the solutions command")
    p.add_argument("--strategy", choices=sorted(STRATEGIES), required=True)
    p.add_argument("--s-frac", type=float, default=0.6)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--lam", type=float, default=0.9)
    p.add_argument("--metric", choices=("nmi", "onmi"), default="nmi")
    _common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("analyze", help="post-hoc reports as long-format CSV")
    p.add_argument("--task", choices=("kshell", "degeneracy", "runtime", "stable", "coreperiphery"), required=True)
    p.add_argument("--graph", default=None)
    p.add_argument("--snapshots", nargs="*", default=[])
    p.add_argument("--algos", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--methods", default="endisco,medoc,consensus")
    p.add_argument("--with-ensembles", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # argparse handles usage errors with code 2
        print(f"ensemblecd: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
