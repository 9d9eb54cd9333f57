"""Command-line front end.

Subcommands: detect, attack, generate, bench.  Exit codes: 0 success,
2 configuration error, 3 infeasible attack.
"""

from __future__ import annotations

import argparse
import sys
import time

from .detection import modularity
from .errors import CommhideError, ConfigError, GraphFormatError, InfeasibleAttackError
from .evolve import GAConfig
from .experiment import (DETECTORS, METHODS, SCALES, ExperimentConfig,
                         emit_report, load_dataset, parse_config,
                         run_detector, run_experiment, summarize)
from .graph import generate_planted_partition, load_graph


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="path to a graph file")
    p.add_argument("--format", choices=["edgelist", "gml"], default="edgelist")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commhide",
        description="Attack community detection by rewiring a few links.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run a community detector on a graph")
    _add_dataset_args(p)
    p.add_argument("--detector", choices=list(DETECTORS), default="louvain")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("attack", help="run an attack experiment")
    p.add_argument("--config", help="JSON experiment config; flags override nothing when set")
    _add_dataset_args(p)
    p.add_argument("--method", choices=list(METHODS))
    p.add_argument("--scale", choices=list(SCALES), default="global")
    p.add_argument("--target", help="community size rank, node ID, or T1/T2/T3")
    p.add_argument("--budget-pct", type=float, help="budget as percent of links")
    p.add_argument("--budget", type=int, help="budget as an absolute link count")
    p.add_argument("--c", type=float, default=4.0, help="attenuation factor")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--population", type=int, default=100)
    p.add_argument("--generations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--detectors", default="louvain",
                   help="comma-separated subset of louvain,greedy,labelprop")
    p.add_argument("--out", help="report path (stdout when omitted)")
    p.add_argument("--out-format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("generate", help="generate a planted-partition benchmark graph")
    p.add_argument("--sizes", required=True, help="comma-separated community sizes")
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="edge-list output path; labels go to <out>.labels")

    p = sub.add_parser("bench", help="time the detectors on a graph")
    _add_dataset_args(p)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_detect(args) -> int:
    if not args.dataset:
        raise ConfigError("detect needs --dataset")
    graph, _ = load_graph(args.dataset, args.format)
    part = run_detector(args.detector, graph, args.seed)
    print(f"n={graph.n} m={graph.m} detector={args.detector} "
          f"communities={part.k} Q={modularity(graph, part):.4f}")
    for i, comm in enumerate(part.communities):
        print(f"{i}: {' '.join(map(str, sorted(comm)))}")
    return 0


def _attack_config(args) -> ExperimentConfig:
    if args.config:
        return parse_config(args.config)
    if not args.dataset or not args.method:
        raise ConfigError("attack needs --config, or --dataset and --method")
    target = args.target
    if target is not None and not str(target).startswith("T"):
        target = int(target)
    theta = args.budget
    if theta is None and args.budget_pct is None:
        raise ConfigError("attack needs --budget or --budget-pct")
    ga = GAConfig(population=args.population, generations=args.generations,
                  c=args.c, epsilon=args.epsilon, seed=args.seed,
                  theta=theta if theta is not None else 10)
    return ExperimentConfig(
        dataset_name=args.dataset, method=args.method, scale=args.scale,
        dataset_path=args.dataset, dataset_format=args.format, target=target,
        budget=args.budget, budget_pct=args.budget_pct,
        detectors=tuple(args.detectors.split(",")), reps=args.reps,
        seed=args.seed, out=args.out, out_format=args.out_format, ga=ga)


def _cmd_attack(args) -> int:
    config = _attack_config(args)
    rows = run_experiment(config)
    if config.out:
        emit_report(rows, config.out_format, config.out)
        print(f"wrote {len(rows)} rows to {config.out}")
    else:
        import io
        import tempfile
        with tempfile.NamedTemporaryFile("r+", suffix=".txt") as tmp:
            emit_report(rows, config.out_format, tmp.name)
            tmp.seek(0)
            sys.stdout.write(tmp.read())
    if any(r.error for r in rows) and all(r.error for r in rows):
        return 3
    return 0


def _cmd_generate(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    graph, truth = generate_planted_partition(sizes, args.p_in, args.p_out, args.seed)
    with open(args.out, "w") as fh:
        fh.write(f"# planted partition sizes={sizes} p_in={args.p_in} "
                 f"p_out={args.p_out} seed={args.seed}\n")
        for u, v in graph.sorted_edges():
            fh.write(f"{u} {v}\n")
    with open(args.out + ".labels", "w") as fh:
        for v, c in enumerate(truth.assignment):
            fh.write(f"{v} {c}\n")
    print(f"wrote n={graph.n} m={graph.m} to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    if not args.dataset:
        raise ConfigError("bench needs --dataset")
    graph, _ = load_graph(args.dataset, args.format)
    print(f"n={graph.n} m={graph.m}")
    for det in DETECTORS:
        start = time.perf_counter()
        part = run_detector(det, graph, args.seed)
        elapsed = time.perf_counter() - start
        print(f"{det}: {elapsed:.3f}s, {part.k} communities, "
              f"Q={modularity(graph, part):.4f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"detect": _cmd_detect, "attack": _cmd_attack,
                "generate": _cmd_generate, "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except (ConfigError, GraphFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleAttackError as exc:
        print(f"infeasible attack: {exc}", file=sys.stderr)
        return 3
    except CommhideError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
