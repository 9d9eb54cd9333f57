"""Experiment harness: configuration, repeated attack runs, and reports."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, fields

from .baselines import (attack_AB, attack_AD, attack_AQ, attack_AS, attack_Dr,
                        attack_Dw, attack_random)
from .detection import (Partition, greedy_modularity, label_propagation, louvain)
from .errors import ConfigError, InfeasibleAttackError
from .evolve import AttackScale, GAConfig, node_attack_success, run_epa
from .graph import (Graph, apply_perturbation, edge_betweenness,
                    generate_planted_partition, load_graph)
from .metrics import ari, deception_score, nmi

METHODS = ("epa", "ab", "ad", "aq", "as", "dw", "dr", "random")
SCALES = ("global", "community", "node")
DETECTORS = ("louvain", "greedy", "labelprop")

CSV_COLUMNS = ("dataset", "method", "scale", "detector", "seed", "budget",
               "nmi", "ari", "h", "delta", "degree_increment_pct", "walltime_s")
GT_COLUMNS = ("nmi_gt", "ari_gt")


def run_detector(name: str, graph: Graph, seed: int) -> Partition:
    if name == "louvain":
        return louvain(graph, seed)
    if name == "greedy":
        return greedy_modularity(graph)
    if name == "labelprop":
        return label_propagation(graph, seed)
    raise ConfigError(f"unknown detector {name!r}")


@dataclass
class ExperimentConfig:
    dataset_name: str
    method: str
    scale: str = "global"
    dataset_path: str | None = None
    dataset_format: str = "edgelist"
    generator: dict | None = None
    target: object = None          # community size rank, node ID, or T1/T2/T3
    budget: int | None = None
    budget_pct: float | None = None
    detectors: tuple[str, ...] = ("louvain",)
    reps: int = 1
    seed: int = 0
    out: str | None = None
    out_format: str = "csv"
    ga: GAConfig = field(default_factory=GAConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.scale not in SCALES:
            raise ConfigError(f"unknown scale {self.scale!r}")
        if self.dataset_path is None and self.generator is None:
            raise ConfigError("config needs a dataset path or generator parameters")
        if self.budget is not None and self.budget < 1:
            raise ConfigError("budget must be at least 1")
        if self.budget_pct is not None and not 0.0 < self.budget_pct <= 100.0:
            raise ConfigError("budget_pct must be in (0, 100]")
        for d in self.detectors:
            if d not in DETECTORS:
                raise ConfigError(f"unknown detector {d!r}")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.out_format!r}")

    def resolve_budget(self, m: int) -> int:
        if self.budget is not None:
            return self.budget
        if self.budget_pct is not None:
            return max(1, math.ceil(self.budget_pct * m / 100.0))
        raise ConfigError("config needs budget or budget_pct")


_GA_KEYS = {f.name for f in fields(GAConfig)}
_TOP_KEYS = {"dataset", "method", "scale", "target", "budget", "budget_pct",
             "detectors", "reps", "seed", "out", "out_format", "ga"}
_DATASET_KEYS = {"name", "path", "format", "generator"}


def parse_config(path) -> ExperimentConfig:
    """Read a JSON experiment config, validating keys and filling defaults."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "dataset" not in raw or "method" not in raw:
        raise ConfigError(f"{path}: 'dataset' and 'method' are required")
    ds = raw["dataset"]
    unknown = set(ds) - _DATASET_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown dataset keys {sorted(unknown)}")
    ga_raw = raw.get("ga", {})
    unknown = set(ga_raw) - _GA_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown ga keys {sorted(unknown)}")
    budget = raw.get("budget")
    ga_defaults = {"seed": raw.get("seed", 0)}
    if budget is not None and "theta" not in ga_raw:
        ga_defaults["theta"] = budget
    try:
        ga = GAConfig(**{**ga_defaults, **ga_raw})
    except TypeError as exc:
        raise ConfigError(f"{path}: bad ga section: {exc}") from exc
    name = ds.get("name") or (ds.get("path") or "generated")
    return ExperimentConfig(
        dataset_name=str(name),
        method=raw["method"],
        scale=raw.get("scale", "global"),
        dataset_path=ds.get("path"),
        dataset_format=ds.get("format", "edgelist"),
        generator=ds.get("generator"),
        target=raw.get("target"),
        budget=budget,
        budget_pct=raw.get("budget_pct"),
        detectors=tuple(raw.get("detectors", ["louvain"])),
        reps=raw.get("reps", 1),
        seed=raw.get("seed", 0),
        out=raw.get("out"),
        out_format=raw.get("out_format", "csv"),
        ga=ga,
    )


@dataclass
class ResultRow:
    dataset: str
    method: str
    scale: str
    detector: str
    seed: int
    budget: int | None
    nmi: float | None
    ari: float | None
    h: float | None
    delta: int | None
    degree_increment_pct: float | None
    walltime_s: float
    nmi_gt: float | None = None
    ari_gt: float | None = None
    error: str | None = None


# ---------------------------------------------------------------------------
# target selection
# ---------------------------------------------------------------------------

def select_target_community(baseline: Partition, rank: int) -> int:
    """Community index of the rank-th largest baseline community (1-based);
    size ties go to the community containing the smallest node ID."""
    order = sorted(range(baseline.k),
                   key=lambda i: (-len(baseline.communities[i]),
                                  min(baseline.communities[i])))
    if not 1 <= rank <= len(order):
        raise ConfigError(f"community size rank {rank} out of range 1..{len(order)}")
    return order[rank - 1]


def select_target_node(graph: Graph, selector: str) -> int:
    """T1: highest degree; T2: highest betweenness; T3: best combined rank sum.
    Ties go to the lower node ID."""
    degs = graph.degrees()
    if selector == "T1":
        return max(range(graph.n), key=lambda v: (degs[v], -v))
    betw = edge_betweenness(graph)
    node_b = [0.0] * graph.n
    for (u, v), w in betw.items():
        node_b[u] += w
        node_b[v] += w
    if selector == "T2":
        return max(range(graph.n), key=lambda v: (node_b[v], -v))
    if selector == "T3":
        deg_rank = {v: r for r, v in enumerate(
            sorted(range(graph.n), key=lambda v: (-degs[v], v)))}
        bet_rank = {v: r for r, v in enumerate(
            sorted(range(graph.n), key=lambda v: (-node_b[v], v)))}
        return min(range(graph.n), key=lambda v: (deg_rank[v] + bet_rank[v], v))
    raise ConfigError(f"unknown node selector {selector!r}")


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def load_dataset(config: ExperimentConfig):
    """Return (graph, ground-truth Partition or None) for a config."""
    if config.dataset_path is not None:
        graph, labels = load_graph(config.dataset_path, config.dataset_format)
        truth = Partition(labels) if labels is not None else None
        return graph, truth
    gen = config.generator
    try:
        return generate_planted_partition(gen["sizes"], gen["p_in"], gen["p_out"],
                                          config.seed)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"generator needs sizes, p_in, p_out: {exc}") from exc


def _resolve_scale(config: ExperimentConfig, graph: Graph, baseline: Partition) -> AttackScale:
    if config.scale == "global":
        return AttackScale("global")
    if config.target is None:
        raise ConfigError(f"{config.scale} attack needs a target")
    if config.scale == "community":
        return AttackScale("community",
                           select_target_community(baseline, int(config.target)))
    if isinstance(config.target, str) and config.target.startswith("T"):
        return AttackScale("node", select_target_node(graph, config.target))
    return AttackScale("node", int(config.target))


def _run_attack(config: ExperimentConfig, graph: Graph, seed: int):
    """Run one repetition; returns (perturbation, budget, report-or-None)."""
    ga = GAConfig(**{**{f.name: getattr(config.ga, f.name) for f in fields(GAConfig)},
                     "seed": seed})
    baseline = louvain(graph, seed)
    scale = _resolve_scale(config, graph, baseline)
    method = config.method
    if method in ("epa", "aq", "as"):
        if config.budget is not None or config.budget_pct is not None:
            ga = GAConfig(**{**{f.name: getattr(ga, f.name) for f in fields(GAConfig)},
                             "theta": config.resolve_budget(graph.m)})
        if method == "epa":
            report = run_epa(graph, scale, ga)
        elif method == "aq":
            report = attack_AQ(graph, ga)
        else:
            report = attack_AS(graph, ga)
        return report.perturbation, report.budget, report
    beta = config.resolve_budget(graph.m)
    if method == "ab":
        return attack_AB(graph, beta), beta, None
    if method == "ad":
        return attack_AD(graph, beta), beta, None
    if method == "random":
        return attack_random(graph, beta, seed), beta, None
    if method == "dw":
        if scale.kind != "community":
            raise ConfigError("method dw requires --scale community")
        target = baseline.communities[scale.target]
        return attack_Dw(graph, target, beta, seed), beta, None
    if method == "dr":
        if scale.kind != "node":
            raise ConfigError("method dr requires --scale node")
        result = attack_Dr(graph, scale.target, lambda g: louvain(g, seed),
                           ga.epsilon, beta, seed)
        from .graph import Perturbation
        pert = Perturbation(frozenset(result.additions), frozenset())
        return pert, len(result.additions), result
    raise ConfigError(f"unknown method {method!r}")


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    graph, truth = load_dataset(config)
    rows: list[ResultRow] = []
    for rep in range(config.reps):
        seed = config.seed + rep
        baseline = louvain(graph, seed)
        scale = _resolve_scale(config, graph, baseline)
        start = time.perf_counter()
        try:
            pert, budget, _report = _run_attack(config, graph, seed)
        except InfeasibleAttackError as exc:
            for det in config.detectors:
                rows.append(ResultRow(config.dataset_name, config.method,
                                      config.scale, det, seed, None, None, None,
                                      None, None, None, 0.0, error=str(exc)))
            continue
        walltime = time.perf_counter() - start
        adv = apply_perturbation(graph, pert)
        for det in config.detectors:
            before = run_detector(det, graph, seed)
            after = run_detector(det, adv, seed)
            row = ResultRow(config.dataset_name, config.method, config.scale,
                            det, seed, budget, nmi(before, after),
                            ari(before, after), None, None, None,
                            round(walltime, 3))
            if truth is not None:
                row.nmi_gt = nmi(truth, after)
                row.ari_gt = ari(truth, after)
            if scale.kind == "community":
                target = baseline.communities[scale.target]
                row.h = deception_score(target, after, adv)
            if scale.kind == "node":
                t = scale.target
                home = before.communities[before.community_of(t)]
                new = after.communities[after.community_of(t)]
                row.delta = int(len(new & home) / len(new) < config.ga.epsilon)
                row.degree_increment_pct = 100.0 * len(pert.additions) / graph.degree(t)
            rows.append(row)
    rows.sort(key=lambda r: (r.seed, r.detector))
    return rows


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def summarize(rows: list[ResultRow]) -> list[dict]:
    """Mean and standard deviation of the numeric metrics per (method, detector)."""
    groups: dict[tuple[str, str], list[ResultRow]] = {}
    for row in rows:
        if row.error is None:
            groups.setdefault((row.method, row.detector), []).append(row)
    out = []
    for (method, det) in sorted(groups):
        grp = groups[(method, det)]
        entry = {"method": method, "detector": det, "count": len(grp)}
        for metric in ("budget", "nmi", "ari", "h", "degree_increment_pct",
                       "nmi_gt", "ari_gt"):
            vals = [getattr(r, metric) for r in grp if getattr(r, metric) is not None]
            if vals:
                mean = sum(vals) / len(vals)
                var = sum((v - mean) ** 2 for v in vals) / len(vals)
                entry[f"{metric}_mean"] = mean
                entry[f"{metric}_std"] = math.sqrt(var)
        out.append(entry)
    return out


def emit_report(rows: list[ResultRow], fmt: str, path) -> None:
    if not rows:
        raise ValueError("no result rows to report")
    with_gt = any(r.nmi_gt is not None for r in rows)
    columns = CSV_COLUMNS + (GT_COLUMNS if with_gt else ())
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(getattr(row, c)) for c in columns))
        for entry in summarize(rows):
            lines.append("# summary " + json.dumps(entry, sort_keys=True))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = {
            "rows": [{c: getattr(row, c) for c in columns} for row in rows],
            "summary": summarize(rows),
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)
