"""Comparison attacks: greedy heuristics, alternative GA fitnesses, and
randomized deception baselines."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .detection import Partition, louvain, modularity
from .errors import InfeasibleAttackError
from .evolve import (AttackContext, AttackReport, AttackScale, Chromosome,
                     GAConfig, _detect_adversarial, run_epa)
from .graph import (Graph, Perturbation, all_pairs_distances, apply_perturbation,
                    edge_betweenness)
from .metrics import attenuation, deception_score, degree_distance


def _max_by(pairs, key):
    """Max by (key, then lexicographically smallest pair)."""
    best = None
    best_key = None
    for p in sorted(pairs):
        k = key(p)
        if best is None or k > best_key:
            best, best_key = p, k
    return best


def _greedy_rewire(graph: Graph, beta: int, deletion_key) -> Perturbation:
    if beta < 1:
        raise InfeasibleAttackError("budget must be at least 1")
    if beta > graph.m:
        raise InfeasibleAttackError("budget exceeds the number of links")
    work = graph
    added: set[tuple[int, int]] = set()
    deleted: set[tuple[int, int]] = set()
    for _ in range(beta):
        del_candidates = [e for e in work.edges if e in graph.edges]
        if not del_candidates:
            raise InfeasibleAttackError("no original links left to delete")
        dk = deletion_key(work)
        target_del = _max_by(del_candidates, dk)
        dist = all_pairs_distances(work)
        add_candidates = [
            (u, v) for u in range(work.n) for v in range(u + 1, work.n)
            if (u, v) not in work.edges and (u, v) not in graph.edges
        ]
        if not add_candidates:
            raise InfeasibleAttackError("no non-links left to add")
        target_add = _max_by(add_candidates, lambda p: int(dist[p]))
        deleted.add(target_del)
        added.add(target_add)
        work = apply_perturbation(
            work, Perturbation(frozenset([target_add]), frozenset([target_del])))
    return Perturbation(frozenset(added), frozenset(deleted))


def attack_AB(graph: Graph, beta: int) -> Perturbation:
    """Delete the highest-betweenness link and add the longest-distance
    non-link, recomputing both each iteration."""
    def key(work: Graph):
        betw = edge_betweenness(work)
        return lambda e: betw[e]
    return _greedy_rewire(graph, beta, key)


def attack_AD(graph: Graph, beta: int) -> Perturbation:
    """Delete the link whose endpoints have the largest degree sum and add the
    longest-distance non-link, recomputing both each iteration."""
    def key(work: Graph):
        return lambda e: work.degree(e[0]) + work.degree(e[1])
    return _greedy_rewire(graph, beta, key)


def attack_random(graph: Graph, beta: int, seed: int) -> Perturbation:
    """Uniform random rewiring control: beta deletions plus beta additions."""
    rng = random.Random(seed)
    edges = sorted(graph.edges)
    nonedges = [(u, v) for u in range(graph.n) for v in range(u + 1, graph.n)
                if (u, v) not in graph.edges]
    if beta > len(edges) or beta > len(nonedges):
        raise InfeasibleAttackError("budget exceeds candidate pools")
    return Perturbation(frozenset(rng.sample(nonedges, beta)),
                        frozenset(rng.sample(edges, beta)))


# ---------------------------------------------------------------------------
# GA variants with alternative fitness functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ModularityDropFitness:
    """Attenuated, normalized drop of detected modularity."""

    def __call__(self, ctx: AttackContext, chromo: Chromosome) -> float:
        adv, after = _detect_adversarial(ctx, chromo)
        q_before = modularity(ctx.graph, ctx.baseline)
        drop = max(0.0, q_before - modularity(adv, after))
        if q_before != 0.0:
            drop /= abs(q_before)
        d = degree_distance(ctx.degrees, adv.degrees())
        return attenuation(d / ctx.graph.m, ctx.config.c) * drop


@dataclass(frozen=True)
class _MeanDeceptionFitness:
    """Mean deception score over all baseline communities with >= 2 nodes."""

    def __call__(self, ctx: AttackContext, chromo: Chromosome) -> float:
        adv, after = _detect_adversarial(ctx, chromo)
        scores = [deception_score(c, after, adv)
                  for c in ctx.baseline.communities if len(c) >= 2]
        return sum(scores) / len(scores) if scores else 0.0


def attack_AQ(graph: Graph, config: GAConfig) -> AttackReport:
    return run_epa(graph, AttackScale("global"), config,
                   fitness_override=_ModularityDropFitness())


def attack_AS(graph: Graph, config: GAConfig) -> AttackReport:
    return run_epa(graph, AttackScale("global"), config,
                   fitness_override=_MeanDeceptionFitness())


# ---------------------------------------------------------------------------
# randomized deception baselines
# ---------------------------------------------------------------------------

def attack_Dw(graph: Graph, target: frozenset[int], beta: int, seed: int) -> Perturbation:
    """Random community deception: delete links inside the target, add links
    from target members to outsiders."""
    rng = random.Random(seed)
    internal = sorted(e for e in graph.edges if e[0] in target and e[1] in target)
    external = sorted(
        (min(u, v), max(u, v))
        for u in target for v in range(graph.n)
        if v not in target and not graph.has_edge(u, v)
    )
    if beta > len(internal) or beta > len(external):
        raise InfeasibleAttackError(
            f"budget {beta} exceeds pools ({len(internal)} internal links, "
            f"{len(external)} external non-links)")
    return Perturbation(frozenset(rng.sample(external, beta)),
                        frozenset(rng.sample(internal, beta)))


@dataclass
class NodeAttackResult:
    additions: list[tuple[int, int]]
    success: bool
    degree_increment_pct: float


def attack_Dr(graph: Graph, t: int, detector, epsilon: float,
              max_budget: int, seed: int) -> NodeAttackResult:
    """Random target-node hiding: add links from the node to members of other
    communities one at a time, re-detecting after each, until the node's new
    community is mostly foreign or the budget runs out."""
    rng = random.Random(seed)
    baseline = detector(graph)
    home = baseline.communities[baseline.community_of(t)]
    d_t = graph.degree(t)
    if d_t == 0:
        raise InfeasibleAttackError("target node is isolated")

    def succeeded(g: Graph) -> bool:
        part = detector(g)
        new = part.communities[part.community_of(t)]
        return len(new & home) / len(new) < epsilon

    candidates = sorted(v for v in range(graph.n)
                        if v != t and v not in home and not graph.has_edge(t, v))
    rng.shuffle(candidates)
    work = graph
    additions: list[tuple[int, int]] = []
    if succeeded(work):
        return NodeAttackResult([], True, 0.0)
    for v in candidates[:max_budget]:
        pair = (min(t, v), max(t, v))
        work = apply_perturbation(work, Perturbation(frozenset([pair]), frozenset()))
        additions.append(pair)
        if succeeded(work):
            return NodeAttackResult(additions, True, 100.0 * len(additions) / d_t)
    return NodeAttackResult(additions, False, 100.0 * len(additions) / d_t)
