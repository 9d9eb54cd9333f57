"""Genetic search for link rewirings that disrupt community detection.

Chromosomes hold link-addition genes (non-edge IDs) and link-deletion genes
(edge IDs).  Variable-length crossover lets the budget evolve, and mutation is
biased by structural caches computed once on the original graph: long-distance
pairs for additions, low-betweenness links for deletions.
"""

from __future__ import annotations

import math
import os
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import partial
from itertools import accumulate

from .detection import Partition, louvain
from .errors import ConfigError, InfeasibleAttackError
from .graph import (Graph, LinkIndexSpace, Perturbation, all_pairs_distances,
                    apply_perturbation, edge_betweenness, index_bijection)
from .metrics import (attenuation, confusion, degree_distance, global_entropies,
                      target_confusion, target_entropies)

ADD_ONLY = "add-only"
REWIRE = "rewire"


@dataclass(frozen=True)
class AttackScale:
    """Which structure the attack hides.

    kind is 'global', 'community' (target = community index in the baseline
    detection) or 'node' (target = node ID).
    """

    kind: str
    target: int | None = None

    def __post_init__(self):
        if self.kind not in ("global", "community", "node"):
            raise ConfigError(f"unknown attack scale {self.kind!r}")
        if self.kind != "global" and self.target is None:
            raise ConfigError(f"{self.kind} attack needs a target")


@dataclass(frozen=True)
class GAConfig:
    population: int = 100
    generations: int = 200
    crossover_rate: float = 0.6
    mutation_rate: float = 0.1
    c: float = 4.0
    theta: int = 10
    epsilon: float = 0.5
    seed: int = 0
    node_attack_mode: str = ADD_ONLY

    def __post_init__(self):
        if self.population < 2:
            raise ConfigError("population must be at least 2")
        if self.generations < 1:
            raise ConfigError("generations must be positive")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.c <= 0.0:
            raise ConfigError("attenuation factor c must be positive")
        if self.theta < 1:
            raise ConfigError("theta must be at least 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must be in [0, 1]")
        if self.node_attack_mode not in (ADD_ONLY, REWIRE):
            raise ConfigError(f"unknown node attack mode {self.node_attack_mode!r}")


@dataclass(frozen=True)
class Chromosome:
    """One attack candidate: equal-size gene sets, except in add-only mode."""

    add: frozenset[int]
    delete: frozenset[int]

    @property
    def budget(self) -> int:
        return len(self.add)


@dataclass(frozen=True)
class GenePools:
    """Scale-constrained candidate genes with cumulative mutation weights.

    groups holds per-community sub-pools (add_ids, add_cum, del_ids, del_cum)
    for the global scale; initialization concentrates each chromosome on one
    community, which is where detection is actually vulnerable."""

    add_ids: tuple[int, ...]
    del_ids: tuple[int, ...]
    add_cum: tuple[float, ...]
    del_cum: tuple[float, ...]
    add_only: bool
    groups: tuple = ()


def _community_subpool(graph, space, members, dist, betw):
    outside = [v for v in range(graph.n) if v not in members]
    add_ids = sorted(
        space.nonedge_id(u, v)
        for u in members for v in outside if not graph.has_edge(u, v)
    )
    del_ids = sorted(
        space.edge_id(u, v) for u, v in graph.edges if u in members and v in members
    )
    add_cum = tuple(accumulate(float(dist[space.nonedge_pair(a)]) for a in add_ids))
    del_cum = tuple(accumulate(1.0 / betw[space.edge_pair(b)] for b in del_ids))
    return tuple(add_ids), add_cum, tuple(del_ids), del_cum


def build_pools(graph: Graph, space: LinkIndexSpace, scale: AttackScale,
                baseline: Partition, dist, betw) -> GenePools:
    add_only = False
    groups: tuple = ()
    if scale.kind == "global":
        add_ids = list(range(space.num_nonedges))
        del_ids = list(range(space.num_edges))
        groups = tuple(_community_subpool(graph, space, members, dist, betw)
                       for members in baseline.communities)
    elif scale.kind == "community":
        members = baseline.communities[scale.target]
        outside = [v for v in range(graph.n) if v not in members]
        add_ids = sorted(
            space.nonedge_id(u, v)
            for u in members for v in outside if not graph.has_edge(u, v)
        )
        del_ids = sorted(
            space.edge_id(u, v) for u, v in graph.edges if u in members and v in members
        )
    else:
        t = scale.target
        add_ids = sorted(
            space.nonedge_id(t, v)
            for v in range(graph.n) if v != t and v not in graph.adj[t]
        )
        del_ids = sorted(space.edge_id(t, v) for v in graph.adj[t])
        add_only = True  # mode applied by the caller; rewire keeps del_ids
    add_w = [float(dist[space.nonedge_pair(a)]) for a in add_ids]
    del_w = [1.0 / betw[space.edge_pair(b)] for b in del_ids]
    return GenePools(tuple(add_ids), tuple(del_ids),
                     tuple(accumulate(add_w)), tuple(accumulate(del_w)),
                     add_only, groups)


def decode(space: LinkIndexSpace, chromo: Chromosome) -> Perturbation:
    """Turn gene IDs back into the node-pair sets they stand for."""
    return Perturbation(
        frozenset(space.nonedge_pair(a) for a in chromo.add),
        frozenset(space.edge_pair(b) for b in chromo.delete),
    )


def validate_chromosome(chromo: Chromosome, graph: Graph, space: LinkIndexSpace,
                        scale: AttackScale, baseline: Partition,
                        config: GAConfig) -> None:
    """Raise AssertionError when any chromosome invariant is broken."""
    add_only = scale.kind == "node" and config.node_attack_mode == ADD_ONLY
    assert 1 <= chromo.budget <= config.theta, f"budget {chromo.budget} outside [1, {config.theta}]"
    if add_only:
        assert not chromo.delete, "add-only chromosome carries deletion genes"
    else:
        assert len(chromo.add) == len(chromo.delete), "unbalanced gene sets"
    assert all(0 <= a < space.num_nonedges for a in chromo.add), "addition gene out of range"
    assert all(0 <= b < space.num_edges for b in chromo.delete), "deletion gene out of range"
    if scale.kind == "community":
        members = baseline.communities[scale.target]
        for a in chromo.add:
            u, v = space.nonedge_pair(a)
            assert (u in members) != (v in members), "addition must cross the target boundary"
        for b in chromo.delete:
            u, v = space.edge_pair(b)
            assert u in members and v in members, "deletion must be internal to the target"
    elif scale.kind == "node":
        t = scale.target
        for g in chromo.add:
            assert t in space.nonedge_pair(g), "addition not incident to the target node"
        for g in chromo.delete:
            assert t in space.edge_pair(g), "deletion not incident to the target node"


# ---------------------------------------------------------------------------
# population initialization
# ---------------------------------------------------------------------------

def _node_heuristic_genes(graph: Graph, space: LinkIndexSpace, baseline: Partition,
                          t: int, beta: int, rewire: bool, rng: random.Random):
    """Additions aim the target node at one foreign community at a time;
    deletions (rewire mode) drop links leaving that community first."""
    home = baseline.community_of(t)
    foreign = [i for i in range(baseline.k) if i != home]
    order = rng.sample(foreign, len(foreign)) if foreign else []
    add_seq: list[int] = []
    for ci in order:
        members = sorted(baseline.communities[ci] - graph.adj[t] - {t})
        rng.shuffle(members)
        add_seq.extend(space.nonedge_id(t, v) for v in members)
    adds = frozenset(add_seq[:beta])
    if not rewire:
        return Chromosome(adds, frozenset())
    first = baseline.communities[order[0]] if order else frozenset()
    out = sorted(v for v in graph.adj[t] if v not in first)
    rest = sorted(v for v in graph.adj[t] if v in first)
    rng.shuffle(out)
    rng.shuffle(rest)
    del_seq = [space.edge_id(t, v) for v in out + rest]
    return Chromosome(adds, frozenset(del_seq[:beta]))


def _weighted_sample(ids, cum, k: int, rng: random.Random) -> frozenset[int]:
    """k distinct genes, each drawn from the cumulative-weight table.

    Rejection of duplicates gets slow when k approaches the pool size, so
    dense draws fall back to uniform sampling."""
    if 2 * k >= len(ids):
        return frozenset(rng.sample(ids, k))
    out: set[int] = set()
    while len(out) < k:
        out.add(_weighted_gene(ids, cum, rng))
    return frozenset(out)


def initialize_population(graph: Graph, space: LinkIndexSpace, scale: AttackScale,
                          baseline: Partition, config: GAConfig,
                          pools: GenePools, rng: random.Random) -> list[Chromosome]:
    add_only = scale.kind == "node" and config.node_attack_mode == ADD_ONLY
    theta_eff = min(config.theta, len(pools.add_ids))
    if not add_only:
        theta_eff = min(theta_eff, len(pools.del_ids))
    if theta_eff < 1:
        raise InfeasibleAttackError(
            f"{scale.kind} attack has no admissible budget (pool sizes: "
            f"{len(pools.add_ids)} additions, {len(pools.del_ids)} deletions)")
    usable_groups = [g for g in pools.groups if g[0] and g[2]]
    population = []
    for _ in range(config.population):
        beta = rng.randint(1, theta_eff)
        if scale.kind == "node":
            chromo = _node_heuristic_genes(graph, space, baseline, scale.target,
                                           beta, not add_only, rng)
            if chromo.budget == 0:
                raise InfeasibleAttackError("target node has no admissible additions")
        else:
            # concentrate each seed chromosome on one community when sub-pools
            # exist; dispersed rewirings almost never perturb the detection
            add_ids, add_cum, del_ids, del_cum = (
                rng.choice(usable_groups) if usable_groups
                else (pools.add_ids, pools.add_cum, pools.del_ids, pools.del_cum))
            b = min(beta, len(add_ids), len(del_ids))
            chromo = Chromosome(_weighted_sample(add_ids, add_cum, b, rng),
                                _weighted_sample(del_ids, del_cum, b, rng))
        population.append(chromo)
    return population


# ---------------------------------------------------------------------------
# fitness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttackContext:
    """Everything a fitness evaluation needs; immutable and shareable."""

    graph: Graph
    space: LinkIndexSpace
    baseline: Partition
    scale: AttackScale
    config: GAConfig
    degrees: tuple[int, ...]
    target_nodes: frozenset[int] | None = None
    target_links: int | None = None  # edges inside the target community


def make_context(graph: Graph, space: LinkIndexSpace, scale: AttackScale,
                 baseline: Partition, config: GAConfig) -> AttackContext:
    target_nodes = None
    target_links = None
    if scale.kind == "community":
        if not 0 <= scale.target < baseline.k:
            raise InfeasibleAttackError(f"no baseline community {scale.target}")
        target_nodes = baseline.communities[scale.target]
        target_links = sum(1 for u, v in graph.edges
                           if u in target_nodes and v in target_nodes)
        if target_links == 0:
            raise InfeasibleAttackError("target community has no internal links")
    elif scale.kind == "node":
        if not 0 <= scale.target < graph.n:
            raise InfeasibleAttackError(f"no node {scale.target}")
        if graph.degree(scale.target) == 0:
            raise InfeasibleAttackError("target node is isolated")
    return AttackContext(graph, space, baseline, scale, config,
                         tuple(graph.degrees()), target_nodes, target_links)


def _detect_adversarial(ctx: AttackContext, chromo: Chromosome):
    adv = apply_perturbation(ctx.graph, decode(ctx.space, chromo))
    return adv, louvain(adv, ctx.config.seed)


def fitness_global(ctx: AttackContext, chromo: Chromosome) -> float:
    adv, after = _detect_adversarial(ctx, chromo)
    mat = confusion(after, ctx.baseline)  # rows = new communities
    e_r, e_c = global_entropies(mat)
    term = 0.0
    if mat.n_cols > 1:
        term += e_r / math.log2(mat.n_cols)
    if mat.n_rows > 1:
        term += e_c / math.log2(mat.n_rows)
    d = degree_distance(ctx.degrees, adv.degrees())
    return attenuation(d / ctx.graph.m, ctx.config.c) * term


def fitness_target_community(ctx: AttackContext, chromo: Chromosome) -> float:
    adv, after = _detect_adversarial(ctx, chromo)
    e_r, e_c = target_entropies(target_confusion(ctx.target_nodes, after), ctx.graph.n)
    term = e_r
    if after.k > 1:
        term += e_c / math.log2(after.k)
    d = degree_distance(ctx.degrees, adv.degrees())
    return attenuation(d / ctx.target_links, ctx.config.c) * term


def node_attack_success(ctx: AttackContext, after: Partition) -> bool:
    t = ctx.scale.target
    old = ctx.baseline.communities[ctx.baseline.community_of(t)]
    new = after.communities[after.community_of(t)]
    return len(new & old) / len(new) < ctx.config.epsilon


def fitness_target_node(ctx: AttackContext, chromo: Chromosome) -> float:
    _, after = _detect_adversarial(ctx, chromo)
    if not node_attack_success(ctx, after):
        return 0.0
    d_t = ctx.degrees[ctx.scale.target]
    return d_t / (d_t + len(chromo.add))


_FITNESS = {
    "global": fitness_global,
    "community": fitness_target_community,
    "node": fitness_target_node,
}


# ---------------------------------------------------------------------------
# genetic operators
# ---------------------------------------------------------------------------

def roulette_select(population: list[Chromosome], fitnesses: list[float],
                    rng: random.Random, count: int) -> list[Chromosome]:
    """Fitness-proportional sampling with replacement; uniform when every
    fitness is zero."""
    total = sum(fitnesses)
    if total <= 0.0:
        return [population[rng.randrange(len(population))] for _ in range(count)]
    cum = list(accumulate(fitnesses))
    return [population[bisect_right(cum, rng.random() * total)] for _ in range(count)]


def crossover_nonequal(oi: Chromosome, oj: Chromosome, theta: int,
                       rng: random.Random, max_resamples: int = 50
                       ) -> tuple[Chromosome, Chromosome]:
    """Exchange unequal numbers of genes so offspring budgets can change.

    Genes shared by both parents are non-exchangeable.  Draw sizes are
    resampled while an offspring budget would leave [1, theta]; after
    max_resamples the crossover is a no-op."""
    add_only = not oi.delete and not oj.delete
    ex_add_i = sorted(oi.add - oj.add)
    ex_add_j = sorted(oj.add - oi.add)
    ex_del_i = sorted(oi.delete - oj.delete)
    ex_del_j = sorted(oj.delete - oi.delete)
    if add_only:
        li, lj = len(ex_add_i), len(ex_add_j)
    else:
        li = min(len(ex_add_i), len(ex_del_i))
        lj = min(len(ex_add_j), len(ex_del_j))
    if li == 0 or lj == 0:
        return oi, oj
    bi, bj = oi.budget, oj.budget
    for _ in range(max_resamples):
        ri = rng.randint(1, li)
        rj = rng.randint(1, lj)
        if 1 <= bi - ri + rj <= theta and 1 <= bj + ri - rj <= theta:
            break
    else:
        return oi, oj
    give_add_i = frozenset(rng.sample(ex_add_i, ri))
    give_add_j = frozenset(rng.sample(ex_add_j, rj))
    child_i_add = (oi.add - give_add_i) | give_add_j
    child_j_add = (oj.add - give_add_j) | give_add_i
    if add_only:
        return Chromosome(child_i_add, frozenset()), Chromosome(child_j_add, frozenset())
    give_del_i = frozenset(rng.sample(ex_del_i, ri))
    give_del_j = frozenset(rng.sample(ex_del_j, rj))
    return (
        Chromosome(child_i_add, (oi.delete - give_del_i) | give_del_j),
        Chromosome(child_j_add, (oj.delete - give_del_j) | give_del_i),
    )


def _weighted_gene(ids, cum, rng: random.Random) -> int:
    return ids[bisect_right(cum, rng.random() * cum[-1])]


def mutate(chromo: Chromosome, pools: GenePools, rate: float,
           rng: random.Random, max_tries: int = 30) -> Chromosome:
    """Per-gene replacement: additions resampled toward distant pairs,
    deletions toward low-betweenness links; duplicates are redrawn."""
    if rate <= 0.0:
        return chromo

    def sweep(genes: frozenset[int], ids, cum) -> frozenset[int]:
        if len(ids) <= len(genes):
            return genes  # no fresh candidates
        current = set(genes)
        for g in sorted(genes):
            if rng.random() >= rate:
                continue
            for _ in range(max_tries):
                cand = _weighted_gene(ids, cum, rng)
                if cand not in current:
                    current.remove(g)
                    current.add(cand)
                    break
        return frozenset(current)

    new_add = sweep(chromo.add, pools.add_ids, pools.add_cum)
    new_del = sweep(chromo.delete, pools.del_ids, pools.del_cum) if chromo.delete else chromo.delete
    return Chromosome(new_add, new_del)


# ---------------------------------------------------------------------------
# the generational loop
# ---------------------------------------------------------------------------

@dataclass
class AttackReport:
    """Outcome of one attack run."""

    scale: AttackScale
    config: GAConfig
    baseline: Partition
    best_chromosome: Chromosome
    best_fitness: float
    perturbation: Perturbation
    adversarial: Graph
    fitness_history: list[float]
    metrics: dict[str, float] = field(default_factory=dict)
    success: bool | None = None
    degree_increment_pct: float | None = None

    @property
    def budget(self) -> int:
        return self.best_chromosome.budget


def _eval_dispatch(ctx: AttackContext, fitness_fn, chromo: Chromosome) -> float:
    return fitness_fn(ctx, chromo)


def _make_worker_pool():
    threads = int(os.environ.get("EPA_THREADS", "1"))
    if threads > 1:
        import multiprocessing
        return multiprocessing.get_context("fork").Pool(threads)
    return None


def _evaluate(population, evaluator, cache, workers) -> list[float]:
    missing = sorted({c for c in population if c not in cache},
                     key=lambda c: (sorted(c.add), sorted(c.delete)))
    if missing:
        values = workers.map(evaluator, missing) if workers else [evaluator(c) for c in missing]
        cache.update(zip(missing, values))
    return [cache[c] for c in population]


def evolve(ctx: AttackContext, pools: GenePools, fitness_fn,
           validate: bool = True):
    """Run the generational loop; returns (best chromosome, best fitness,
    per-generation best-fitness history)."""
    config = ctx.config
    rng = random.Random(config.seed)
    population = initialize_population(ctx.graph, ctx.space, ctx.scale,
                                       ctx.baseline, config, pools, rng)
    evaluator = partial(_eval_dispatch, ctx, fitness_fn)
    cache: dict[Chromosome, float] = {}
    workers = _make_worker_pool()
    best: Chromosome | None = None
    best_fit = -math.inf
    history: list[float] = []
    try:
        for _ in range(config.generations):
            if validate:
                for chromo in population:
                    validate_chromosome(chromo, ctx.graph, ctx.space, ctx.scale,
                                        ctx.baseline, config)
            fits = _evaluate(population, evaluator, cache, workers)
            gen_best = max(range(len(fits)), key=fits.__getitem__)
            if fits[gen_best] > best_fit:
                best, best_fit = population[gen_best], fits[gen_best]
            history.append(best_fit)
            parents = roulette_select(population, fits, rng, config.population - 1)
            children: list[Chromosome] = []
            i = 0
            while i < len(parents):
                if i + 1 < len(parents) and rng.random() < config.crossover_rate:
                    c1, c2 = crossover_nonequal(parents[i], parents[i + 1],
                                                config.theta, rng)
                    children.extend((c1, c2))
                    i += 2
                else:
                    children.append(parents[i])
                    i += 1
            children = [mutate(c, pools, config.mutation_rate, rng) for c in children]
            population = [best] + children
        fits = _evaluate(population, evaluator, cache, workers)
        gen_best = max(range(len(fits)), key=fits.__getitem__)
        if fits[gen_best] > best_fit:
            best, best_fit = population[gen_best], fits[gen_best]
    finally:
        if workers:
            workers.close()
            workers.join()
    return best, best_fit, history


def run_epa(graph: Graph, scale: AttackScale, config: GAConfig,
            fitness_override=None, validate: bool = True) -> AttackReport:
    """Full attack: detect the baseline, evolve a perturbation, package results."""
    space = index_bijection(graph)
    baseline = louvain(graph, config.seed)
    ctx = make_context(graph, space, scale, baseline, config)
    dist = all_pairs_distances(graph)
    betw = edge_betweenness(graph)
    pools = build_pools(graph, space, scale, baseline, dist, betw)
    fitness_fn = fitness_override or _FITNESS[scale.kind]
    best, best_fit, history = evolve(ctx, pools, fitness_fn, validate=validate)
    pert = decode(space, best)
    adv = apply_perturbation(graph, pert)
    after = louvain(adv, config.seed)

    from .metrics import ari, deception_score, nmi  # local import avoids a cycle
    report = AttackReport(scale, config, baseline, best, best_fit, pert, adv, history)
    report.metrics["nmi_det"] = nmi(baseline, after)
    report.metrics["ari_det"] = ari(baseline, after)
    if scale.kind == "community":
        report.metrics["h"] = deception_score(ctx.target_nodes, after, adv)
    if scale.kind == "node":
        report.success = node_attack_success(ctx, after)
        d_t = graph.degree(scale.target)
        report.degree_increment_pct = 100.0 * len(best.add) / d_t
    return report
