"""End-to-end acceptance checks.

Each test covers one numbered claim about the library, exercises it at the
stated tolerances, and reports a single pass/fail line in the terminal
summary.  The heavier checks (6 through 10) run full attacks and take a few
minutes combined.
"""

import math
import os
import random
import statistics
import time

import pytest

from commhide.baselines import (attack_AB, attack_AD, attack_Dr, attack_Dw,
                                attack_random)
from commhide.detection import (Partition, greedy_modularity,
                                label_propagation, louvain, modularity)
from commhide.evolve import (AttackScale, Chromosome, GAConfig, evolve,
                             build_pools, make_context,
                             fitness_target_community, run_epa)
from commhide.graph import (Graph, all_pairs_distances, apply_perturbation,
                            edge_betweenness, generate_planted_partition,
                            index_bijection, load_gml)
from commhide.metrics import (ConfusionMatrix, ari, deception_score,
                              degree_distance, global_entropies, nmi)

from conftest import acceptance_lines, clique_edges
from test_detection import max_modularity_exhaustive


def record(num: int, title: str, ok: bool, detail: str = ""):
    state = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    acceptance_lines.append(f"[{state}] criterion {num:2d}: {title}{suffix}")
    assert ok, f"criterion {num}: {title}{suffix}"


@pytest.fixture(scope="module")
def bench():
    """The 4 x 32 planted-partition benchmark shared by the heavy checks."""
    return generate_planted_partition([32] * 4, 0.3, 0.02, seed=5)


def test_criterion_1_metric_identities():
    rng = random.Random(101)
    ok = True
    for _ in range(500):
        n = rng.randint(2, 40)
        x = Partition([rng.randrange(1, 6) for _ in range(n)])
        y = Partition([rng.randrange(1, 6) for _ in range(n)])
        perm = {c: (3 * c + 1) % 7 for c in range(6)}
        xr = Partition([perm[c] for c in x.assignment])
        ok &= nmi(x, x) == 1.0 and ari(x, x) == 1.0
        ok &= abs(nmi(x, y) - nmi(y, x)) < 1e-12
        ok &= abs(ari(x, y) - ari(y, x)) < 1e-12
        ok &= abs(nmi(xr, y) - nmi(x, y)) < 1e-12
        ok &= abs(ari(xr, y) - ari(x, y)) < 1e-12
        if not ok:
            break
    record(1, "NMI/ARI identity, symmetry, relabel invariance", ok)


def test_criterion_2_entropy_bounds():
    rng = random.Random(102)
    ok = True
    for _ in range(10_000):
        nr, nc = rng.randint(1, 6), rng.randint(1, 6)
        counts = tuple(tuple(rng.randint(0, 8) for _ in range(nc))
                       for _ in range(nr))
        n = sum(map(sum, counts))
        if n == 0:
            continue
        e_r, e_c = global_entropies(ConfusionMatrix(counts, n))
        ok &= -1e-12 <= e_r <= math.log2(nc) + 1e-12
        ok &= -1e-12 <= e_c <= math.log2(nr) + 1e-12
        if not ok:
            break
    for k in (2, 3, 5):
        uniform = ConfusionMatrix(tuple(tuple(2 for _ in range(k))
                                        for _ in range(k)), 2 * k * k)
        e_r, e_c = global_entropies(uniform)
        ok &= abs(e_r - math.log2(k)) <= 1e-12
        ok &= abs(e_c - math.log2(k)) <= 1e-12
    record(2, "mixing entropies within [0, log2 k], uniform case tight", ok)


def test_criterion_3_degree_distance_bound():
    from commhide.graph import Perturbation

    rng = random.Random(103)
    ok = True
    done = 0
    while done < 1000:
        n = rng.randint(6, 16)
        g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)
                      if rng.random() < 0.4])
        edges = sorted(g.edges)
        nonedges = [(u, v) for u in range(n) for v in range(u + 1, n)
                    if not g.has_edge(u, v)]
        if not edges or not nonedges:
            continue
        beta = rng.randint(1, min(len(edges), len(nonedges), 5))
        pert = Perturbation(frozenset(rng.sample(nonedges, beta)),
                            frozenset(rng.sample(edges, beta)))
        d = degree_distance(g.degrees(), apply_perturbation(g, pert).degrees())
        ok &= 0.0 <= d <= beta + 1e-12
        done += 1
    g = Graph(4, [(0, 1)])
    g2 = apply_perturbation(g, Perturbation(frozenset({(2, 3)}),
                                            frozenset({(0, 1)})))
    ok &= degree_distance(g.degrees(), g2.degrees()) == 1.0
    record(3, "degree distance in [0, budget]; disjoint rewiring gives 1", ok)


def test_criterion_4_detection_oracle():
    start = time.perf_counter()
    rng = random.Random(17)
    ok = True
    checked = 0
    for _ in range(200):
        n = rng.randint(3, 8)
        g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)
                      if rng.random() < 0.4])
        if g.m == 0 or (all_pairs_distances(g) >= n).any():
            continue
        gap = max_modularity_exhaustive(g) - modularity(g, louvain(g, seed=0))
        ok &= gap <= 0.05
        checked += 1
    two_cliques = Graph(10, clique_edges(range(5)) + clique_edges(range(5, 10))
                        + [(0, 5)])
    planted = {frozenset(range(5)), frozenset(range(5, 10))}
    ok &= set(louvain(two_cliques, seed=0).communities) == planted
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60.0
    record(4, "louvain within 0.05 of exhaustive max-Q on tiny graphs", ok,
           f"{checked} connected instances, {elapsed:.1f} s")


def test_criterion_5_ga_invariants(bench, monkeypatch):
    import commhide.evolve as ev

    graph, _ = bench
    config = GAConfig(population=16, generations=200, theta=10, seed=3)
    validated = []
    real_validator = ev.validate_chromosome

    def spy(chromo, *args, **kwargs):
        validated.append(chromo)
        return real_validator(chromo, *args, **kwargs)

    monkeypatch.setattr(ev, "validate_chromosome", spy)
    r1 = run_epa(graph, AttackScale("global"), config)
    monkeypatch.setattr(ev, "validate_chromosome", real_validator)
    r2 = run_epa(graph, AttackScale("global"), config)

    ok = len(validated) >= config.population * config.generations
    ok &= len(r1.fitness_history) == 200
    ok &= all(b >= a for a, b in zip(r1.fitness_history, r1.fitness_history[1:]))
    ok &= r1.fitness_history == r2.fitness_history
    ok &= r1.best_chromosome == r2.best_chromosome
    ok &= r1.perturbation == r2.perturbation
    record(5, "200-generation run: validator clean, elite monotone, rerun identical",
           ok, f"{len(validated)} chromosomes validated")


def test_criterion_6_global_attack_beats_heuristics(bench):
    start = time.perf_counter()
    graph, truth = bench
    beta = math.ceil(0.05 * graph.m)
    pert_ab = attack_AB(graph, beta)
    pert_ad = attack_AD(graph, beta)
    wins = 0
    for seed in range(10):
        config = GAConfig(population=30, generations=40, theta=beta, c=1.0,
                          seed=seed)
        rep = run_epa(graph, AttackScale("global"), config)
        n_epa = nmi(truth, louvain(rep.adversarial, seed))
        n_ab = nmi(truth, louvain(apply_perturbation(graph, pert_ab), seed))
        n_ad = nmi(truth, louvain(apply_perturbation(graph, pert_ad), seed))
        n_rnd = nmi(truth, louvain(
            apply_perturbation(graph, attack_random(graph, beta, seed)), seed))
        wins += n_epa < min(n_ab, n_ad, n_rnd)
    elapsed = time.perf_counter() - start
    ok = wins >= 8 and elapsed <= 600.0
    record(6, "5% global attack beats betweenness/degree/random on >= 8/10 seeds",
           ok, f"{wins}/10 wins, {elapsed:.0f} s")


FOOTBALL_PATHS = (os.environ.get("COMMHIDE_FOOTBALL", ""),
                  os.path.join(os.path.dirname(__file__), "..", "data",
                               "football.gml"))


def test_criterion_7_football_attenuation_sweep():
    path = next((p for p in FOOTBALL_PATHS if p and os.path.exists(p)), None)
    if path is None:
        record(7, "college-football attenuation sweep", False,
               "dataset not present: place the 115-team college football "
               "network at data/football.gml or set COMMHIDE_FOOTBALL; it is "
               "not redistributable with this repository and this sandbox "
               "has no way to download it")
    start = time.perf_counter()
    graph, labels = load_gml(path)
    truth = Partition(labels)
    theta = math.ceil(0.05 * graph.m)

    def sweep(c):
        budgets, nmis, aris = [], [], []
        for seed in range(10):
            config = GAConfig(population=40, generations=60, theta=theta,
                              c=c, seed=seed)
            rep = run_epa(graph, AttackScale("global"), config)
            after = louvain(rep.adversarial, seed)
            budgets.append(rep.budget)
            nmis.append(nmi(truth, after))
            aris.append(ari(truth, after))
        return (statistics.mean(budgets), statistics.mean(nmis),
                statistics.mean(aris))

    b3, n3, a3 = sweep(3.0)
    b6, n6, _ = sweep(6.0)
    elapsed = time.perf_counter() - start
    ok = 8.0 <= b3 <= 25.0 and 0.70 <= n3 <= 0.85 and 0.45 <= a3 <= 0.65
    ok &= b6 < b3 and n6 >= n3 - 0.02
    ok &= elapsed <= 900.0
    record(7, "college-football attenuation sweep", ok,
           f"c=3: budget {b3:.1f}, NMI {n3:.2f}, ARI {a3:.2f}; "
           f"c=6: budget {b6:.1f}, NMI {n6:.2f}; {elapsed:.0f} s")


def test_criterion_8_community_attack_beats_dw(bench):
    start = time.perf_counter()
    graph, _ = bench
    space = index_bijection(graph)
    dominated = 0
    for ci in range(4):
        h_epa, f_epa, h_dw, f_dw = [], [], [], []
        for seed in range(5):
            config = GAConfig(population=24, generations=30, theta=20, c=1.0,
                              seed=seed)
            rep = run_epa(graph, AttackScale("community", ci), config)
            h_epa.append(rep.metrics["h"])
            f_epa.append(rep.best_fitness)
            baseline = louvain(graph, seed)
            target = baseline.communities[ci]
            pert = attack_Dw(graph, target, rep.budget, seed)
            adv = apply_perturbation(graph, pert)
            h_dw.append(deception_score(target, louvain(adv, seed), adv))
            ctx = make_context(graph, space, AttackScale("community", ci),
                               baseline, config)
            chromo = Chromosome(
                frozenset(space.nonedge_id(*p) for p in pert.additions),
                frozenset(space.edge_id(*p) for p in pert.deletions))
            f_dw.append(fitness_target_community(ctx, chromo))
        if (statistics.mean(h_epa) >= statistics.mean(h_dw)
                and statistics.mean(f_epa) >= statistics.mean(f_dw)):
            dominated += 1
    elapsed = time.perf_counter() - start
    ok = dominated >= 3
    record(8, "community attack matches or beats random deception on >= 3/4 targets",
           ok, f"{dominated}/4 communities, {elapsed:.0f} s")


def test_criterion_9_node_attack_two_cliques():
    graph = Graph(16, clique_edges(range(8)) + clique_edges(range(8, 16))
                  + [(0, 8), (1, 9)])
    targets = [0, 1, 2, 3, 4]
    wins = 0
    details = []
    for t in targets:
        config = GAConfig(population=20, generations=30, theta=8, seed=t)
        rep = run_epa(graph, AttackScale("node", t), config)
        verified = False
        if rep.success:
            # re-run the detector on the rewired graph and re-check the
            # overlap condition from scratch
            before = louvain(graph, t)
            after = louvain(rep.adversarial, t)
            home = before.communities[before.community_of(t)]
            new = after.communities[after.community_of(t)]
            verified = len(new & home) / len(new) < 0.5
        dr = attack_Dr(graph, t, lambda g: louvain(g, t), epsilon=0.5,
                       max_budget=8, seed=t)
        epa_inc = rep.degree_increment_pct if verified else math.inf
        dr_inc = dr.degree_increment_pct if dr.success else math.inf
        won = verified and epa_inc <= dr_inc
        wins += won
        details.append(f"t={t}:{'ok' if won else 'no'}")
    ok = wins >= 4
    record(9, "add-only node hiding on two bridged 8-cliques beats random adds "
           "on >= 4/5 targets", ok, f"{wins}/5 [{', '.join(details)}]")


def test_criterion_10_transferability(bench):
    start = time.perf_counter()
    graph, truth = bench
    theta = math.ceil(0.10 * graph.m)
    base_greedy = nmi(truth, greedy_modularity(graph))
    red_lou, red_gre, red_lab = [], [], []
    for seed in range(10):
        config = GAConfig(population=30, generations=50, theta=theta, c=0.5,
                          seed=seed)
        rep = run_epa(graph, AttackScale("global"), config)
        adv = rep.adversarial
        red_lou.append(nmi(truth, louvain(graph, seed))
                       - nmi(truth, louvain(adv, seed)))
        red_gre.append(base_greedy - nmi(truth, greedy_modularity(adv)))
        red_lab.append(nmi(truth, label_propagation(graph, seed))
                       - nmi(truth, label_propagation(adv, seed)))
    m_lou = statistics.mean(red_lou)
    m_gre = statistics.mean(red_gre)
    m_lab = statistics.mean(red_lab)
    elapsed = time.perf_counter() - start
    ok = m_gre > 0.0 and m_lab > 0.0
    ok &= m_lou >= m_gre - 0.05 and m_lou >= m_lab - 0.05
    record(10, "louvain-optimized attacks transfer to greedy and label propagation",
           ok, f"mean NMI drop louvain {m_lou:.3f}, greedy {m_gre:.3f}, "
           f"labelprop {m_lab:.3f}; {elapsed:.0f} s")
