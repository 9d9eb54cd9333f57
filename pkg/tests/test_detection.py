"""Detector tests, including an exhaustive max-modularity oracle on tiny graphs."""

import random

import pytest

from commhide.detection import (Partition, greedy_modularity, label_propagation,
                                louvain, modularity)
from commhide.graph import Graph


def set_partitions(items):
    """All partitions of a list, via the standard recursive construction."""
    if len(items) == 1:
        yield [items]
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        for i, block in enumerate(smaller):
            yield smaller[:i] + [[first] + block] + smaller[i + 1:]
        yield [[first]] + smaller


def max_modularity_exhaustive(graph):
    best = None
    for blocks in set_partitions(list(range(graph.n))):
        q = modularity(graph, Partition.from_communities(blocks, graph.n))
        if best is None or q > best:
            best = q
    return best


def test_partition_normalization_and_equality():
    a = Partition(["x", "x", "y", "y"])
    b = Partition([5, 5, 2, 2])
    assert a == b
    assert a.assignment == (0, 0, 1, 1)
    assert a.communities == (frozenset({0, 1}), frozenset({2, 3}))
    assert a.community_of(3) == 1


def test_partition_from_communities_rejects_overlap():
    with pytest.raises(ValueError):
        Partition.from_communities([{0, 1}, {1, 2}], 3)
    with pytest.raises(ValueError):
        Partition.from_communities([{0}], 2)  # node 1 unassigned


def test_modularity_known_values(two_triangles, triangle_split):
    assert modularity(two_triangles, Partition([0] * 6)) == pytest.approx(0.0)
    assert modularity(two_triangles, triangle_split) == pytest.approx(
        3 / 7 + 3 / 7 - 2 * (7 / 14) ** 2)
    tri = Graph(3, [(0, 1), (0, 2), (1, 2)])
    assert modularity(tri, Partition([0, 1, 2])) == pytest.approx(-1 / 3)


def test_louvain_two_cliques(two_triangles, two_5cliques, triangle_split):
    assert louvain(two_triangles, seed=0) == triangle_split
    part = louvain(two_5cliques, seed=3)
    assert set(part.communities) == {frozenset(range(5)), frozenset(range(5, 10))}


def test_louvain_deterministic(planted_small):
    graph, _ = planted_small
    assert louvain(graph, seed=9) == louvain(graph, seed=9)


def test_greedy_modularity_cases(two_triangles, triangle_split):
    assert greedy_modularity(two_triangles) == triangle_split
    pair = Graph(4, [(0, 1), (2, 3)])
    assert set(greedy_modularity(pair).communities) == {
        frozenset({0, 1}), frozenset({2, 3})}
    k4 = Graph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    assert greedy_modularity(k4).k == 1


def test_label_propagation_cases(two_5cliques):
    for seed in range(20):
        part = label_propagation(two_5cliques, seed=seed)
        assert set(part.communities) == {frozenset(range(5)), frozenset(range(5, 10))}
    k5 = Graph(5, [(u, v) for u in range(5) for v in range(u + 1, 5)])
    assert label_propagation(k5, seed=0).k == 1


def test_louvain_near_optimal_on_tiny_graphs():
    """Louvain should land within 0.05 of the exhaustive maximum on all
    connected graphs up to 8 nodes drawn at random."""
    from commhide.graph import all_pairs_distances

    rng = random.Random(17)
    checked = 0
    for _ in range(200):
        n = rng.randint(3, 8)
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                 if rng.random() < 0.4]
        g = Graph(n, edges)
        if g.m == 0 or (all_pairs_distances(g) >= n).any():
            continue
        best = max_modularity_exhaustive(g)
        got = modularity(g, louvain(g, seed=0))
        assert got >= best - 0.05
        checked += 1
    assert checked > 50


def test_detectors_reject_edgeless():
    g = Graph(2, [])
    for fn in (lambda: louvain(g), lambda: greedy_modularity(g),
               lambda: label_propagation(g)):
        with pytest.raises(ValueError):
            fn()
