"""Community detection: modularity, Louvain, CNM agglomeration, label propagation.

Louvain is the surrogate the attacks query; the other two serve as black-box
transfer targets.  All detectors are deterministic for a fixed (graph, seed).
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict

from .graph import Graph

_EPS = 1e-12


class Partition:
    """A node -> community assignment with dense community IDs.

    Community IDs are normalized to first-appearance order over node indices,
    so two partitions with the same grouping compare equal regardless of the
    labels they were built from.
    """

    __slots__ = ("assignment", "communities", "k")

    def __init__(self, assignment):
        assignment = list(assignment)
        if not assignment:
            raise ValueError("empty partition")
        remap: dict = {}
        dense = []
        for lab in assignment:
            if lab is None:
                raise ValueError("every node must be assigned a community")
            if lab not in remap:
                remap[lab] = len(remap)
            dense.append(remap[lab])
        self.assignment = tuple(dense)
        self.k = len(remap)
        comms: list[set[int]] = [set() for _ in range(self.k)]
        for v, c in enumerate(dense):
            comms[c].add(v)
        self.communities = tuple(frozenset(c) for c in comms)

    @staticmethod
    def from_assignment(assignment) -> "Partition":
        return Partition(assignment)

    @staticmethod
    def from_communities(communities, n: int) -> "Partition":
        assignment = [None] * n
        for c, nodes in enumerate(communities):
            for v in nodes:
                if assignment[v] is not None:
                    raise ValueError(f"node {v} assigned twice")
                assignment[v] = c
        return Partition(assignment)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def community_of(self, v: int) -> int:
        return self.assignment[v]

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.assignment == other.assignment

    def __hash__(self) -> int:
        return hash(self.assignment)

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, k={self.k})"


def modularity(graph: Graph, partition: Partition) -> float:
    """Newman modularity Q of a partition."""
    if graph.m == 0:
        raise ValueError("modularity undefined on an edgeless graph")
    if partition.n != graph.n:
        raise ValueError("partition does not cover the graph's nodes")
    m = graph.m
    q = 0.0
    for nodes in partition.communities:
        intra = sum(1 for u, v in graph.edges if u in nodes and v in nodes)
        degsum = sum(graph.degree(v) for v in nodes)
        q += intra / m - (degsum / (2.0 * m)) ** 2
    return q


def louvain(graph: Graph, seed: int = 0) -> Partition:
    """Greedy modularity ascent with node sweeps and community aggregation.

    The seed fixes the node visiting order; among equal-gain moves a node
    stays where it is, so runs are fully reproducible.
    """
    if graph.m < 1:
        raise ValueError("louvain needs at least one edge")
    rng = random.Random(seed)
    m2 = 2.0 * graph.m
    # current-level weighted graph
    cur_adj: list[dict[int, float]] = [dict.fromkeys(graph.adj[v], 1.0) for v in range(graph.n)]
    self_w = [0.0] * graph.n
    membership = list(range(graph.n))  # original node -> current-level node

    while True:
        n_cur = len(cur_adj)
        strength = [sum(cur_adj[v].values()) + 2.0 * self_w[v] for v in range(n_cur)]
        comm = list(range(n_cur))
        comm_tot = strength[:]
        moved_any = False
        improved = True
        while improved:
            improved = False
            order = list(range(n_cur))
            rng.shuffle(order)
            for v in order:
                cv = comm[v]
                w2c: dict[int, float] = defaultdict(float)
                for u, w in cur_adj[v].items():
                    if u != v:
                        w2c[comm[u]] += w
                comm_tot[cv] -= strength[v]
                best_c = cv
                best_gain = w2c.get(cv, 0.0) - comm_tot[cv] * strength[v] / m2
                for c, w in w2c.items():
                    if c == cv:
                        continue
                    gain = w - comm_tot[c] * strength[v] / m2
                    if gain > best_gain + _EPS:
                        best_c, best_gain = c, gain
                comm[v] = best_c
                comm_tot[best_c] += strength[v]
                if best_c != cv:
                    improved = True
                    moved_any = True
        if not moved_any:
            break
        # aggregate communities into super-nodes
        relabel: dict[int, int] = {}
        for v in range(n_cur):
            if comm[v] not in relabel:
                relabel[comm[v]] = len(relabel)
        k = len(relabel)
        new_adj: list[dict[int, float]] = [defaultdict(float) for _ in range(k)]
        new_self = [0.0] * k
        for v in range(n_cur):
            cv = relabel[comm[v]]
            new_self[cv] += self_w[v]
            for u, w in cur_adj[v].items():
                cu = relabel[comm[u]]
                if cu == cv:
                    if u == v:
                        new_self[cv] += w
                    else:
                        new_self[cv] += 0.5 * w  # each intra edge seen from both ends
                else:
                    new_adj[cv][cu] += w
        cur_adj = [dict(d) for d in new_adj]
        self_w = new_self
        membership = [relabel[comm[c]] for c in membership]
        if k == n_cur:
            break
    return Partition(membership)


def greedy_modularity(graph: Graph) -> Partition:
    """CNM agglomeration: start from singletons and merge the connected pair
    with the largest modularity gain until no merge improves Q.  Ties go to
    the lexicographically smallest community-ID pair."""
    if graph.m < 1:
        raise ValueError("greedy agglomeration needs at least one edge")
    m2 = 2.0 * graph.m
    comm_nodes: dict[int, set[int]] = {v: {v} for v in range(graph.n)}
    degsum = {v: float(graph.degree(v)) for v in range(graph.n)}
    between: dict[int, dict[int, float]] = defaultdict(lambda: defaultdict(float))
    for u, v in graph.edges:
        between[u][v] += 1.0
        between[v][u] += 1.0
    while len(comm_nodes) > 1:
        best = None
        best_dq = _EPS
        for a in sorted(between):
            if a not in comm_nodes:
                continue
            for b in sorted(between[a]):
                if b <= a or b not in comm_nodes:
                    continue
                dq = 2.0 * (between[a][b] / m2 - degsum[a] * degsum[b] / (m2 * m2))
                if dq > best_dq:
                    best, best_dq = (a, b), dq
        if best is None:
            break
        a, b = best
        comm_nodes[a] |= comm_nodes.pop(b)
        degsum[a] += degsum.pop(b)
        for c, w in between.pop(b).items():
            if c == a:
                continue
            between[a][c] += w
            between[c][a] += w
            del between[c][b]
        between[a].pop(b, None)
    assignment = [0] * graph.n
    for c, nodes in comm_nodes.items():
        for v in nodes:
            assignment[v] = c
    return Partition(assignment)


def label_propagation(graph: Graph, seed: int = 0, max_sweeps: int = 100) -> Partition:
    """Asynchronous label propagation in seeded random node order.

    A node adopts the most frequent label among its neighbors; frequency ties
    are broken uniformly at random from the same seeded stream.  Stops after a
    sweep with no label change, or after max_sweeps."""
    if graph.m < 1:
        raise ValueError("label propagation needs at least one edge")
    rng = random.Random(seed)
    labels = list(range(graph.n))
    for _ in range(max_sweeps):
        order = list(range(graph.n))
        rng.shuffle(order)
        changed = False
        for v in order:
            if not graph.adj[v]:
                continue
            counts = Counter(labels[u] for u in graph.adj[v])
            top = max(counts.values())
            winners = sorted(lab for lab, c in counts.items() if c == top)
            new = winners[0] if len(winners) == 1 else rng.choice(winners)
            if new != labels[v]:
                labels[v] = new
                changed = True
        if not changed:
            break
    return Partition(labels)
