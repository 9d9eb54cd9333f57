"""Simple undirected graphs and the structural primitives the attacks rely on.

A graph is immutable once built.  Node pairs are always stored as (u, v) with
u < v, and the lexicographic order over pairs induces canonical integer IDs
for existing links and for candidate (non-existing) links, which the genetic
operators use as gene values.
"""

from __future__ import annotations

import random
import re
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphFormatError, InvalidPerturbationError


def _norm_pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple undirected graph on nodes 0..n-1."""

    __slots__ = ("n", "edges", "adj", "m")

    def __init__(self, n: int, edges):
        if n <= 0:
            raise GraphFormatError("graph must have at least one node")
        adj: list[set[int]] = [set() for _ in range(n)]
        norm = set()
        for u, v in edges:
            if u == v:
                continue
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) outside node range 0..{n - 1}")
            norm.add(_norm_pair(u, v))
        for u, v in norm:
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self.edges = frozenset(norm)
        self.adj = tuple(frozenset(s) for s in adj)
        self.m = len(norm)

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_pair(u, v) in self.edges

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        return [len(s) for s in self.adj]

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adj[v]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Perturbation:
    """A set of link additions and deletions relative to some base graph."""

    additions: frozenset[tuple[int, int]]
    deletions: frozenset[tuple[int, int]]

    @staticmethod
    def of(additions, deletions) -> "Perturbation":
        return Perturbation(
            frozenset(_norm_pair(*p) for p in additions),
            frozenset(_norm_pair(*p) for p in deletions),
        )

    @property
    def budget(self) -> int:
        return max(len(self.additions), len(self.deletions))


def apply_perturbation(graph: Graph, pert: Perturbation) -> Graph:
    """Return the rewired graph; node set and (for |E+|=|E-|) edge count are kept."""
    for p in pert.additions:
        if p in graph.edges:
            raise InvalidPerturbationError(f"cannot add existing edge {p}")
    for p in pert.deletions:
        if p not in graph.edges:
            raise InvalidPerturbationError(f"cannot delete missing edge {p}")
    if pert.additions & pert.deletions:
        raise InvalidPerturbationError("additions and deletions overlap")
    return Graph(graph.n, (graph.edges | pert.additions) - pert.deletions)


class LinkIndexSpace:
    """Canonical bijections pair <-> integer ID, kept separate for existing
    links and candidate links.

    Pair ranks follow lexicographic order on (u, v) with u < v; the edge space
    enumerates edges in rank order and the non-edge space enumerates the
    remaining pairs in rank order.  Non-edge lookups are arithmetic on the
    sorted edge-rank table, so the space stays O(m) in memory.
    """

    def __init__(self, graph: Graph):
        self.n = graph.n
        self._edge_ranks = sorted(self._rank(u, v) for u, v in graph.edges)
        self._rank_to_eid = {r: i for i, r in enumerate(self._edge_ranks)}
        self.num_edges = graph.m
        self.num_nonedges = self.n * (self.n - 1) // 2 - graph.m

    def _rank(self, u: int, v: int) -> int:
        # position of (u, v), u < v, in lexicographic order over all pairs
        return u * self.n - u * (u + 1) // 2 + (v - u - 1)

    def _unrank(self, r: int) -> tuple[int, int]:
        u = 0
        # row u holds n-1-u pairs
        while r >= self.n - 1 - u:
            r -= self.n - 1 - u
            u += 1
        return (u, u + 1 + r)

    def edge_id(self, u: int, v: int) -> int:
        return self._rank_to_eid[self._rank(*_norm_pair(u, v))]

    def edge_pair(self, eid: int) -> tuple[int, int]:
        return self._unrank(self._edge_ranks[eid])

    def nonedge_id(self, u: int, v: int) -> int:
        r = self._rank(*_norm_pair(u, v))
        if r in self._rank_to_eid:
            raise KeyError(f"({u}, {v}) is an edge, not a non-edge")
        return r - bisect_right(self._edge_ranks, r)

    def nonedge_pair(self, nid: int) -> tuple[int, int]:
        if not 0 <= nid < self.num_nonedges:
            raise KeyError(f"non-edge ID {nid} out of range")
        # smallest rank r with (r+1) - #edge-ranks<=r == nid+1
        lo, hi = 0, self.n * (self.n - 1) // 2 - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if (mid + 1) - bisect_right(self._edge_ranks, mid) >= nid + 1:
                hi = mid
            else:
                lo = mid + 1
        return self._unrank(lo)


def index_bijection(graph: Graph) -> LinkIndexSpace:
    return LinkIndexSpace(graph)


# ---------------------------------------------------------------------------
# loaders and generator
# ---------------------------------------------------------------------------

def _relabel(raw_edges: list[tuple[str, str]]) -> tuple[int, dict[str, int]]:
    labels = {lab for e in raw_edges for lab in e}
    try:
        order = sorted(labels, key=lambda s: int(s))
    except ValueError:
        order = sorted(labels)
    return len(order), {lab: i for i, lab in enumerate(order)}


def load_edge_list(path) -> Graph:
    """Read a whitespace-separated edge list; '#' starts a comment line.

    Labels may be arbitrary strings and are mapped to dense IDs in sorted
    order (numeric when all labels are integers).  Self-loops and duplicate
    edges are dropped; isolated nodes cannot occur since only endpoints of
    edges are materialized.
    """
    raw: list[tuple[str, str]] = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{ln}: expected two endpoints, got {len(parts)}")
            raw.append((parts[0], parts[1]))
    raw = [e for e in raw if e[0] != e[1]]
    if not raw:
        raise GraphFormatError(f"{path}: no edges found")
    n, mapping = _relabel(raw)
    return Graph(n, ((mapping[a], mapping[b]) for a, b in raw))


_GML_TOKEN = re.compile(r'"[^"]*"|\[|\]|[^\s\[\]]+')


def load_gml(path):
    """Read the GML subset ``graph [ node [ id .. label .. value .. ] edge [ source .. target .. ] ]``.

    Returns (Graph, labels) where labels maps dense node ID to the node's
    ``value`` attribute (ground-truth community) or None when absent.
    """
    with open(path) as fh:
        tokens = _GML_TOKEN.findall(fh.read())
    nodes: list[tuple[int, object]] = []
    raw_edges: list[tuple[int, int]] = []
    i = 0

    def parse_block(kind: str, i: int):
        attrs = {}
        if i >= len(tokens) or tokens[i] != "[":
            raise GraphFormatError(f"{path}: malformed {kind} block")
        depth, i = 1, i + 1
        key = None
        while i < len(tokens) and depth > 0:
            tok = tokens[i]
            if tok == "[":
                depth += 1
                key = None
            elif tok == "]":
                depth -= 1
            elif key is None:
                key = tok
            else:
                if depth == 1:
                    attrs[key] = tok.strip('"')
                key = None
            i += 1
        return attrs, i

    while i < len(tokens):
        tok = tokens[i]
        if tok == "node":
            attrs, i = parse_block("node", i + 1)
            if "id" not in attrs:
                raise GraphFormatError(f"{path}: node block without id")
            nodes.append((int(attrs["id"]), attrs.get("value")))
        elif tok == "edge":
            attrs, i = parse_block("edge", i + 1)
            if "source" not in attrs or "target" not in attrs:
                raise GraphFormatError(f"{path}: edge block without endpoints")
            raw_edges.append((int(attrs["source"]), int(attrs["target"])))
        else:
            i += 1
    if not nodes or not raw_edges:
        raise GraphFormatError(f"{path}: empty GML graph")
    # drop nodes isolated after self-loop/duplicate removal
    touched = {u for e in raw_edges if e[0] != e[1] for u in e}
    kept = sorted(gid for gid, _ in nodes if gid in touched)
    mapping = {gid: i for i, gid in enumerate(kept)}
    values = dict(nodes)
    graph = Graph(len(kept), ((mapping[a], mapping[b]) for a, b in raw_edges if a != b))
    labels = [values[gid] for gid in kept]
    return graph, (labels if any(v is not None for v in labels) else None)


def load_graph(path, fmt: str):
    """Load a graph plus optional ground-truth labels. fmt is 'edgelist' or 'gml'."""
    if fmt == "edgelist":
        return load_edge_list(path), None
    if fmt == "gml":
        return load_gml(path)
    raise GraphFormatError(f"unknown graph format {fmt!r}")


def generate_planted_partition(sizes, p_in: float, p_out: float, seed: int,
                               max_attempts: int = 100):
    """Planted-partition random graph with the given community sizes.

    Intra-community pairs become edges with probability p_in, inter pairs with
    p_out.  Draws are retried (same seeded stream) until no node is isolated.
    Returns (Graph, ground-truth assignment list).
    """
    from .detection import Partition

    sizes = list(sizes)
    if not sizes or any(s <= 0 for s in sizes):
        raise ValueError("sizes must be a nonempty list of positive counts")
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise ValueError("need 0 <= p_out <= p_in <= 1")
    n = sum(sizes)
    block = []
    for b, s in enumerate(sizes):
        block.extend([b] * s)
    rng = random.Random(seed)
    for _ in range(max_attempts):
        edges = []
        for u in range(n):
            for v in range(u + 1, n):
                p = p_in if block[u] == block[v] else p_out
                if rng.random() < p:
                    edges.append((u, v))
        graph = Graph(n, edges)
        if all(graph.degree(v) > 0 for v in range(n)):
            return graph, Partition.from_assignment(block)
    raise ValueError(f"could not draw an isolate-free graph in {max_attempts} attempts")


# ---------------------------------------------------------------------------
# structural primitives
# ---------------------------------------------------------------------------

def all_pairs_distances(graph: Graph) -> np.ndarray:
    """BFS hop distances; disconnected pairs get the sentinel value n."""
    n = graph.n
    dist = np.full((n, n), n, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            dv = dist[s, v]
            for u in graph.adj[v]:
                if dist[s, u] == n and u != s:
                    dist[s, u] = dv + 1
                    queue.append(u)
    return dist


def edge_betweenness(graph: Graph) -> dict[tuple[int, int], float]:
    """Shortest-path edge betweenness over unordered node pairs (endpoints
    included); pairs in different components contribute nothing."""
    cb = {e: 0.0 for e in graph.edges}
    n = graph.n
    for s in range(n):
        # single-source shortest paths (Brandes)
        sigma = [0.0] * n
        dist = [-1] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma[s] = 1.0
        dist[s] = 0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for u in graph.adj[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
                if dist[u] == dist[v] + 1:
                    sigma[u] += sigma[v]
                    preds[u].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                c = sigma[v] / sigma[w] * (1.0 + delta[w])
                cb[_norm_pair(v, w)] += c
                delta[v] += c
    for e in cb:
        cb[e] /= 2.0
    return cb
