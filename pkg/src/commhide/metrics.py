"""Attack-effect and clustering-evaluation metrics.

Entropy terms use base-2 logs with the 0*log(0) = 0 convention; NMI is
log-base invariant and uses natural logs internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .detection import Partition
from .graph import Graph


def _xlog2x(p: float) -> float:
    return p * math.log2(p) if p > 0.0 else 0.0


@dataclass(frozen=True)
class ConfusionMatrix:
    """Overlap counts between two partitions: counts[i][j] = |rows_i ∩ cols_j|."""

    counts: tuple[tuple[int, ...], ...]
    n: int

    @property
    def n_rows(self) -> int:
        return len(self.counts)

    @property
    def n_cols(self) -> int:
        return len(self.counts[0])

    def row_sums(self) -> list[int]:
        return [sum(row) for row in self.counts]

    def col_sums(self) -> list[int]:
        return [sum(col) for col in zip(*self.counts)]


def confusion(rows: Partition, cols: Partition) -> ConfusionMatrix:
    """Confusion matrix between two partitions of the same node set."""
    if rows.n != cols.n:
        raise ValueError("partitions cover different node sets")
    counts = tuple(
        tuple(len(r & c) for c in cols.communities) for r in rows.communities
    )
    return ConfusionMatrix(counts, rows.n)


def global_entropies(matrix: ConfusionMatrix) -> tuple[float, float]:
    """Row and column mixing entropies of a confusion matrix.

    With rows indexing communities after the attack and columns communities
    before it, the row entropy measures how mixed each new community is and
    lies in [0, log2 n_cols]; the column entropy is symmetric with bound
    log2 n_rows."""
    n = matrix.n
    e_rows = 0.0
    for row, rs in zip(matrix.counts, matrix.row_sums()):
        if rs == 0:
            continue
        e_rows -= rs / n * sum(_xlog2x(x / rs) for x in row)
    e_cols = 0.0
    for col in zip(*matrix.counts):
        cs = sum(col)
        if cs == 0:
            continue
        e_cols -= cs / n * sum(_xlog2x(x / cs) for x in col)
    return e_rows, e_cols


@dataclass(frozen=True)
class TargetConfusion:
    """Per detected community: members from the target community vs the rest."""

    from_target: tuple[int, ...]   # m_i
    sizes: tuple[int, ...]         # M_i. = community sizes after the attack

    def __post_init__(self):
        if len(self.from_target) != len(self.sizes):
            raise ValueError("mismatched lengths")
        if any(m > s for m, s in zip(self.from_target, self.sizes)):
            raise ValueError("target overlap exceeds community size")

    @property
    def target_size(self) -> int:
        return sum(self.from_target)


def target_confusion(target: frozenset[int], detected: Partition) -> TargetConfusion:
    return TargetConfusion(
        tuple(len(c & target) for c in detected.communities),
        tuple(len(c) for c in detected.communities),
    )


def target_entropies(tc: TargetConfusion, n: int) -> tuple[float, float]:
    """Entropies for a single hidden community.

    The row term (in [0, 1]) measures how mixed each new community is between
    target and non-target members; the column term (in [0, log2 of the number
    of new communities]) measures how widely the target is scattered."""
    t = tc.target_size
    if t == 0:
        raise ValueError("target community is empty")
    e_r = 0.0
    e_c = 0.0
    for m_i, size in zip(tc.from_target, tc.sizes):
        if size == 0:
            continue
        e_r -= size / n * (_xlog2x(m_i / size) + _xlog2x((size - m_i) / size))
        e_c -= _xlog2x(m_i / t)
    return e_r, e_c


def degree_distance(before: list[int], after: list[int]) -> float:
    """Quarter of the L1 distance between degree sequences; at most the budget."""
    if len(before) != len(after):
        raise ValueError("degree sequences have different lengths")
    return 0.25 * sum(abs(a - b) for a, b in zip(before, after))


def attenuation(d_prime: float, c: float) -> float:
    """Exponential concealment penalty exp(-c * d') on normalized degree change."""
    if c <= 0.0:
        raise ValueError("attenuation factor must be positive")
    return math.exp(-c * d_prime)


def nmi(x: Partition, y: Partition) -> float:
    """Normalized mutual information (sum normalization) between two partitions.

    Degenerate corners: both single-community -> 1; exactly one -> 0."""
    if x.n != y.n:
        raise ValueError("partitions cover different node sets")
    if x == y:
        return 1.0
    if x.k == 1 or y.k == 1:
        return 0.0
    n = x.n
    mat = confusion(x, y)
    rows, cols = mat.row_sums(), mat.col_sums()
    num = 0.0
    for i, row in enumerate(mat.counts):
        for j, mij in enumerate(row):
            if mij > 0:
                num -= 2.0 * mij * math.log(mij * n / (rows[i] * cols[j]))
    den = sum(r * math.log(r / n) for r in rows) + sum(c * math.log(c / n) for c in cols)
    return num / den


def ari(x: Partition, y: Partition) -> float:
    """Adjusted Rand index via pair counting.

    When the correction denominator vanishes (both partitions all-singletons
    or both single-community) the value is 1 for equal partitions, else 0."""
    if x.n != y.n:
        raise ValueError("partitions cover different node sets")
    if x.n < 2:
        raise ValueError("need at least two nodes")

    def c2(v: int) -> float:
        return v * (v - 1) / 2.0

    mat = confusion(x, y)
    index = sum(c2(mij) for row in mat.counts for mij in row)
    a = sum(c2(r) for r in mat.row_sums())
    b = sum(c2(c) for c in mat.col_sums())
    expected = a * b / c2(x.n)
    maximum = 0.5 * (a + b)
    if abs(maximum - expected) < 1e-12:
        return 1.0 if x == y else 0.0
    return (index - expected) / (maximum - expected)


def deception_score(target: frozenset[int], detected: Partition, adversarial: Graph) -> float:
    """How well a community is hidden: a reachability factor on the target's
    induced subgraph times a precision/recall dispersion factor over the
    detected communities that intersect the target."""
    if len(target) < 2:
        raise ValueError("target community needs at least two nodes")
    # connected components of the induced subgraph
    remaining = set(target)
    n_comp = 0
    while remaining:
        n_comp += 1
        stack = [remaining.pop()]
        while stack:
            v = stack.pop()
            for u in adversarial.adj[v]:
                if u in remaining:
                    remaining.remove(u)
                    stack.append(u)
    reach = 1.0 - (n_comp - 1) / (len(target) - 1)
    precisions = []
    recalls = []
    for comm in detected.communities:
        overlap = len(comm & target)
        if overlap == 0:
            continue
        precisions.append(overlap / len(comm))
        recalls.append(overlap / len(target))
    spread = 0.5 * (1.0 - max(recalls)) + 0.5 * (1.0 - sum(precisions) / len(precisions))
    return reach * spread
