"""Balancing server reallocations found through a union digraph of matchings.

A reallocation replaces the slot's matching with one whose post-service
queue vector either drops elementwise with at least one strict drop (C1)
or performs a single unit transfer from a longer queue to a shorter one
(C2).  Such a replacement exists exactly when the current matching does
not already maximize the served backlog, and the constructive search
below locates one:

1. Pad the weight matrix to a complete S x S graph (S = N + K) with
   zero-weight edges and extend both the candidate matching and one
   maximum-weight matching to perfect matchings (permutations).  The
   padding is one dummy partner per real vertex so that any partial
   matching extends across zero-weight edges only, keeping its weight.
2. Orient candidate edges queue -> server with weight +x_n c_nk and
   optimal edges server -> queue with the negated weight.  Every vertex
   then has in- and out-degree one, so the union splits into even cycles
   whose weights sum to (candidate weight - optimal weight).
3. A suboptimal candidate forces a negative cycle.  On it, classify each
   queue's (incoming, outgoing) weight pair: T0 nets zero, T1 means the
   optimal matching serves backlog there that the candidate wastes, T2
   the reverse.  Rewiring a short arc around a T1 pair yields the
   desired reallocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._assignment import solve_max_weight_square
from .core import as_connectivity, as_matching, as_queue_vector
from .matching import mw_index, weight_matrix


class ConditionTag(Enum):
    C1 = "C1"
    C2 = "C2"


@dataclass(frozen=True)
class ReallocationKind:
    tag: ConditionTag
    pair: tuple[int, int] | None = None

    def __post_init__(self):
        if self.tag is ConditionTag.C2:
            if self.pair is None or self.pair[0] == self.pair[1]:
                raise ValueError("C2 carries two distinct queue indices")


class PairType(Enum):
    T0 = 0
    T1 = 1
    T2 = 2


@dataclass(frozen=True)
class CyclePair:
    """One queue vertex on a cycle with its incoming and outgoing edges.

    ``server_in`` carries the optimal matching's edge (stored with its
    positive weight), ``server_out`` the candidate's edge.
    """

    queue: int
    server_in: int
    server_out: int
    weight_in: int
    weight_out: int
    kind: PairType


@dataclass(frozen=True)
class Cycle:
    pairs: tuple[CyclePair, ...]

    @property
    def weight(self) -> int:
        return sum(p.weight_out - p.weight_in for p in self.pairs)


@dataclass(frozen=True)
class UnionCycleGraph:
    size: int
    weights: np.ndarray
    candidate: np.ndarray
    optimal: np.ndarray
    cycles: tuple[Cycle, ...]

    @property
    def total_weight(self) -> int:
        return sum(c.weight for c in self.cycles)


def classify_reallocation(x_orig, x_new) -> ReallocationKind | None:
    """Label the pair of post-service vectors as C1, C2 or neither."""
    x_orig = as_queue_vector(x_orig)
    x_new = as_queue_vector(x_new)
    if x_orig.shape != x_new.shape:
        raise ValueError("dimension mismatch")
    if np.all(x_new <= x_orig) and np.any(x_new < x_orig):
        return ReallocationKind(ConditionTag.C1)
    diff = np.flatnonzero(x_new != x_orig)
    if diff.size == 2:
        a, b = int(diff[0]), int(diff[1])
        if x_new[b] == x_orig[b] + 1 and x_new[a] == x_orig[a] - 1:
            a, b = b, a
        if (
            x_new[a] == x_orig[a] + 1
            and x_new[b] == x_orig[b] - 1
            and x_orig[a] < x_new[a] <= x_new[b] < x_orig[b]
        ):
            return ReallocationKind(ConditionTag.C2, (a, b))
    return None


def _perfect_extension(m: np.ndarray, size: int) -> np.ndarray:
    """Extend a matching to a permutation of the padded S x S graph.

    Unmatched real queues take dummy servers (columns >= K) and dummy
    queues take the remaining servers, so every added edge has weight
    zero and the extension leaves the matching's weight unchanged.
    """
    n, k = m.shape
    col_of_row = np.full(size, -1, dtype=np.int64)
    used = np.zeros(size, dtype=bool)
    for row, col in zip(*np.nonzero(m)):
        col_of_row[row] = col
        used[col] = True
    dummy_cols = iter(c for c in range(k, size) if not used[c])
    for row in range(n):
        if col_of_row[row] == -1:
            col = next(dummy_cols)
            col_of_row[row] = col
            used[col] = True
    leftover = iter(c for c in range(size) if not used[c])
    for row in range(n, size):
        col_of_row[row] = next(leftover)
    return col_of_row


def build_union_cycle_graph(x_prev, c, m) -> UnionCycleGraph:
    """Union of the padded candidate matching and one optimal matching."""
    x_prev = as_queue_vector(x_prev)
    c = as_connectivity(c)
    m = as_matching(m)
    if x_prev.shape[0] != c.shape[0] or c.shape != m.shape:
        raise ValueError("dimension mismatch")
    n, k = c.shape
    size = n + k
    weights = np.zeros((size, size), np.int64)
    weights[:n, :k] = weight_matrix(x_prev, c)
    candidate = _perfect_extension(m, size)
    optimal = solve_max_weight_square(weights)

    row_of_col_opt = np.empty(size, dtype=np.int64)
    row_of_col_opt[optimal] = np.arange(size)

    cycles: list[Cycle] = []
    visited = np.zeros(size, dtype=bool)
    for start in range(size):
        if visited[start]:
            continue
        pairs: list[CyclePair] = []
        q = start
        while not visited[q]:
            visited[q] = True
            k_in = int(optimal[q])
            k_out = int(candidate[q])
            w_in = int(weights[q, k_in])
            w_out = int(weights[q, k_out])
            if w_in == w_out:
                kind = PairType.T0
            elif w_out == 0:
                kind = PairType.T1
            else:
                kind = PairType.T2
            pairs.append(CyclePair(q, k_in, k_out, w_in, w_out, kind))
            # Follow the candidate edge to its server, then the optimal
            # edge backwards to the next queue on the cycle.
            q = int(row_of_col_opt[candidate[q]])
        cycles.append(Cycle(tuple(pairs)))
    return UnionCycleGraph(size, weights, candidate, optimal, tuple(cycles))


def _strip_to_matching(col_of_row: np.ndarray, weights: np.ndarray, n: int, k: int) -> np.ndarray:
    """Drop zero-weight pairs and return the matching on the original graph."""
    m = np.zeros((n, k), dtype=np.int8)
    for row in range(n):
        col = int(col_of_row[row])
        if col < k and weights[row, col] > 0:
            m[row, col] = 1
    return m


def _apply_segment_swap(
    candidate: np.ndarray, pairs: tuple[CyclePair, ...], j_prev: int, j: int
) -> np.ndarray:
    """Give every queue from j_prev+1 through j its optimal-side server and
    hand the server freed at j to the queue at j_prev."""
    new = candidate.copy()
    w = len(pairs)
    pos = (j_prev + 1) % w
    while True:
        p = pairs[pos]
        new[p.queue] = p.server_in
        if pos == j:
            break
        pos = (pos + 1) % w
    new[pairs[j_prev].queue] = pairs[j].server_out
    return new


def _rewire_negative_cycle(candidate: np.ndarray, cycle: Cycle) -> np.ndarray | None:
    """Find a rewiring of one negative cycle that yields a C1 or C2 step.

    Scans T1 pairs (ascending queue index).  For each, walk backwards over
    T0 pairs to the first contributing pair:

    - none found (the T1 is the only contributor): swap the whole cycle;
    - a T1: swap the arc between them and bridge the freed server across;
    - a T2 with strictly smaller backlog: same arc swap, the bridge now
      trades one unit from the longer queue to the shorter one;
    - a T2 with equal backlog: that arc nets zero, skip this T1 and try
      the next.  A negative cycle always leaves some T1 whose walk ends
      in one of the first three shapes, so the scan cannot come up empty.
    """
    pairs = cycle.pairs
    w = len(pairs)
    order = sorted(
        (i for i, p in enumerate(pairs) if p.kind is PairType.T1),
        key=lambda i: pairs[i].queue,
    )
    for j in order:
        j_prev = None
        pos = (j - 1) % w
        while pos != j:
            if pairs[pos].kind is not PairType.T0:
                j_prev = pos
                break
            pos = (pos - 1) % w
        if j_prev is None:
            # Whole cycle nets the T1's gain: swap every pair.
            new = candidate.copy()
            for p in pairs:
                new[p.queue] = p.server_in
            return new
        prev = pairs[j_prev]
        if prev.kind is PairType.T1:
            return _apply_segment_swap(candidate, pairs, j_prev, j)
        if prev.weight_out < pairs[j].weight_in:
            return _apply_segment_swap(candidate, pairs, j_prev, j)
        if prev.weight_out > pairs[j].weight_in:
            raise RuntimeError(
                "T2 backlog above the paired T1; the reference matching "
                "was not optimal"
            )
        # Equal backlog: zero-net arc, try the next T1.
    return None


def find_balancing_reallocation(x_prev, c, m) -> np.ndarray | None:
    """A matching one balancing step better than ``m``, or None at the top.

    Returns None exactly when ``m`` already attains the maximum served
    backlog.  Otherwise the result's post-service vector relates to
    ``m``'s by C1 or C2 and its served backlog is strictly larger.
    """
    graph = build_union_cycle_graph(x_prev, c, m)
    if graph.total_weight == 0:
        return None
    negative = [cy for cy in graph.cycles if cy.weight < 0]
    # Deterministic choice: the cycle holding the lowest-indexed queue.
    cycle = min(negative, key=lambda cy: min(p.queue for p in cy.pairs))
    new_perm = _rewire_negative_cycle(graph.candidate, cycle)
    if new_perm is None:
        raise RuntimeError("negative cycle without a usable rewiring")
    n, k = np.asarray(m).shape
    return _strip_to_matching(new_perm, graph.weights, n, k)


def distance_to_mwm(x_prev, c, m) -> tuple[int, list[np.ndarray]]:
    """Chain of balancing reallocations from ``m`` up to a maximum-weight one.

    Served backlog strictly increases along the chain and is bounded by
    the optimum, so the loop terminates; the bound below is a defensive
    cap, not a tuning knob.
    """
    x_prev = as_queue_vector(x_prev)
    current = as_matching(m)
    chain = [current]
    cap = int(x_prev.sum()) * min(np.asarray(m).shape) + 2
    for _ in range(cap):
        nxt = find_balancing_reallocation(x_prev, c, current)
        if nxt is None:
            return len(chain) - 1, chain
        if mw_index(x_prev, c, nxt) <= mw_index(x_prev, c, current):
            raise RuntimeError("reallocation failed to increase the served backlog")
        chain.append(nxt)
        current = nxt
    raise RuntimeError("reallocation chain exceeded its termination bound")
