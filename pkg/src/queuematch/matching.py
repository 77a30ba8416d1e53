"""Exact bipartite matchings on the queue-to-server weight graph.

Weights are integers (queue length times binary connectivity), so all
optimality comparisons are exact.  ``enumerate_matchings`` is the brute
force oracle used by the verification suites against the fast solver.
"""

from __future__ import annotations

from math import comb, factorial
from typing import Iterator

import numpy as np

from ._assignment import pad_square, solve_max_weight_square
from .core import as_connectivity, as_matching, as_queue_vector

# Enumeration guard: refuse instances with more matchings than this.
MAX_ENUMERATED_MATCHINGS = 10**7


def weight_matrix(x_prev, c) -> np.ndarray:
    """Edge weights x_n * c_{n,k} of the assignment graph for one slot."""
    x_prev = as_queue_vector(x_prev)
    c = as_connectivity(c)
    if c.shape[0] != x_prev.shape[0]:
        raise ValueError("dimension mismatch between queue vector and connectivity")
    return x_prev[:, None] * c


def mw_index(x_prev, c, m) -> int:
    """Total backlog served by a matching: sum over n of x_n * sum_k c_nk m_nk."""
    x_prev = as_queue_vector(x_prev)
    c = as_connectivity(c)
    m = as_matching(m)
    if not (x_prev.shape[0] == c.shape[0] == m.shape[0]) or c.shape != m.shape:
        raise ValueError("dimension mismatch")
    return int((x_prev[:, None] * c * m).sum())


def max_weight_matching(w) -> np.ndarray:
    """A matching maximizing total weight over all matchings of the graph.

    Deterministic for a fixed input; the tie-break is the solver's
    ascending row/column scan.  Zero-weight edges are dropped from the
    result, so the returned matching touches only edges that contribute.
    """
    w = np.asarray(w, dtype=np.int64)
    if w.ndim != 2:
        raise ValueError("weight matrix must be 2-D")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    n, k = w.shape
    col_of_row = solve_max_weight_square(pad_square(w))
    m = np.zeros((n, k), dtype=np.int8)
    for row in range(n):
        col = col_of_row[row]
        if col < k and w[row, col] > 0:
            m[row, col] = 1
    return m


def max_cardinality_matching(c) -> np.ndarray:
    """Matching with the most connected pairs, ignoring queue lengths."""
    return max_weight_matching(as_connectivity(c))


def matching_count(n: int, k: int) -> int:
    """Number of matchings (including the empty one) of the complete N x K graph."""
    return sum(comb(n, j) * comb(k, j) * factorial(j) for j in range(min(n, k) + 1))


def enumerate_matchings(n: int, k: int) -> Iterator[np.ndarray]:
    """Yield every matching of the complete N x K bipartite graph once.

    Depth-first over rows: each queue is either left unmatched or paired
    with one still-free server.  The first matching yielded is the empty
    one.  Guarded so the enumeration stays desk sized.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    total = matching_count(n, k)
    if total > MAX_ENUMERATED_MATCHINGS:
        raise ValueError(
            f"enumeration guard exceeded: {total} matchings > {MAX_ENUMERATED_MATCHINGS}"
        )

    m = np.zeros((n, k), dtype=np.int8)
    free = np.ones(k, dtype=bool)

    def rec(row: int) -> Iterator[np.ndarray]:
        if row == n:
            yield m.copy()
            return
        yield from rec(row + 1)
        for col in range(k):
            if free[col]:
                m[row, col] = 1
                free[col] = False
                yield from rec(row + 1)
                m[row, col] = 0
                free[col] = True

    return rec(0)


def all_max_weight_matchings(w) -> list[np.ndarray]:
    """Every matching attaining the maximum weight, by full enumeration."""
    w = np.asarray(w, dtype=np.int64)
    best = -1
    winners: list[np.ndarray] = []
    for m in enumerate_matchings(*w.shape):
        value = int((w * m).sum())
        if value > best:
            best = value
            winners = [m]
        elif value == best:
            winners.append(m)
    return winners
