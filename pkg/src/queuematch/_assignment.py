"""Exact maximum-weight assignment for small dense integer matrices.

The solver below is the shortest-augmenting-path (Jonker-Volgenant style)
algorithm on the equivalent min-cost problem.  All arithmetic is int64, so
results are exact for the integer weights used throughout this package
(queue lengths times binary connectivity).  The same function is called
from plain Python by the matching module and from inside the compiled
simulation loop, so both paths share one tie-breaking behaviour.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    def _jit(fn):
        return njit(cache=True)(fn)

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    def _jit(fn):
        return fn

    NUMBA_AVAILABLE = False


@_jit
def solve_into(weights, u, v, col_of_row, row_of_col, shortest, path, in_rows, in_cols):
    """Workspace variant of the solver; all arrays are length/size n.

    Fills ``col_of_row`` with the maximizing permutation.  The inner loop
    allocates nothing, so the simulation engine can call it per slot.
    """
    n = weights.shape[0]
    inf = np.int64(2) ** np.int64(62)

    # Minimize cost = wmax - w over perfect assignments; the dual updates
    # below only ever add and subtract entries, so integers stay exact.
    wmax = np.int64(0)
    for i in range(n):
        for j in range(n):
            if weights[i, j] > wmax:
                wmax = weights[i, j]

    for i in range(n):
        u[i] = 0
        v[i] = 0
        col_of_row[i] = -1
        row_of_col[i] = -1

    for cur_row in range(n):
        for j in range(n):
            shortest[j] = inf
            path[j] = -1
            in_rows[j] = False
            in_cols[j] = False

        min_val = np.int64(0)
        i = cur_row
        sink = -1
        while sink == -1:
            in_rows[i] = True
            index = -1
            lowest = inf
            for j in range(n):
                if not in_cols[j]:
                    r = min_val + (wmax - weights[i, j]) - u[i] - v[j]
                    if r < shortest[j]:
                        path[j] = i
                        shortest[j] = r
                    if shortest[j] < lowest or (
                        shortest[j] == lowest and row_of_col[j] == -1
                    ):
                        lowest = shortest[j]
                        index = j
            min_val = lowest
            j = index
            in_cols[j] = True
            if row_of_col[j] == -1:
                sink = j
            else:
                i = row_of_col[j]

        u[cur_row] += min_val
        for ip in range(n):
            if in_rows[ip] and ip != cur_row:
                u[ip] += min_val - shortest[col_of_row[ip]]
        for jp in range(n):
            if in_cols[jp]:
                v[jp] -= min_val - shortest[jp]

        j = sink
        while True:
            i = path[j]
            row_of_col[j] = i
            j, col_of_row[i] = col_of_row[i], j
            if i == cur_row:
                break


@_jit
def solve_max_weight_square(weights):
    """Return ``col_of_row`` maximizing total weight of a square int64 matrix.

    The result is a permutation: row ``i`` is assigned column
    ``col_of_row[i]``.  Every row is assigned (callers strip zero-weight
    pairs).  Deterministic for a fixed input: candidate columns are scanned
    in ascending index order and ties prefer an unassigned column.
    """
    n = weights.shape[0]
    u = np.empty(n, np.int64)
    v = np.empty(n, np.int64)
    col_of_row = np.empty(n, np.int64)
    row_of_col = np.empty(n, np.int64)
    shortest = np.empty(n, np.int64)
    path = np.empty(n, np.int64)
    in_rows = np.empty(n, np.bool_)
    in_cols = np.empty(n, np.bool_)
    solve_into(weights, u, v, col_of_row, row_of_col, shortest, path, in_rows, in_cols)
    return col_of_row


def pad_square(weights: np.ndarray) -> np.ndarray:
    """Embed an N x K int64 weight matrix in an S x S matrix of zeros."""
    n, k = weights.shape
    size = max(n, k)
    if n == k:
        return np.ascontiguousarray(weights, dtype=np.int64)
    padded = np.zeros((size, size), np.int64)
    padded[:n, :k] = weights
    return padded
