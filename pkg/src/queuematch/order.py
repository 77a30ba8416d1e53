"""Vector relations generating the balancing partial order, plus costs.

Three one-step relations compare a candidate vector against an original:
elementwise reduction (D1), a two-element swap (D2) and a unit transfer
from a longer to a shorter entry (D3).  Identical vectors get their own
EQUAL tag: the reduction relation admits equality, but downstream case
dispatch (coupling) needs to tell "unchanged" apart from "strictly
reduced somewhere", so the tag is kept separate rather than folded into D1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import as_queue_vector


class RelationTag(Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    EQUAL = "equal"
    UNRELATED = "unrelated"


@dataclass(frozen=True)
class RelationKind:
    tag: RelationTag
    pair: tuple[int, int] | None = None

    def __post_init__(self):
        if self.tag in (RelationTag.D2, RelationTag.D3) and self.pair is None:
            raise ValueError(f"{self.tag.value} requires an index pair")


class ClosureBudgetExceeded(RuntimeError):
    """Raised when the breadth-first closure search runs out of expansions."""


def _is_reduction(x_new: np.ndarray, x_orig: np.ndarray) -> bool:
    return bool(np.all(x_new <= x_orig)) and bool(np.any(x_new < x_orig))


def _two_swap_pair(x_new: np.ndarray, x_orig: np.ndarray) -> tuple[int, int] | None:
    diff = np.flatnonzero(x_new != x_orig)
    if diff.size != 2:
        return None
    n, m = int(diff[0]), int(diff[1])
    if x_new[n] == x_orig[m] and x_new[m] == x_orig[n]:
        return (n, m)
    return None


def _interchange_pair(x_new: np.ndarray, x_orig: np.ndarray) -> tuple[int, int] | None:
    diff = np.flatnonzero(x_new != x_orig)
    if diff.size != 2:
        return None
    a, b = int(diff[0]), int(diff[1])
    # n is the entry raised by one, m the entry lowered by one.
    if x_new[a] == x_orig[a] + 1 and x_new[b] == x_orig[b] - 1:
        n, m = a, b
    elif x_new[b] == x_orig[b] + 1 and x_new[a] == x_orig[a] - 1:
        n, m = b, a
    else:
        return None
    if x_orig[n] < x_new[n] <= x_new[m] < x_orig[m]:
        return (n, m)
    return None


def relation(x_new, x_orig) -> RelationKind:
    """Classify ``x_new`` against ``x_orig`` as one of the one-step relations.

    The three non-trivial relations are mutually exclusive, so the checks
    can run in any order; EQUAL is reported before D1 since the reduction
    test here requires a strict drop somewhere.
    """
    x_new = as_queue_vector(x_new)
    x_orig = as_queue_vector(x_orig)
    if x_new.shape != x_orig.shape:
        raise ValueError("dimension mismatch")
    if np.array_equal(x_new, x_orig):
        return RelationKind(RelationTag.EQUAL)
    if _is_reduction(x_new, x_orig):
        return RelationKind(RelationTag.D1)
    pair = _two_swap_pair(x_new, x_orig)
    if pair is not None:
        return RelationKind(RelationTag.D2, pair)
    pair = _interchange_pair(x_new, x_orig)
    if pair is not None:
        return RelationKind(RelationTag.D3, pair)
    return RelationKind(RelationTag.UNRELATED)


def equal_in_permutation(a, b) -> bool:
    """True when the two vectors hold the same multiset of entries."""
    a = as_queue_vector(a)
    b = as_queue_vector(b)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    return bool(np.array_equal(np.sort(a), np.sort(b)))


def precedes_p(x_new, x_orig, budget: int = 200_000) -> bool:
    """Breadth-first test of the transitive closure of the one-step relations.

    Explores single-unit reductions, two-element swaps and balancing
    interchanges from ``x_orig``.  A test oracle only: the state space
    grows quickly, hence the expansion budget.
    """
    x_new = as_queue_vector(x_new)
    x_orig = as_queue_vector(x_orig)
    if x_new.shape != x_orig.shape:
        raise ValueError("dimension mismatch")
    target = tuple(int(v) for v in x_new)
    start = tuple(int(v) for v in x_orig)
    if target == start:
        return True
    if sum(target) > sum(start):
        return False

    seen = {start}
    frontier = [start]
    expansions = 0
    size = len(start)
    while frontier:
        nxt: list[tuple[int, ...]] = []
        for state in frontier:
            expansions += 1
            if expansions > budget:
                raise ClosureBudgetExceeded(
                    f"closure search exceeded {budget} expansions"
                )
            for child in _closure_moves(state, size):
                if child == target:
                    return True
                if child not in seen:
                    seen.add(child)
                    nxt.append(child)
        frontier = nxt
    return False


def _closure_moves(state: tuple[int, ...], size: int):
    # Unit reductions.
    for i in range(size):
        if state[i] > 0:
            yield state[:i] + (state[i] - 1,) + state[i + 1 :]
    for i in range(size):
        for j in range(i + 1, size):
            if state[i] != state[j]:
                # Swap of two distinct elements.
                s = list(state)
                s[i], s[j] = s[j], s[i]
                yield tuple(s)
                # Balancing interchange: move one unit long -> short when
                # they stay ordered afterwards.
                lo, hi = (i, j) if state[i] < state[j] else (j, i)
                if state[lo] + 1 <= state[hi] - 1:
                    s = list(state)
                    s[lo] += 1
                    s[hi] -= 1
                    yield tuple(s)


def cost_total(x) -> int:
    """Total occupancy, the canonical monotone cost."""
    return int(as_queue_vector(x).sum())


def cost_max(x) -> int:
    """Longest queue, another monotone cost under the partial order."""
    return int(as_queue_vector(x).max())
