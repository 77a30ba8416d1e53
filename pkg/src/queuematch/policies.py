"""Causal server-assignment policies.

Each policy sees only the previous slot's queue lengths and the current
connectivity, never the slot's arrivals or service outcomes; the signature
enforces that.  Three policies ship: backlog-weighted optimal matching,
connectivity-only maximum matching, and a randomized greedy that assigns
servers one by one (in random order) to their longest connected queue.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .core import as_connectivity, as_matching, as_queue_vector
from .matching import (
    max_cardinality_matching,
    max_weight_matching,
    mw_index,
    weight_matrix,
)


class PolicyKind(str, Enum):
    MWM = "mwm"
    MM = "mm"
    HEURISTIC = "heuristic"


def heuristic_from_order(x_prev, c, order) -> np.ndarray:
    """Greedy assignment given an explicit server visiting order.

    Each visited server takes the remaining queue maximizing backlog times
    connectivity (lowest index on ties).  While any queue remains the
    server is recorded as assigned even when every remaining weight is
    zero; such an edge serves nothing and is harmless downstream.
    """
    x_prev = as_queue_vector(x_prev)
    c = as_connectivity(c)
    if c.shape[0] != x_prev.shape[0]:
        raise ValueError("dimension mismatch")
    n, k = c.shape
    order = np.asarray(order, dtype=np.int64)
    if sorted(order.tolist()) != list(range(k)):
        raise ValueError("order must be a permutation of the servers")
    m = np.zeros((n, k), dtype=np.int8)
    remaining = np.ones(n, dtype=bool)
    for server in order:
        if not remaining.any():
            break
        weights = np.where(remaining, c[:, server] * x_prev, -1)
        queue = int(np.argmax(weights))
        m[queue, server] = 1
        remaining[queue] = False
    return m


def decide(
    kind: PolicyKind,
    x_prev,
    c,
    policy_rng: np.random.Generator | None = None,
) -> np.ndarray:
    """The matching a policy employs for one slot.

    Only the heuristic consumes ``policy_rng`` (for its server order), so
    exogenous randomness is untouched by the choice of policy.
    """
    kind = PolicyKind(kind)
    if kind is PolicyKind.MWM:
        return max_weight_matching(weight_matrix(x_prev, c))
    if kind is PolicyKind.MM:
        return max_cardinality_matching(c)
    if policy_rng is None:
        raise ValueError("the heuristic policy requires a policy rng")
    c = as_connectivity(c)
    return heuristic_from_order(x_prev, c, policy_rng.permutation(c.shape[1]))


def is_mwm_decision(x_prev, c, m) -> bool:
    """True when ``m`` serves as much backlog as an optimal matching."""
    x_prev = as_queue_vector(x_prev)
    c = as_connectivity(c)
    m = as_matching(m)
    w = weight_matrix(x_prev, c)
    best = max_weight_matching(w)
    return mw_index(x_prev, c, m) == int((w * best).sum())
