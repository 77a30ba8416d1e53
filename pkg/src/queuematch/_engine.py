"""Compiled slot loop for Monte Carlo replications.

The exogenous randomness (connectivity, arrivals, service successes and
the heuristic's server orders) is pre-sampled into arrays from the same
streams the per-slot samplers use, then a single JIT-compiled loop plays
the policy against them and records total occupancy per slot.  The loop
reuses the exact assignment solver from ``_assignment``, so its matching
decisions are identical to the plain-Python policy path; the test suite
pins that equivalence trajectory-by-trajectory.
"""

from __future__ import annotations

import numpy as np

from ._assignment import _jit, solve_into
from .core import ArrivalKind, BINOMIAL_TRIALS, StochasticConfig, make_streams
from .policies import PolicyKind

POLICY_IDS = {PolicyKind.MWM: 0, PolicyKind.MM: 1, PolicyKind.HEURISTIC: 2}


@_jit
def _run_slots(x0, conn, arrivals, service, orders, policy_id, totals):
    horizon, n, k = conn.shape
    size = max(n, k)
    x = x0.copy()
    w = np.zeros((size, size), np.int64)
    u = np.empty(size, np.int64)
    v = np.empty(size, np.int64)
    col_of_row = np.empty(size, np.int64)
    row_of_col = np.empty(size, np.int64)
    shortest = np.empty(size, np.int64)
    path = np.empty(size, np.int64)
    in_rows = np.empty(size, np.bool_)
    in_cols = np.empty(size, np.bool_)
    for t in range(horizon):
        if policy_id == 0 or policy_id == 1:
            for i in range(n):
                for j in range(k):
                    if conn[t, i, j] == 1:
                        w[i, j] = x[i] if policy_id == 0 else 1
                    else:
                        w[i, j] = 0
            solve_into(
                w, u, v, col_of_row, row_of_col, shortest, path, in_rows, in_cols
            )
            for i in range(n):
                j = col_of_row[i]
                if j < k and conn[t, i, j] == 1 and service[t, i, j] == 1 and x[i] > 0:
                    x[i] -= 1
        else:
            taken = np.zeros(n, np.bool_)
            assigned = 0
            for idx in range(k):
                if assigned == n:
                    break
                j = orders[t, idx]
                best = -1
                best_weight = np.int64(-1)
                for i in range(n):
                    if not taken[i]:
                        weight = np.int64(conn[t, i, j]) * x[i]
                        if weight > best_weight:
                            best_weight = weight
                            best = i
                taken[best] = True
                assigned += 1
                if conn[t, best, j] == 1 and service[t, best, j] == 1 and x[best] > 0:
                    x[best] -= 1
        total = np.int64(0)
        for i in range(n):
            x[i] += arrivals[t, i]
            total += x[i]
        totals[t] = total
    return totals


def sample_exogenous(
    cfg: StochasticConfig,
    horizon: int,
    seed: int,
    need_orders: bool,
    policy_seed: int | None = None,
):
    """Pre-sample the whole run's randomness from the per-stream generators.

    Block shapes consume the underlying bit streams in the same order as
    repeated single-slot draws, so a slot-by-slot replay with the core
    samplers sees identical realizations.
    """
    streams = make_streams(seed, policy_seed)
    n, k = cfg.n_queues, cfg.n_servers
    conn = (streams.connectivity.random((horizon, n, k)) < cfg.connectivity_p).astype(
        np.int8
    )
    if cfg.arrival_kind is ArrivalKind.BERNOULLI:
        arrivals = (streams.arrivals.random((horizon, n)) < cfg.arrival_rate).astype(
            np.int64
        )
    else:
        arrivals = streams.arrivals.binomial(
            BINOMIAL_TRIALS, cfg.arrival_rate / BINOMIAL_TRIALS, (horizon, n)
        ).astype(np.int64)
    service = (streams.service.random((horizon, n, k)) < cfg.service_q).astype(np.int8)
    if need_orders:
        orders = np.argsort(streams.policy.random((horizon, k)), axis=1).astype(
            np.int64
        )
    else:
        orders = np.zeros((horizon, 0), dtype=np.int64)
    return conn, arrivals, service, orders


def run_trajectory(
    cfg: StochasticConfig,
    policy: PolicyKind,
    horizon: int,
    seed: int,
    policy_seed: int | None = None,
) -> np.ndarray:
    """Total occupancy after each slot of one replication (int64[horizon])."""
    policy = PolicyKind(policy)
    conn, arrivals, service, orders = sample_exogenous(
        cfg, horizon, seed, policy is PolicyKind.HEURISTIC, policy_seed
    )
    x0 = np.zeros(cfg.n_queues, dtype=np.int64)
    totals = np.empty(horizon, dtype=np.int64)
    _run_slots(x0, conn, arrivals, service, orders, POLICY_IDS[policy], totals)
    return totals
