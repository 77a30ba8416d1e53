"""Coupled one-slot constructions that preserve the balancing relations.

Given two systems whose states are related by reduction, swap or unit
transfer, ``couple_step`` produces the shadow system's connectivity,
arrivals and matching for the next slot so that after both systems
advance (under perfect service and Bernoulli arrivals) the states are
again related.  The branch structure is deliberately minimal: anything
outside the enumerated relations is a precondition violation, since this
module is a mechanized check rather than a general-purpose coupler.

Per-branch construction:

- EQUAL or D1: copy connectivity, arrivals and matching unchanged.
- D2 on (n, m): swap rows n and m of all three.
- D3 on (n, m): identity on connectivity and matching.  Arrivals are
  also copied except in the boundary sub-case where the shadow entries
  are equal; there the two queues' arrivals are exchanged exactly when
  queue m is served and queue n is not, which realigns the trajectories
  into a swap or reduction instead of leaving them incomparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .balancing import find_balancing_reallocation
from .core import (
    ArrivalKind,
    INIT_STREAM,
    StochasticConfig,
    as_connectivity,
    as_matching,
    as_queue_vector,
    make_streams,
    rng_stream,
    sample_arrivals,
    sample_connectivity,
    step,
)
from .order import RelationKind, RelationTag, cost_total, relation
from .policies import PolicyKind, decide

_PRESERVED = (RelationTag.D1, RelationTag.D2, RelationTag.D3, RelationTag.EQUAL)


@dataclass(frozen=True)
class CoupledSlotInput:
    """State of both systems entering a slot, plus the lead system's draw.

    ``x`` belongs to the lead system, ``x_tilde`` to the shadow system,
    and ``rel`` must equal ``relation(x_tilde, x)``.
    """

    x: np.ndarray
    x_tilde: np.ndarray
    rel: RelationKind
    c: np.ndarray
    a: np.ndarray
    m: np.ndarray


def _validate(inp: CoupledSlotInput) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x = as_queue_vector(inp.x)
    x_tilde = as_queue_vector(inp.x_tilde)
    c = as_connectivity(inp.c)
    m = as_matching(inp.m)
    a = np.asarray(inp.a, dtype=np.int64)
    if x.shape != x_tilde.shape or a.shape != x.shape:
        raise ValueError("dimension mismatch")
    if c.shape != m.shape or c.shape[0] != x.shape[0]:
        raise ValueError("dimension mismatch")
    actual = relation(x_tilde, x)
    if actual != inp.rel:
        raise ValueError(
            f"declared relation {inp.rel} does not match the vectors ({actual})"
        )
    if inp.rel.tag not in _PRESERVED:
        raise ValueError("coupling is defined only for related states")
    return x, x_tilde, c, a


def couple_step(inp: CoupledSlotInput) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shadow-system (connectivity, arrivals, matching) for one slot."""
    x, x_tilde, c, a = _validate(inp)
    m = np.asarray(inp.m, dtype=np.int8)
    tag = inp.rel.tag

    if tag in (RelationTag.EQUAL, RelationTag.D1):
        return c.copy(), a.copy(), m.copy()

    if tag is RelationTag.D2:
        n, mm = inp.rel.pair
        c_t, a_t, m_t = c.copy(), a.copy(), m.copy()
        c_t[[n, mm]] = c_t[[mm, n]]
        m_t[[n, mm]] = m_t[[mm, n]]
        a_t[[n, mm]] = a_t[[mm, n]]
        return c_t, a_t, m_t

    # D3: the shadow vector moved one unit from queue m to queue n.
    n, mm = inp.rel.pair
    a_t = a.copy()
    if x_tilde[n] == x_tilde[mm]:
        served = (c * m).sum(axis=1)
        if served[mm] >= 1 and served[n] == 0:
            a_t[n], a_t[mm] = a[mm], a[n]
    return c.copy(), a_t, m.copy()


@dataclass
class SlotTrace:
    slot: int
    x: tuple[int, ...]
    x_tilde: tuple[int, ...]
    rel: str
    c: list
    a: list
    m: list
    x_next: tuple[int, ...]
    x_tilde_next: tuple[int, ...]
    rel_next: str


@dataclass
class CouplingReport:
    """Outcome of one coupled trajectory run."""

    slots: int
    preserved_slots: int
    cost_ok_slots: int
    relation_counts: dict[str, int]
    coupled_connectivity_mean: float
    coupled_arrival_mean: float
    violations: list[SlotTrace] = field(default_factory=list)

    @property
    def preserved_fraction(self) -> float:
        return self.preserved_slots / self.slots if self.slots else 1.0

    @property
    def cost_ok(self) -> bool:
        return self.cost_ok_slots == self.slots


def _random_matching(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """A uniform-ish random valid matching for seeding the trajectory."""
    m = np.zeros((n, k), dtype=np.int8)
    servers = rng.permutation(k)
    queues = rng.permutation(n)
    for queue, server in zip(queues, servers):
        if rng.random() < 0.6:
            m[queue, server] = 1
    return m


def _related_pair(rng: np.random.Generator, n: int, backlog: int) -> tuple[np.ndarray, np.ndarray]:
    """Random lead vector and a strictly D1/D2/D3-related shadow vector."""
    for _ in range(1000):
        x = rng.integers(0, backlog + 1, n).astype(np.int64)
        x_t = x.copy()
        move = rng.integers(0, 3)
        if move == 0:
            x_t = x - rng.integers(0, x + 1)
        elif move == 1 and n >= 2:
            i, j = rng.choice(n, size=2, replace=False)
            x_t[i], x_t[j] = x[j], x[i]
        elif n >= 2:
            i, j = rng.choice(n, size=2, replace=False)
            lo, hi = (i, j) if x[i] <= x[j] else (j, i)
            if x[lo] + 1 <= x[hi] - 1:
                x_t[lo] += 1
                x_t[hi] -= 1
        tag = relation(x_t, x).tag
        if tag in (RelationTag.D1, RelationTag.D2, RelationTag.D3):
            return x, x_t
    raise RuntimeError("could not draw a related start pair; raise the backlog")


def coupling_trajectory_check(
    cfg: StochasticConfig,
    horizon: int,
    seed: int,
    policy: PolicyKind = PolicyKind.MM,
    start: str = "reallocation",
    initial_backlog: int = 4,
    max_violations: int = 5,
) -> CouplingReport:
    """Run a coupled pair of systems and check the invariants slot by slot.

    The lead system plays ``policy``.  With the default start the first
    slot employs a random suboptimal matching and the shadow employs a
    balancing reallocation of it; with ``start="related-pair"`` the two
    systems simply begin at a randomly drawn related pair of vectors.
    Afterwards the shadow follows ``couple_step``.  Checks per slot: the
    relation stays within the preserved set, and the shadow's total
    occupancy never exceeds the lead's.
    """
    if cfg.service_q != 1.0:
        raise ValueError("the coupled construction assumes perfect service")
    if cfg.arrival_kind is not ArrivalKind.BERNOULLI:
        raise ValueError("the coupled construction assumes Bernoulli arrivals")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if start not in ("reallocation", "related-pair"):
        raise ValueError("start must be 'reallocation' or 'related-pair'")

    streams = make_streams(seed)
    init_rng = rng_stream(seed, INIT_STREAM)
    n, k = cfg.n_queues, cfg.n_servers

    if start == "related-pair":
        x, x_tilde = _related_pair(init_rng, n, initial_backlog)
    else:
        # First slot: lead plays a random matching admitting a balancing
        # reallocation; the shadow plays that reallocation under common
        # arrivals and connectivity.
        m_tilde = None
        for _ in range(200):
            x0 = init_rng.integers(0, initial_backlog + 1, n)
            c = sample_connectivity(streams.connectivity, cfg)
            m = _random_matching(init_rng, n, k)
            m_tilde = find_balancing_reallocation(x0, c, m)
            if m_tilde is not None:
                break
        if m_tilde is None:
            raise RuntimeError("could not seed a suboptimal first slot; raise backlog")
        ones = np.ones((n, k), dtype=np.int8)
        a = sample_arrivals(streams.arrivals, cfg)
        x = step(x0, c, m, ones, a)
        x_tilde = step(x0, c, m_tilde, ones, a)
    rel = relation(x_tilde, x)

    preserved = cost_ok = 0
    counts: dict[str, int] = {t.value: 0 for t in RelationTag}
    conn_sum = 0
    conn_draws = 0
    arr_sum = 0
    arr_draws = 0
    violations: list[SlotTrace] = []

    def record(slot, xv, xt, c, a, m, xn, xtn, rel_next):
        violations.append(
            SlotTrace(
                slot,
                tuple(map(int, xv)),
                tuple(map(int, xt)),
                rel.tag.value,
                c.tolist(),
                a.tolist(),
                m.tolist(),
                tuple(map(int, xn)),
                tuple(map(int, xtn)),
                rel_next.tag.value,
            )
        )

    for slot in range(1, horizon + 1):
        counts[rel.tag.value] += 1
        if rel.tag in _PRESERVED:
            preserved += 1
        total, total_t = cost_total(x), cost_total(x_tilde)
        if total_t <= total and (rel.tag is not RelationTag.D2 or total_t == total):
            cost_ok += 1
        if slot == horizon:
            break
        c = sample_connectivity(streams.connectivity, cfg)
        a = sample_arrivals(streams.arrivals, cfg)
        m = decide(policy, x, c, streams.policy)
        c_t, a_t, m_t = couple_step(CoupledSlotInput(x, x_tilde, rel, c, a, m))
        conn_sum += int(c_t.sum())
        conn_draws += c_t.size
        arr_sum += int(a_t.sum())
        arr_draws += a_t.size
        # Same arithmetic as core.step with perfect service, without the
        # per-slot revalidation of inputs this loop constructed itself.
        x_next = np.maximum(x - (c * m).sum(axis=1), 0) + a
        x_tilde_next = np.maximum(x_tilde - (c_t * m_t).sum(axis=1), 0) + a_t
        rel_next = relation(x_tilde_next, x_next)
        if rel_next.tag not in _PRESERVED and len(violations) < max_violations:
            record(slot, x, x_tilde, c, a, m, x_next, x_tilde_next, rel_next)
        x, x_tilde, rel = x_next, x_tilde_next, rel_next

    return CouplingReport(
        slots=horizon,
        preserved_slots=preserved,
        cost_ok_slots=cost_ok,
        relation_counts=counts,
        coupled_connectivity_mean=conn_sum / conn_draws if conn_draws else 0.0,
        coupled_arrival_mean=arr_sum / arr_draws if arr_draws else 0.0,
        violations=violations,
    )
