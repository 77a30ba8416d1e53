"""Domain types, slot dynamics and seeded stochastic inputs.

The system is time slotted: N parallel queues, K identical servers, a
random binary connectivity matrix per slot, at most one server per queue
and one queue per server.  Service happens first within a slot, arrivals
are added at the end of the slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Stream tags used to derive independent generators from one seed.
ARRIVAL_STREAM = 1
CONNECTIVITY_STREAM = 2
SERVICE_STREAM = 3
POLICY_STREAM = 4
INIT_STREAM = 5

BINOMIAL_TRIALS = 10


class ArrivalKind(str, Enum):
    BERNOULLI = "bernoulli"
    BINOMIAL10 = "binomial10"


@dataclass(frozen=True)
class StochasticConfig:
    """Parameters of the exogenous randomness.

    ``arrival_rate`` is the per-queue mean in packets per slot.  Binomial
    arrivals are the sum of 10 Bernoulli trials with per-trial probability
    ``arrival_rate / 10``, so the sweep axis is the mean either way.
    """

    n_queues: int
    n_servers: int
    connectivity_p: float
    arrival_kind: ArrivalKind
    arrival_rate: float
    service_q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_queues < 1 or self.n_servers < 1:
            raise ValueError("n_queues and n_servers must be >= 1")
        if not 0.0 <= self.connectivity_p <= 1.0:
            raise ValueError("connectivity_p must be in [0, 1]")
        if not 0.0 <= self.service_q <= 1.0:
            raise ValueError("service_q must be in [0, 1]")
        if self.arrival_rate < 0.0:
            raise ValueError("arrival_rate must be >= 0")
        kind = ArrivalKind(self.arrival_kind)
        object.__setattr__(self, "arrival_kind", kind)
        if kind is ArrivalKind.BERNOULLI and self.arrival_rate > 1.0:
            raise ValueError("bernoulli arrival_rate must be <= 1")
        if kind is ArrivalKind.BINOMIAL10 and self.arrival_rate > BINOMIAL_TRIALS:
            raise ValueError("binomial10 arrival_rate must be <= 10")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class Streams:
    """Independent generators for each source of randomness in one run."""

    arrivals: np.random.Generator
    connectivity: np.random.Generator
    service: np.random.Generator
    policy: np.random.Generator


def rng_stream(seed: int, tag: int) -> np.random.Generator:
    """Generator derived deterministically from a seed and a stream tag."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(tag,)))


def make_streams(seed: int, policy_seed: int | None = None) -> Streams:
    """Build the four streams for one replication.

    Exogenous streams (arrivals, connectivity, service) depend only on
    ``seed``, so running different policies against the same seed compares
    them under common random numbers.  The policy stream may be re-seeded
    independently without disturbing the exogenous realizations.
    """
    return Streams(
        arrivals=rng_stream(seed, ARRIVAL_STREAM),
        connectivity=rng_stream(seed, CONNECTIVITY_STREAM),
        service=rng_stream(seed, SERVICE_STREAM),
        policy=rng_stream(seed if policy_seed is None else policy_seed, POLICY_STREAM),
    )


def as_queue_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("queue vector must be a non-empty 1-D array")
    if np.any(x < 0):
        raise ValueError("queue lengths must be non-negative")
    return x


def _as_binary_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-D N x K array")
    if np.any((a != 0) & (a != 1)):
        raise ValueError(f"{name} entries must be 0 or 1")
    return a


def as_connectivity(c) -> np.ndarray:
    return _as_binary_matrix(c, "connectivity matrix")


def as_service_outcomes(q) -> np.ndarray:
    return _as_binary_matrix(q, "service outcome matrix")


def as_matching(m) -> np.ndarray:
    m = _as_binary_matrix(m, "matching")
    if np.any(m.sum(axis=1) > 1) or np.any(m.sum(axis=0) > 1):
        raise ValueError("matching row and column sums must be <= 1")
    return m


def _check_dims(x: np.ndarray, *mats: np.ndarray) -> None:
    n = x.shape[0]
    for a in mats:
        if a.shape[0] != n:
            raise ValueError("dimension mismatch between queue vector and matrix")
    k = mats[0].shape[1]
    for a in mats[1:]:
        if a.shape[1] != k:
            raise ValueError("dimension mismatch between matrices")


def intermediate_state(x_prev, c, m) -> np.ndarray:
    """Queue lengths right after service, before the slot's arrivals.

    Each queue loses at most one packet: the clamp handles servers matched
    to empty queues, and a matched but disconnected edge serves nothing.
    """
    x_prev = as_queue_vector(x_prev)
    c = as_connectivity(c)
    m = as_matching(m)
    _check_dims(x_prev, c, m)
    served = (c * m).sum(axis=1)
    return np.maximum(x_prev - served, 0)


def step(x_prev, c, m, q, a) -> np.ndarray:
    """One full slot: serve (subject to per-edge success), then add arrivals."""
    x_prev = as_queue_vector(x_prev)
    c = as_connectivity(c)
    m = as_matching(m)
    q = as_service_outcomes(q)
    a = np.asarray(a, dtype=np.int64)
    if a.shape != x_prev.shape:
        raise ValueError("dimension mismatch between queue vector and arrivals")
    if np.any(a < 0):
        raise ValueError("arrival counts must be non-negative")
    _check_dims(x_prev, c, m, q)
    served = (c * m * q).sum(axis=1)
    return np.maximum(x_prev - served, 0) + a


def sample_connectivity(rng: np.random.Generator, cfg: StochasticConfig) -> np.ndarray:
    """One slot of i.i.d. Bernoulli(p) queue-to-server links."""
    shape = (cfg.n_queues, cfg.n_servers)
    return (rng.random(shape) < cfg.connectivity_p).astype(np.int8)


def sample_arrivals(rng: np.random.Generator, cfg: StochasticConfig) -> np.ndarray:
    """One slot of arrivals, Bernoulli or sum-of-10-Bernoullis per queue."""
    if cfg.arrival_kind is ArrivalKind.BERNOULLI:
        return (rng.random(cfg.n_queues) < cfg.arrival_rate).astype(np.int64)
    return rng.binomial(
        BINOMIAL_TRIALS, cfg.arrival_rate / BINOMIAL_TRIALS, cfg.n_queues
    ).astype(np.int64)


def sample_service(rng: np.random.Generator, cfg: StochasticConfig) -> np.ndarray:
    """One slot of i.i.d. Bernoulli(q) per-edge service successes."""
    shape = (cfg.n_queues, cfg.n_servers)
    return (rng.random(shape) < cfg.service_q).astype(np.int8)
