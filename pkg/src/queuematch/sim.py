"""Monte Carlo experiment engine: replications, sweeps, paired comparisons.

Replication seeds derive from the master seed and the replication index
only, never from the policy, so comparing policies at the same index uses
common random numbers and paired differences have very small confidence
intervals.  Replications are independent tasks; the aggregation is a
reduction ordered by replication index, so results do not depend on how
many workers ran them.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._engine import run_trajectory
from .core import StochasticConfig
from .policies import PolicyKind

DEFAULT_HORIZON = 200_000
DEFAULT_WARMUP = 20_000
DEFAULT_REPLICATIONS = 20

# A run is flagged divergent when the post-warmup mean exceeds the
# occupancy ceiling or the occupancy keeps climbing at this rate.
DIVERGENCE_OCCUPANCY = 1e4
DIVERGENCE_DRIFT = 0.01


class StabilityBracketError(RuntimeError):
    """Raised when no rate on the grid diverges, so no point brackets it."""


@dataclass(frozen=True)
class ReplicationResult:
    mean_total_occupancy: float
    max_observed_total: int
    slots: int
    seed: int
    drift_per_slot: float
    diverged: bool

    def __post_init__(self):
        if self.mean_total_occupancy < 0:
            raise ValueError("mean occupancy must be >= 0")


@dataclass(frozen=True)
class SweepPoint:
    arrival_rate: float
    policy: PolicyKind
    mean: float
    ci_half_width: float
    n_replications: int
    diverged: bool
    replication_means: tuple[float, ...] = ()


@dataclass(frozen=True)
class PairedComparison:
    """Per-replication difference of mean occupancies (policy_a - policy_b)."""

    arrival_rate: float
    policy_a: PolicyKind
    policy_b: PolicyKind
    mean_diff: float
    ci_half_width: float
    diffs: tuple[float, ...]


@dataclass(frozen=True)
class StabilityEstimate:
    rate: float
    resolution: float
    drift_per_slot: float


def replication_seed(master_seed: int, replication: int) -> int:
    """64-bit stream seed for one replication, shared by every policy."""
    ss = np.random.SeedSequence(entropy=(int(master_seed), int(replication)))
    return int(ss.generate_state(1, np.uint64)[0])


def t_half_width(values: np.ndarray, confidence: float = 0.95) -> float:
    """Student-t half width of the confidence interval for the mean."""
    n = len(values)
    if n <= 1:
        return 0.0
    sd = float(np.std(values, ddof=1))
    quantile = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    return quantile * sd / np.sqrt(n)


def run_replication(
    cfg: StochasticConfig,
    policy: PolicyKind,
    horizon: int = DEFAULT_HORIZON,
    warmup: int = DEFAULT_WARMUP,
    seed: int | None = None,
) -> ReplicationResult:
    """Simulate one seeded replication and time-average the total occupancy."""
    if warmup < 0 or horizon <= warmup:
        raise ValueError("need horizon > warmup >= 0")
    seed = cfg.seed if seed is None else seed
    totals = run_trajectory(cfg, policy, horizon, seed)
    measured = totals[warmup:]
    mean = float(int(measured.sum()) / measured.size)
    half = measured.size // 2
    if half >= 1:
        first = int(measured[:half].sum()) / half
        second = int(measured[measured.size - half :].sum()) / half
        drift = (second - first) / half
    else:
        drift = 0.0
    diverged = mean > DIVERGENCE_OCCUPANCY or drift > DIVERGENCE_DRIFT
    return ReplicationResult(
        mean_total_occupancy=mean,
        max_observed_total=int(totals.max()),
        slots=horizon,
        seed=seed,
        drift_per_slot=drift,
        diverged=diverged,
    )


def _replication_task(args) -> ReplicationResult:
    cfg, policy, horizon, warmup, seed = args
    return run_replication(cfg, policy, horizon, warmup, seed)


def _run_tasks(tasks, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_replication_task, tasks))
    return [_replication_task(t) for t in tasks]


def sweep(
    cfg: StochasticConfig,
    policies,
    rates,
    horizon: int = DEFAULT_HORIZON,
    warmup: int = DEFAULT_WARMUP,
    replications: int = DEFAULT_REPLICATIONS,
    master_seed: int | None = None,
    workers: int = 1,
) -> list[SweepPoint]:
    """Replicate every (policy, rate) cell under common random numbers."""
    policies = [PolicyKind(p) for p in policies]
    rates = [float(r) for r in rates]
    if not policies or not rates:
        raise ValueError("need at least one policy and one rate")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    master_seed = cfg.seed if master_seed is None else master_seed
    seeds = [replication_seed(master_seed, r) for r in range(replications)]

    tasks = []
    for rate in rates:
        rate_cfg = dataclasses.replace(cfg, arrival_rate=rate)
        for policy in policies:
            for seed in seeds:
                tasks.append((rate_cfg, policy, horizon, warmup, seed))
    results = _run_tasks(tasks, workers)

    points: list[SweepPoint] = []
    idx = 0
    for rate in rates:
        for policy in policies:
            reps = results[idx : idx + replications]
            idx += replications
            means = np.array([r.mean_total_occupancy for r in reps])
            points.append(
                SweepPoint(
                    arrival_rate=rate,
                    policy=policy,
                    mean=float(means.mean()),
                    ci_half_width=t_half_width(means),
                    n_replications=replications,
                    diverged=any(r.diverged for r in reps),
                    replication_means=tuple(float(v) for v in means),
                )
            )
    return points


def paired_compare(
    cfg: StochasticConfig,
    policy_a: PolicyKind,
    policy_b: PolicyKind,
    rate: float,
    horizon: int = DEFAULT_HORIZON,
    warmup: int = DEFAULT_WARMUP,
    replications: int = DEFAULT_REPLICATIONS,
    master_seed: int | None = None,
    workers: int = 1,
) -> PairedComparison:
    """Difference of mean occupancies under identical exogenous randomness."""
    points = sweep(
        cfg,
        [policy_a, policy_b],
        [rate],
        horizon,
        warmup,
        replications,
        master_seed,
        workers,
    )
    a, b = points[0], points[1]
    diffs = np.array(a.replication_means) - np.array(b.replication_means)
    return PairedComparison(
        arrival_rate=float(rate),
        policy_a=PolicyKind(policy_a),
        policy_b=PolicyKind(policy_b),
        mean_diff=float(diffs.mean()),
        ci_half_width=t_half_width(diffs),
        diffs=tuple(float(d) for d in diffs),
    )


def compare_from_points(a: SweepPoint, b: SweepPoint) -> PairedComparison:
    """Pair two sweep points that were produced with shared seeds."""
    if a.arrival_rate != b.arrival_rate or a.n_replications != b.n_replications:
        raise ValueError("points are not paired")
    diffs = np.array(a.replication_means) - np.array(b.replication_means)
    return PairedComparison(
        arrival_rate=a.arrival_rate,
        policy_a=a.policy,
        policy_b=b.policy,
        mean_diff=float(diffs.mean()),
        ci_half_width=t_half_width(diffs),
        diffs=tuple(float(d) for d in diffs),
    )


def stability_point(
    cfg: StochasticConfig,
    policy: PolicyKind,
    rates,
    drift_threshold: float = DIVERGENCE_DRIFT,
    horizon: int = 50_000,
    warmup: int = 5_000,
    replications: int = 4,
    master_seed: int | None = None,
    workers: int = 1,
) -> StabilityEstimate:
    """Smallest rate on the grid whose mean occupancy keeps drifting upward.

    The grid must be increasing; the returned resolution is the gap to the
    previous (stable) grid point.
    """
    rates = [float(r) for r in rates]
    if rates != sorted(rates):
        raise ValueError("rate grid must be increasing")
    master_seed = cfg.seed if master_seed is None else master_seed
    seeds = [replication_seed(master_seed, r) for r in range(replications)]
    previous = 0.0
    for rate in rates:
        rate_cfg = dataclasses.replace(cfg, arrival_rate=rate)
        tasks = [(rate_cfg, policy, horizon, warmup, s) for s in seeds]
        reps = _run_tasks(tasks, workers)
        drift = float(np.mean([r.drift_per_slot for r in reps]))
        if drift > drift_threshold:
            return StabilityEstimate(
                rate=rate, resolution=rate - previous, drift_per_slot=drift
            )
        previous = rate
    raise StabilityBracketError(
        f"no rate on the grid (max {rates[-1]}) exceeded drift {drift_threshold}"
    )


def littles_law_delay(mean_occupancy: float, n_queues: int, rate: float) -> float | None:
    """Mean delay in slots via Little's law, None at zero load."""
    if rate <= 0:
        return None
    return mean_occupancy / (n_queues * rate)
