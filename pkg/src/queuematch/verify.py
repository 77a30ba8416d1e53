"""Property suites behind the ``verify`` command and the acceptance tests.

Each suite quantifies one structural claim over random (or exhaustive)
instances against an independent oracle, and reports a counterexample
dump on the first failure instead of a bare boolean.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .balancing import classify_reallocation, find_balancing_reallocation
from .core import ArrivalKind, StochasticConfig, intermediate_state
from .coupling import coupling_trajectory_check
from .matching import (
    all_max_weight_matchings,
    enumerate_matchings,
    max_weight_matching,
    mw_index,
    weight_matrix,
)
from .order import (
    RelationTag,
    _interchange_pair,
    _is_reduction,
    _two_swap_pair,
    cost_max,
    cost_total,
    precedes_p,
    relation,
)
from .policies import PolicyKind


@dataclass
class SuiteResult:
    name: str
    passed: bool
    trials: int
    detail: str = ""
    counterexamples: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: {self.trials} trials{extra}"


def _random_instance(rng: np.random.Generator, max_n: int, max_k: int, x_max: int = 5):
    n = int(rng.integers(1, max_n + 1))
    k = int(rng.integers(1, max_k + 1))
    x = rng.integers(0, x_max + 1, n)
    c = (rng.random((n, k)) < rng.uniform(0.2, 0.9)).astype(np.int8)
    return x, c


def _random_matching(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    m = np.zeros((n, k), dtype=np.int8)
    for row, col in zip(rng.permutation(n), rng.permutation(k)):
        if rng.random() < 0.65:
            m[row, col] = 1
    return m


def _brute_force_optimum(w: np.ndarray) -> int:
    return max(int((w * m).sum()) for m in enumerate_matchings(*w.shape))


def matching_matches_bruteforce(
    trials: int = 1000, max_n: int = 4, max_k: int = 4, seed: int = 0
) -> SuiteResult:
    """Fast solver weight equals full enumeration on every random instance."""
    rng = np.random.default_rng(seed)
    result = SuiteResult("matching-weight-equals-bruteforce", True, trials)
    for t in range(trials):
        n = int(rng.integers(1, max_n + 1))
        k = int(rng.integers(1, max_k + 1))
        w = rng.integers(0, 10, (n, k)).astype(np.int64)
        got = int((w * max_weight_matching(w)).sum())
        best = _brute_force_optimum(w)
        if got != best:
            result.passed = False
            result.counterexamples.append(
                f"trial {t}: weights {w.tolist()} solver {got} != brute force {best}"
            )
            break
    return result


def reallocation_increases_weight(
    trials: int = 1000,
    max_n: int = 4,
    max_k: int = 4,
    seed: int = 0,
    corrupt: bool = False,
) -> SuiteResult:
    """Every found reallocation is a C1/C2 step with strictly larger weight.

    ``corrupt=True`` is a negative control: the found reallocation is
    replaced by the original matching, which must be reported as a
    counterexample.
    """
    rng = np.random.default_rng(seed)
    result = SuiteResult("reallocation-strictly-increases-weight", True, trials)
    found = 0
    for t in range(trials):
        x, c = _random_instance(rng, max_n, max_k)
        m = _random_matching(rng, *c.shape)
        new = find_balancing_reallocation(x, c, m)
        if new is None:
            continue
        found += 1
        if corrupt:
            new = m.copy()
        before, after = mw_index(x, c, m), mw_index(x, c, new)
        kind = classify_reallocation(intermediate_state(x, c, m), intermediate_state(x, c, new))
        if after <= before or kind is None:
            result.passed = False
            result.counterexamples.append(
                f"trial {t}: x {x.tolist()} c {c.tolist()} m {m.tolist()} -> "
                f"{new.tolist()}: weight {before}->{after}, condition {kind}"
            )
            break
    result.detail = f"{found} reallocations exercised"
    return result


def reallocation_none_iff_optimal(
    trials: int = 1000, max_n: int = 4, max_k: int = 4, seed: int = 0
) -> SuiteResult:
    """No reallocation exists exactly at maximum weight (exhaustive 2x2 + random)."""
    result = SuiteResult("reallocation-none-iff-optimal-weight", True, 0)
    checked = 0

    def check(x, c, m) -> bool:
        nonlocal checked
        checked += 1
        w = weight_matrix(x, c)
        optimal = _brute_force_optimum(w)
        current = mw_index(x, c, m)
        is_none = find_balancing_reallocation(x, c, m) is None
        if is_none != (current == optimal):
            result.passed = False
            result.counterexamples.append(
                f"x {np.asarray(x).tolist()} c {np.asarray(c).tolist()} "
                f"m {np.asarray(m).tolist()}: weight {current} optimal {optimal} "
                f"reallocation found={not is_none}"
            )
            return False
        return True

    all_matchings = list(enumerate_matchings(2, 2))
    for x0, x1 in itertools.product(range(4), repeat=2):
        for bits in itertools.product((0, 1), repeat=4):
            c = np.array(bits, dtype=np.int8).reshape(2, 2)
            for m in all_matchings:
                if not check(np.array([x0, x1]), c, m):
                    result.trials = checked
                    return result
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x, c = _random_instance(rng, max_n, max_k)
        m = _random_matching(rng, *c.shape)
        if not check(x, c, m):
            break
    result.trials = checked
    return result


def optimal_intermediates_permutation_equal(
    trials: int = 500, max_n: int = 4, max_k: int = 4, seed: int = 0
) -> SuiteResult:
    """All maximum-weight matchings give multiset-equal post-service vectors."""
    rng = np.random.default_rng(seed)
    result = SuiteResult("optimal-intermediates-permutation-equal", True, trials)
    for t in range(trials):
        x, c = _random_instance(rng, max_n, max_k)
        w = weight_matrix(x, c)
        winners = all_max_weight_matchings(w)
        reference = np.sort(intermediate_state(x, c, winners[0]))
        for m in winners[1:]:
            other = np.sort(intermediate_state(x, c, m))
            if not np.array_equal(reference, other):
                result.passed = False
                result.counterexamples.append(
                    f"trial {t}: x {x.tolist()} c {c.tolist()} intermediates "
                    f"{reference.tolist()} vs {other.tolist()}"
                )
                return result
    return result


def relations_exclusive_and_costs_monotone(
    trials: int = 1000, dim: int = 4, x_max: int = 5, seed: int = 0
) -> SuiteResult:
    """Pair relations are mutually exclusive and both costs are monotone."""
    rng = np.random.default_rng(seed)
    result = SuiteResult("relations-exclusive-costs-monotone", True, trials)
    for t in range(trials):
        n = int(rng.integers(1, dim + 1))
        x = rng.integers(0, x_max + 1, n)
        if rng.random() < 0.5:
            x_new = rng.integers(0, x_max + 1, n)
        else:
            x_new = x.copy()
            move = rng.integers(0, 3)
            if move == 0:
                x_new = np.maximum(x - rng.integers(0, 2, n), 0)
            elif move == 1 and n >= 2:
                i, j = rng.choice(n, 2, replace=False)
                x_new[i], x_new[j] = x[j], x[i]
            elif n >= 2:
                i, j = rng.choice(n, 2, replace=False)
                lo, hi = (i, j) if x[i] <= x[j] else (j, i)
                if x[lo] + 1 <= x[hi] - 1:
                    x_new[lo] += 1
                    x_new[hi] -= 1

        holds = sum(
            (
                bool(_is_reduction(x_new, x)),
                _two_swap_pair(x_new, x) is not None,
                _interchange_pair(x_new, x) is not None,
            )
        )
        rel = relation(x_new, x)
        problem = None
        if holds > 1:
            problem = f"{holds} relations hold at once"
        elif np.array_equal(x_new, x) and rel.tag is not RelationTag.EQUAL:
            problem = "identical vectors not tagged equal"
        elif rel.tag in (RelationTag.D1, RelationTag.D2, RelationTag.D3):
            if cost_total(x_new) > cost_total(x) or cost_max(x_new) > cost_max(x):
                problem = "cost increased under a one-step relation"
            elif rel.tag is RelationTag.D2 and (
                cost_total(x_new) != cost_total(x) or cost_max(x_new) != cost_max(x)
            ):
                problem = "costs not preserved under a swap"
            elif sum(int(v) for v in x) <= 12 and not precedes_p(x_new, x):
                problem = "one-step relation not inside the closure"
        if problem:
            result.passed = False
            result.counterexamples.append(
                f"trial {t}: {x.tolist()} -> {x_new.tolist()} ({rel.tag.value}): {problem}"
            )
            return result
    return result


def coupling_preserves_relations(
    seeds: int = 10,
    slots: int = 2000,
    n_queues: int = 3,
    n_servers: int = 2,
    connectivity_p: float = 0.5,
    arrival_rate: float = 0.3,
    policy: PolicyKind = PolicyKind.MM,
    start: str = "reallocation",
    moment_tolerance: float = 0.01,
    base_seed: int = 0,
) -> SuiteResult:
    """Coupled trajectories keep the relation and the cost ordering every slot.

    Marginal moments of the coupled streams are asserted against (p, rate)
    once the aggregate sample is large enough for the tolerance (1e5 slots).
    """
    cfg = StochasticConfig(
        n_queues, n_servers, connectivity_p, ArrivalKind.BERNOULLI, arrival_rate, 1.0
    )
    result = SuiteResult("coupled-step-preserves-relations", True, seeds * slots)
    conn_mean = np.zeros(seeds)
    arr_mean = np.zeros(seeds)
    for s in range(seeds):
        report = coupling_trajectory_check(
            cfg, slots, seed=base_seed + s, policy=policy, start=start
        )
        conn_mean[s] = report.coupled_connectivity_mean
        arr_mean[s] = report.coupled_arrival_mean
        if report.preserved_fraction != 1.0 or not report.cost_ok:
            result.passed = False
            result.counterexamples.append(
                f"seed {base_seed + s}: preserved {report.preserved_fraction:.6f} "
                f"cost_ok {report.cost_ok} first violation "
                f"{report.violations[0] if report.violations else None}"
            )
            return result
    p_hat, a_hat = float(conn_mean.mean()), float(arr_mean.mean())
    result.detail = f"coupled means p={p_hat:.4f} rate={a_hat:.4f}"
    if seeds * slots >= 100_000:
        if abs(p_hat - connectivity_p) > moment_tolerance or (
            abs(a_hat - arrival_rate) > moment_tolerance
        ):
            result.passed = False
            result.counterexamples.append(
                f"coupled stream moments off: p_hat {p_hat:.4f} vs {connectivity_p}, "
                f"rate_hat {a_hat:.4f} vs {arrival_rate}"
            )
    return result


def run_all(
    trials: int = 1000,
    max_n: int = 4,
    max_k: int = 4,
    seed: int = 0,
    coupling_seeds: int = 10,
    coupling_slots: int = 2000,
) -> list[SuiteResult]:
    """Every property suite with shared instance bounds."""
    return [
        matching_matches_bruteforce(trials, max_n, max_k, seed),
        reallocation_increases_weight(trials, max_n, max_k, seed),
        reallocation_none_iff_optimal(trials, max_n, max_k, seed),
        optimal_intermediates_permutation_equal(min(trials, 500), max_n, max_k, seed),
        relations_exclusive_and_costs_monotone(trials, max_n, seed=seed),
        coupling_preserves_relations(
            coupling_seeds, coupling_slots, base_seed=seed
        ),
    ]
