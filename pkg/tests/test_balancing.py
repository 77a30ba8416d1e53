"""Reallocation classifier, the union-digraph finder, and distance chains."""

import numpy as np

from queuematch.balancing import (
    ConditionTag,
    PairType,
    build_union_cycle_graph,
    classify_reallocation,
    distance_to_mwm,
    find_balancing_reallocation,
)
from queuematch.core import as_matching, intermediate_state
from queuematch.matching import enumerate_matchings, max_weight_matching, mw_index, weight_matrix

# Worked three-queue instance: backlog (3, 2, 5), each queue reachable as
# drawn, original allocation serves queues 2 and 3 for a served backlog of
# 7; serving all three queues attains the maximum of 10.
WORKED_X = np.array([3, 2, 5])
WORKED_C = np.array([[0, 1, 0], [0, 1, 1], [1, 0, 1]])
WORKED_M = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 1]])


def brute_force_best(x, c):
    w = weight_matrix(x, c)
    return max(int((w * m).sum()) for m in enumerate_matchings(*w.shape))


def random_matching(rng, n, k):
    m = np.zeros((n, k), dtype=np.int8)
    for row, col in zip(rng.permutation(n), rng.permutation(k)):
        if rng.random() < 0.65:
            m[row, col] = 1
    return m


class TestClassifyReallocation:
    def test_elementwise_drop_is_c1(self):
        kind = classify_reallocation([3, 1, 4], [2, 1, 4])
        assert kind.tag is ConditionTag.C1

    def test_unit_transfer_is_c2(self):
        kind = classify_reallocation([2, 1, 5], [3, 1, 4])
        assert kind.tag is ConditionTag.C2
        assert kind.pair == (0, 2)

    def test_identical_vectors_are_not_balancing(self):
        assert classify_reallocation([2, 2], [2, 2]) is None

    def test_transfer_between_adjacent_values_is_not_c2(self):
        # (2, 3) -> (3, 2) is a swap, not a balancing transfer.
        assert classify_reallocation([2, 3], [3, 2]) is None


class TestUnionCycleGraph:
    def test_invariants_on_random_instances(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n, k = rng.integers(1, 5, 2)
            x = rng.integers(0, 6, n)
            c = (rng.random((n, k)) < 0.6).astype(np.int8)
            m = random_matching(rng, n, k)
            g = build_union_cycle_graph(x, c, m)
            assert g.size == n + k
            # Both sides are permutations of the padded graph.
            assert sorted(g.candidate.tolist()) == list(range(g.size))
            assert sorted(g.optimal.tolist()) == list(range(g.size))
            # Every queue vertex lies on exactly one cycle.
            queues = [p.queue for cy in g.cycles for p in cy.pairs]
            assert sorted(queues) == list(range(g.size))
            # Cycle weights add up to the candidate's shortfall.
            best = brute_force_best(x, c)
            assert g.total_weight == mw_index(x, c, m) - best
            assert g.total_weight <= 0
            for cy in g.cycles:
                for p in cy.pairs:
                    if p.kind is PairType.T1:
                        assert p.weight_in > 0 and p.weight_out == 0
                    elif p.kind is PairType.T2:
                        assert p.weight_in == 0 and p.weight_out > 0
                    else:
                        assert p.weight_in == p.weight_out


class TestFindBalancingReallocation:
    def test_worked_instance_first_step(self):
        new = find_balancing_reallocation(WORKED_X, WORKED_C, WORKED_M)
        assert new is not None
        assert mw_index(WORKED_X, WORKED_C, new) > 7
        kind = classify_reallocation(
            intermediate_state(WORKED_X, WORKED_C, WORKED_M),
            intermediate_state(WORKED_X, WORKED_C, new),
        )
        assert kind is not None

    def test_none_at_the_optimum(self):
        best = max_weight_matching(weight_matrix(WORKED_X, WORKED_C))
        assert find_balancing_reallocation(WORKED_X, WORKED_C, best) is None

    def test_empty_matching_on_single_edge(self):
        out = find_balancing_reallocation([5], [[1]], [[0]])
        assert out.tolist() == [[1]]

    def test_oracle_equivalence_and_validity_random(self):
        rng = np.random.default_rng(23)
        kinds = {ConditionTag.C1: 0, ConditionTag.C2: 0}
        for _ in range(300):
            n, k = rng.integers(1, 5, 2)
            x = rng.integers(0, 6, n)
            c = (rng.random((n, k)) < rng.uniform(0.2, 0.9)).astype(np.int8)
            m = random_matching(rng, n, k)
            best = brute_force_best(x, c)
            current = mw_index(x, c, m)
            out = find_balancing_reallocation(x, c, m)
            assert (out is None) == (current == best)
            if out is not None:
                as_matching(out)  # valid on the original graph
                assert out.shape == (n, k)
                assert mw_index(x, c, out) > current
                kind = classify_reallocation(
                    intermediate_state(x, c, m), intermediate_state(x, c, out)
                )
                assert kind is not None
                kinds[kind.tag] += 1
        assert kinds[ConditionTag.C1] > 0 and kinds[ConditionTag.C2] > 0

    def test_returned_matchings_have_no_zero_weight_edges(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n, k = rng.integers(1, 5, 2)
            x = rng.integers(0, 6, n)
            c = (rng.random((n, k)) < 0.5).astype(np.int8)
            m = random_matching(rng, n, k)
            out = find_balancing_reallocation(x, c, m)
            if out is not None:
                w = weight_matrix(x, c)
                assert np.all(w[out == 1] > 0)


class TestDistanceToMwm:
    def test_zero_steps_at_optimum(self):
        best = max_weight_matching(weight_matrix(WORKED_X, WORKED_C))
        h, chain = distance_to_mwm(WORKED_X, WORKED_C, best)
        assert h == 0
        assert len(chain) == 1

    def test_worked_instance_reaches_the_maximum(self):
        h, chain = distance_to_mwm(WORKED_X, WORKED_C, WORKED_M)
        assert h >= 1
        assert mw_index(WORKED_X, WORKED_C, chain[-1]) == 10
        assert np.array_equal(chain[0], WORKED_M)

    def test_strictly_increasing_chains_on_random_instances(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            n, k = rng.integers(1, 5, 2)
            x = rng.integers(0, 6, n)
            c = (rng.random((n, k)) < 0.6).astype(np.int8)
            m = random_matching(rng, n, k)
            h, chain = distance_to_mwm(x, c, m)
            values = [mw_index(x, c, mm) for mm in chain]
            assert values == sorted(set(values))
            assert values[-1] == brute_force_best(x, c)
            assert h == len(chain) - 1
            # Strict increase bounds the chain by the count of distinct
            # attainable index values.
            assert h <= len({int((weight_matrix(x, c) * mm).sum())
                             for mm in enumerate_matchings(n, k)})
