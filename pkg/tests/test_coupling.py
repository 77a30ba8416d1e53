"""Coupled one-slot construction and trajectory invariants."""

import numpy as np
import pytest

from queuematch.core import ArrivalKind, StochasticConfig, step
from queuematch.coupling import (
    CoupledSlotInput,
    couple_step,
    coupling_trajectory_check,
)
from queuematch.order import RelationTag, cost_total, relation
from queuematch.policies import PolicyKind

PRESERVED = (RelationTag.D1, RelationTag.D2, RelationTag.D3, RelationTag.EQUAL)


def advance(x, c, m, a):
    ones = np.ones_like(np.asarray(c))
    return step(x, c, m, ones, a)


def cfg(n=3, k=2, p=0.5, rate=0.3, q=1.0):
    return StochasticConfig(n, k, p, ArrivalKind.BERNOULLI, rate, q, seed=0)


class TestCoupleStep:
    def test_equal_states_copy_everything(self):
        x = np.array([2, 1])
        c = np.array([[1, 0], [0, 1]])
        a = np.array([1, 0])
        m = np.array([[1, 0], [0, 0]])
        inp = CoupledSlotInput(x, x.copy(), relation(x, x), c, a, m)
        c_t, a_t, m_t = couple_step(inp)
        assert np.array_equal(c_t, c) and np.array_equal(a_t, a) and np.array_equal(m_t, m)
        assert np.array_equal(advance(x, c_t, m_t, a_t), advance(x, c, m, a))

    def test_swap_relation_swaps_rows_and_stays_related(self):
        x = np.array([5, 2, 1])
        x_t = np.array([2, 5, 1])
        rel = relation(x_t, x)
        assert rel.tag is RelationTag.D2 and rel.pair == (0, 1)
        rng = np.random.default_rng(8)
        for _ in range(50):
            c = (rng.random((3, 2)) < 0.5).astype(int)
            a = (rng.random(3) < 0.4).astype(int)
            m = np.zeros((3, 2), dtype=int)
            m[rng.integers(0, 3), rng.integers(0, 2)] = 1
            c_t, a_t, m_t = couple_step(CoupledSlotInput(x, x_t, rel, c, a, m))
            assert np.array_equal(c_t, c[[1, 0, 2]])
            assert np.array_equal(a_t, a[[1, 0, 2]])
            assert np.array_equal(m_t, m[[1, 0, 2]])
            nxt = advance(x, c, m, a)
            nxt_t = advance(x_t, c_t, m_t, a_t)
            assert relation(nxt_t, nxt).tag in (RelationTag.D2, RelationTag.EQUAL)
            assert cost_total(nxt_t) == cost_total(nxt)

    def test_boundary_transfer_swaps_arrivals_when_long_queue_served(self):
        # Shadow entries equal, the longer lead queue is served, the
        # shorter is not: the arrival swap realigns the trajectories.
        x = np.array([2, 0])
        x_t = np.array([1, 1])
        rel = relation(x_t, x)
        assert rel.tag is RelationTag.D3 and rel.pair == (1, 0)
        c = np.array([[1, 1], [0, 0]])
        m = np.array([[1, 0], [0, 0]])  # queue 0 (the long one) served
        a = np.array([0, 1])
        c_t, a_t, m_t = couple_step(CoupledSlotInput(x, x_t, rel, c, a, m))
        assert a_t.tolist() == [1, 0]
        nxt = advance(x, c, m, a)
        nxt_t = advance(x_t, c_t, m_t, a_t)
        # Hand-executed: both land on (1, 1).
        assert nxt.tolist() == [1, 1] and nxt_t.tolist() == [1, 1]
        assert relation(nxt_t, nxt).tag is RelationTag.EQUAL

    def test_boundary_transfer_with_opposite_arrivals_gives_swap(self):
        x = np.array([2, 0])
        x_t = np.array([1, 1])
        rel = relation(x_t, x)
        c = np.array([[1, 1], [0, 0]])
        m = np.array([[1, 0], [0, 0]])
        a = np.array([1, 0])
        c_t, a_t, m_t = couple_step(CoupledSlotInput(x, x_t, rel, c, a, m))
        assert a_t.tolist() == [0, 1]
        nxt = advance(x, c, m, a)
        nxt_t = advance(x_t, c_t, m_t, a_t)
        assert relation(nxt_t, nxt).tag is RelationTag.D2

    def test_boundary_transfer_without_swap_would_break(self):
        # With both queues backlogged, the longer one served and an
        # arrival to the shorter one only, identity arrivals land outside
        # the preserved set; the swap branch repairs exactly this slot.
        x = np.array([2, 4])
        x_t = np.array([3, 3])
        rel = relation(x_t, x)
        assert rel.tag is RelationTag.D3 and rel.pair == (0, 1)
        c = np.array([[0, 0], [1, 1]])
        m = np.array([[0, 0], [0, 1]])  # the long queue is served
        a = np.array([1, 0])
        nxt = advance(x, c, m, a)
        nxt_t_identity = advance(x_t, c, m, a)
        assert relation(nxt_t_identity, nxt).tag is RelationTag.UNRELATED
        c_t, a_t, m_t = couple_step(CoupledSlotInput(x, x_t, rel, c, a, m))
        assert a_t.tolist() == [0, 1]
        nxt_t = advance(x_t, c_t, m_t, a_t)
        assert relation(nxt_t, nxt).tag is RelationTag.EQUAL

    def test_wide_transfer_keeps_identity_coupling(self):
        x = np.array([1, 5])
        x_t = np.array([2, 4])
        rel = relation(x_t, x)
        assert rel.tag is RelationTag.D3
        rng = np.random.default_rng(3)
        for _ in range(50):
            c = (rng.random((2, 2)) < 0.6).astype(int)
            a = (rng.random(2) < 0.4).astype(int)
            m = np.zeros((2, 2), dtype=int)
            m[rng.integers(0, 2), rng.integers(0, 2)] = 1
            c_t, a_t, m_t = couple_step(CoupledSlotInput(x, x_t, rel, c, a, m))
            assert np.array_equal(c_t, c) and np.array_equal(a_t, a)
            nxt = advance(x, c, m, a)
            nxt_t = advance(x_t, c_t, m_t, a_t)
            assert relation(nxt_t, nxt).tag in PRESERVED

    def test_declared_relation_must_match_vectors(self):
        x = np.array([2, 1])
        x_t = np.array([1, 1])
        wrong = relation(x_t, x)
        with pytest.raises(ValueError):
            couple_step(
                CoupledSlotInput(
                    x,
                    np.array([2, 1]),
                    wrong,
                    np.ones((2, 1), dtype=int),
                    np.zeros(2, dtype=int),
                    np.zeros((2, 1), dtype=int),
                )
            )

    def test_unrelated_states_are_rejected(self):
        x = np.array([2, 0])
        x_t = np.array([0, 3])
        rel = relation(x_t, x)
        assert rel.tag is RelationTag.UNRELATED
        with pytest.raises(ValueError):
            couple_step(
                CoupledSlotInput(
                    x, x_t, rel, np.ones((2, 1), dtype=int),
                    np.zeros(2, dtype=int), np.zeros((2, 1), dtype=int),
                )
            )


class TestTrajectoryCheck:
    @pytest.mark.parametrize("policy", list(PolicyKind))
    @pytest.mark.parametrize("start", ["reallocation", "related-pair"])
    def test_relations_and_costs_hold(self, policy, start):
        for seed in range(4):
            report = coupling_trajectory_check(
                cfg(), 1500, seed=seed, policy=policy, start=start
            )
            assert report.preserved_fraction == 1.0
            assert report.cost_ok
            assert not report.violations

    def test_horizon_one_from_reallocation_start(self):
        report = coupling_trajectory_check(cfg(), 1, seed=0)
        assert report.slots == 1
        assert report.preserved_fraction == 1.0

    def test_swap_start_keeps_total_occupancy_identical(self):
        # A pure-permutation start couples into mirrored trajectories.
        x = np.array([4, 1, 2])
        x_t = np.array([1, 4, 2])
        scfg = cfg()
        rng = np.random.default_rng(12)
        rel = relation(x_t, x)
        assert rel.tag is RelationTag.D2
        for _ in range(300):
            c = (rng.random((3, 2)) < 0.5).astype(int)
            a = (rng.random(3) < 0.3).astype(int)
            m = np.zeros((3, 2), dtype=int)
            picked = rng.permutation(3)[:2]
            for srv, queue in enumerate(picked):
                m[queue, srv] = 1
            c_t, a_t, m_t = couple_step(CoupledSlotInput(x, x_t, rel, c, a, m))
            x = advance(x, c, m, a)
            x_t = advance(x_t, c_t, m_t, a_t)
            assert cost_total(x_t) == cost_total(x)
            rel = relation(x_t, x)
            assert rel.tag in (RelationTag.D2, RelationTag.EQUAL)

    def test_imperfect_service_is_rejected(self):
        with pytest.raises(ValueError):
            coupling_trajectory_check(cfg(q=0.8), 10, seed=0)

    def test_binomial_arrivals_are_rejected(self):
        bad = StochasticConfig(3, 2, 0.5, ArrivalKind.BINOMIAL10, 2.0, 1.0)
        with pytest.raises(ValueError):
            coupling_trajectory_check(bad, 10, seed=0)

    def test_marginal_moments_match_parameters(self):
        conn = []
        arr = []
        for seed in range(20):
            report = coupling_trajectory_check(cfg(), 2500, seed=seed)
            conn.append(report.coupled_connectivity_mean)
            arr.append(report.coupled_arrival_mean)
        assert abs(float(np.mean(conn)) - 0.5) < 0.02
        assert abs(float(np.mean(arr)) - 0.3) < 0.02
