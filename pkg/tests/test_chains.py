import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from sbstein import (
    BirthDeath,
    BudgetExceeded,
    Domination,
    ExplicitChain,
    InvalidParameter,
    MM1Embedded,
    ProbVector,
    ReflectedSRW,
    StateOutOfRange,
    TruncationPolicy,
    dominates,
    is_birth_death,
    is_stochastically_monotone,
    stationary,
    truncate_augment,
)
from sbstein.chains import augmented_block

from conftest import builtin_chains, geometric_window

probs = st.floats(0.51, 0.99)
rhos = st.floats(0.05, 0.95)


class TestProbVector:
    def test_rejects_negative(self):
        with pytest.raises(InvalidParameter):
            ProbVector([1.2, -0.2])

    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidParameter):
            ProbVector([0.5, 0.4])
        with pytest.raises(InvalidParameter):
            ProbVector([0.5], tail_mass=-0.5)

    def test_point_mass(self):
        pm = ProbVector.point_mass(3)
        assert_allclose(pm.probs, [0, 0, 0, 1])
        assert pm.tail_mass == 0.0
        assert pm.mean() == 3.0

    @given(st.floats(0.05, 0.95))
    def test_geometric_accounts_for_all_mass(self, a):
        g = ProbVector.geometric(a)
        assert abs(g.probs.sum() + g.tail_mass - 1) < 1e-14
        assert g.tail_mass <= 1e-16
        # mean of Geom(a) on {0,1,...} is (1-a)/a
        assert g.mean() == pytest.approx((1 - a) / a, rel=1e-12)

    def test_survival_excludes_tail(self):
        v = ProbVector([0.5, 0.25], tail_mass=0.25)
        assert_allclose(v.survival(3), [0.25, 0.0, 0.0])

    @given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=30), st.integers(0, 40))
    def test_truncated_conserves_mass(self, w, n):
        w = np.asarray(w)
        if w.sum() == 0:
            w[0] = 1.0
        v = ProbVector(w / w.sum())
        t = v.truncated(n)
        assert abs(t.probs.sum() + t.tail_mass - 1) < 1e-12
        assert len(t) <= max(n, 1) or len(t) == len(v)

    def test_tail_moment_bound_geometric(self):
        g = ProbVector.geometric(0.5, tail_eps=1e-6)
        W = len(g)
        exact = sum((k + 1) * 0.5 ** (k + 1) for k in range(W, W + 200))
        assert g.tail_moment_bound() >= exact - 1e-15


class TestRows:
    def test_mm1_row0(self, mm1):
        assert_allclose(mm1.row(0, 1), [2 / 3, 1 / 3])

    def test_srw_row3(self, srw):
        assert_allclose(srw.row(3, 5), [0, 0, 0.75, 0, 0.25, 0])

    def test_srw_row0(self, srw):
        assert_allclose(srw.row(0, 1), [0.75, 0.25])

    def test_mm1_formula(self):
        rho = 0.3
        c = MM1Embedded(rho)
        a = lambda k: rho / (1 + rho) * (1 + rho) ** -k
        row = c.row(4, 6)
        assert row[0] == pytest.approx((1 + rho) ** -5)
        for j in range(1, 6):
            assert row[j] == pytest.approx(a(4 - j + 1))

    @pytest.mark.parametrize("chain", builtin_chains(), ids=lambda c: c.description)
    def test_row_sums_and_shape(self, chain):
        B = chain.block(200)
        assert np.abs(B.sum(axis=1) - 1).max() <= 1e-12
        assert np.all(np.triu(B, k=2) == 0)
        assert np.all(np.diagonal(B, offset=1) > 0)
        for i in (1000, 5000, 10_000):
            row = chain.row(i, i + 3)
            assert abs(row.sum() - 1) <= 1e-12
            assert row[i + 1] > 0 and not row[i + 2 :].any()

    @pytest.mark.parametrize("p", [0.5, 1.0, 0.4, float("nan")])
    def test_srw_parameter_gate(self, p):
        with pytest.raises(InvalidParameter):
            ReflectedSRW(p)

    @pytest.mark.parametrize("rho", [0.0, 1.0, -0.1])
    def test_mm1_parameter_gate(self, rho):
        with pytest.raises(InvalidParameter):
            MM1Embedded(rho)


class TestBirthDeath:
    def test_matches_srw(self):
        bd = BirthDeath([0.25], [0.75])
        assert_allclose(bd.block(20), ReflectedSRW(0.75).block(20))

    @pytest.mark.parametrize("chain", [BirthDeath([0.5, 0.2, 0.1], [0.0, 0.3, 0.4]),
                                       ReflectedSRW(0.7), MM1Embedded(0.4)],
                             ids=lambda c: c.description)
    def test_row_agrees_with_block(self, chain):
        B = chain.block(12)
        for i in range(13):
            assert_allclose(chain.row(i), B[i, : i + 2], atol=1e-17)

    def test_negative_stay_rejected(self):
        with pytest.raises(InvalidParameter):
            BirthDeath([0.6], [0.6])

    def test_sequences_extend(self):
        bd = BirthDeath([0.5, 0.2, 0.1], [0.0, 0.3, 0.4])
        assert bd.births(5).tolist() == [0.5, 0.2, 0.1, 0.1, 0.1]
        assert bd.deaths(5).tolist() == [0.0, 0.3, 0.4, 0.4, 0.4]


class TestExplicit:
    def test_two_state(self):
        c = ExplicitChain([[0.5, 0.5], [0.5, 0.5]])
        pi = stationary(c)
        assert_allclose(pi.probs, [0.5, 0.5])
        assert pi.tail_mass == 0.0

    def test_beyond_data(self):
        c = ExplicitChain([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(StateOutOfRange):
            c.row(2)

    def test_not_single_birth(self):
        with pytest.raises(InvalidParameter):
            ExplicitChain([[0.5, 0.0, 0.5], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])

    def test_zero_birth_rejected(self):
        with pytest.raises(InvalidParameter):
            ExplicitChain([[1.0, 0.0], [0.5, 0.5]])

    def test_row_sum_rejected(self):
        with pytest.raises(InvalidParameter):
            ExplicitChain([[0.5, 0.4], [0.5, 0.5]])


class TestStationary:
    @pytest.mark.parametrize("p", [0.6, 0.75, 0.9])
    def test_srw_geometric(self, p):
        pi = stationary(ReflectedSRW(p), TruncationPolicy(tail_eps=1e-12))
        a = (2 * p - 1) / p
        assert np.abs(pi.probs - geometric_window(a, len(pi))).max() <= 1e-11
        assert pi.tail_mass <= 1e-12

    @pytest.mark.parametrize("rho", [0.3, 0.5, 0.8])
    def test_mm1_geometric(self, rho):
        pi = stationary(MM1Embedded(rho))
        assert np.abs(pi.probs - geometric_window(1 - rho, len(pi))).max() <= 1e-11

    def test_spec_values(self, srw, mm1):
        pi = stationary(srw)
        assert_allclose(pi.probs[:2], [2 / 3, 2 / 9], atol=1e-12)
        assert_allclose(stationary(mm1).probs[:3], [0.5, 0.25, 0.125], atol=1e-12)

    @pytest.mark.parametrize("chain", builtin_chains(), ids=lambda c: c.description)
    def test_left_invariant(self, chain):
        pi = stationary(chain)
        W = len(pi)
        y = pi.probs @ chain.block(W - 1)
        assert np.abs(y[:W] - pi.probs).sum() <= 10 * 1e-12

    def test_null_recurrent_exhausts_budget(self):
        with pytest.raises(BudgetExceeded):
            stationary(BirthDeath([0.5], [0.5]), TruncationPolicy(max_states=500))

    def test_metadata(self, srw):
        meta = stationary(srw).meta
        assert meta["states_solved"] >= 32
        assert meta["l1_change"] <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.05, 0.45), st.floats(0.5, 0.55))
    def test_birth_death_detailed_balance(self, b, d):
        c = BirthDeath([b], [d])
        pi = stationary(c)
        # pi_{j+1} d = pi_j b
        n = min(20, len(pi))
        assert_allclose(pi.probs[1:n] * d, pi.probs[: n - 1] * b, atol=1e-13)


class TestMonotone:
    def test_builtins(self, srw, mm1):
        assert is_stochastically_monotone(srw, 50)
        assert is_stochastically_monotone(mm1, 50)

    def test_counterexample(self):
        c = ExplicitChain([[0.0, 1.0, 0.0], [0.9, 0.0, 0.1], [0.0, 0.5, 0.5]])
        cert = is_stochastically_monotone(c, 2)
        assert not cert
        assert cert.worst_violation > 0

    def test_records_horizon(self, srw):
        assert is_stochastically_monotone(srw, 17).horizon == 17


class TestDomination:
    def test_self(self, srw):
        assert dominates(srw, srw, 30).relation is Domination.BOTH

    def test_srw_pair(self, srw):
        cert = dominates(srw, ReflectedSRW(0.8), 50)
        assert cert.relation is Domination.P_DOMINATES_Q
        assert dominates(ReflectedSRW(0.8), srw, 50).relation is Domination.Q_DOMINATES_P

    def test_neither(self):
        a = BirthDeath([0.3, 0.2], [0.5, 0.5])
        b = BirthDeath([0.2, 0.3], [0.5, 0.5])
        assert not dominates(a, b, 10).ordered

    @settings(max_examples=30, deadline=None)
    @given(probs, st.integers(0, 30), st.data())
    def test_truncation_is_dominated(self, p, n, data):
        chain = ReflectedSRW(p)
        k = data.draw(st.integers(0, n))
        Q = truncate_augment(chain, n, ProbVector.point_mass(k))
        assert dominates(chain, Q, n).relation in (Domination.P_DOMINATES_Q, Domination.BOTH)

    @settings(max_examples=30, deadline=None)
    @given(rhos, st.integers(0, 25))
    def test_mm1_truncation_is_dominated(self, rho, n):
        chain = MM1Embedded(rho)
        nu = ProbVector(np.full(n + 1, 1 / (n + 1)))
        Q = truncate_augment(chain, n, nu)
        assert dominates(chain, Q, n).relation in (Domination.P_DOMINATES_Q, Domination.BOTH)


class TestTruncation:
    def test_last_column(self, srw):
        Q = truncate_augment(srw, 2, ProbVector.point_mass(2))
        assert_allclose(Q.matrix[2], [0, 0.75, 0.25])

    def test_first_column(self, mm1):
        n = 4
        Q = truncate_augment(mm1, n, ProbVector.point_mass(0))
        P = mm1.block(n)
        assert Q.matrix[n, 0] == pytest.approx(P[n, 0] + P[n, n + 1])
        assert_allclose(Q.matrix[n, 1:], P[n, 1 : n + 1])

    def test_uniform(self, mm1):
        Q = truncate_augment(mm1, 2, ProbVector(np.full(3, 1 / 3)))
        P = mm1.block(2)
        assert_allclose(Q.matrix[2], P[2, :3] + (1 / 3) / 3)

    def test_bad_nu(self, srw):
        with pytest.raises(InvalidParameter):
            truncate_augment(srw, 2, ProbVector.point_mass(3))

    @given(st.integers(0, 60), probs)
    def test_augmented_rows_stochastic(self, n, p):
        Q = augmented_block(ReflectedSRW(p), n)
        assert np.abs(Q.sum(axis=1) - 1).max() <= 1e-12


def test_birth_death_predicate(srw, mm1):
    assert is_birth_death(srw, 20)
    assert not is_birth_death(mm1, 20)
