import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from graphids.errors import InfeasibleError, NoInformationError
from graphids.oracles import brute_force_lp, brute_force_p1
from graphids.solvers import RatioProblem, information_ratio, solve_constrained_lp, solve_p1

vectors = st.integers(2, 6).flatmap(
    lambda k: st.tuples(
        st.lists(st.floats(0, 1), min_size=k, max_size=k),
        st.lists(st.floats(0, 1), min_size=k, max_size=k),
    )
)


def simplex(rng, k):
    return rng.dirichlet(np.ones(k))


def random_instance(rng, k):
    d = rng.random(k) * rng.choice([1.0, 1e-3])
    v = rng.random(k) * rng.choice([1.0, 1e-2])
    if rng.random() < 0.2:
        v[rng.integers(k)] = 0.0
    return d, v


def test_p1_examples():
    pi, obj = solve_p1(RatioProblem([0.0, 0.5], [1.0, 1.0]))
    np.testing.assert_array_equal(pi, [1, 0])
    assert obj == 0.0
    pi, obj = solve_p1(RatioProblem([1.0, 1.0], [1.0, 2.0]))
    np.testing.assert_allclose(pi, [0, 1], atol=1e-9)
    assert obj == pytest.approx(0.5, abs=1e-12)


def test_p1_interior_pair_matches_grid():
    d, v = [0.3, 1.0], [0.2, 1.0]
    pi, obj = solve_p1(RatioProblem(d, v))
    assert abs(obj - brute_force_p1(d, v)) < 1e-6
    assert information_ratio(pi, d, v) == pytest.approx(obj, abs=1e-12)


def test_p1_no_information():
    with pytest.raises(NoInformationError):
        solve_p1(RatioProblem([0.1, 0.2], [0.0, 0.0]))
    # zero regret makes the ratio zero even without information
    pi, obj = solve_p1(RatioProblem([0.0, 0.2], [0.0, 0.0]))
    assert obj == 0.0 and pi[0] == 1.0


def test_ratio_problem_validation():
    with pytest.raises(ValueError):
        RatioProblem([-0.1, 0.2], [1.0, 1.0])
    with pytest.raises(ValueError):
        RatioProblem([0.1], [1.0, 1.0])
    p = RatioProblem([-1e-12, 0.2], [1.0, 1.0])
    assert p.delta[0] == 0.0


def test_p1_tie_break_prefers_lower_index():
    pi, _ = solve_p1(RatioProblem([0.2, 0.2, 0.2], [1.0, 1.0, 1.0]))
    np.testing.assert_array_equal(pi, [1, 0, 0])


def test_p1_matches_brute_force_random():
    rng = np.random.default_rng(0)
    for _ in range(30):
        k = int(rng.integers(2, 6))
        d, v = random_instance(rng, k)
        if v.max() == 0 and d.min() > 0:
            continue
        pi, obj = solve_p1(RatioProblem(d, v))
        assert abs(obj - brute_force_p1(d, v)) <= 1e-6 * max(1.0, obj)
        assert np.count_nonzero(pi) <= 2
        assert abs(pi.sum() - 1) < 1e-9 and pi.min() >= 0


def test_p1_beats_any_distribution():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        d, v = rng.random(k), rng.random(k) + 1e-3
        _, obj = solve_p1(RatioProblem(d, v))
        assert obj <= information_ratio(simplex(rng, k), d, v) + 1e-9


def test_p1_scaling_law():
    rng = np.random.default_rng(2)
    for _ in range(200):
        k = int(rng.integers(2, 7))
        d, v = rng.random(k), rng.random(k) + 1e-3
        c1, c2 = rng.uniform(0.1, 10, size=2)
        pi, obj = solve_p1(RatioProblem(d, v))
        _, scaled = solve_p1(RatioProblem(c1 * d, c2 * v))
        assert scaled == pytest.approx(c1 ** 2 / c2 * obj, rel=1e-9, abs=1e-12)
        assert information_ratio(pi, c1 * d, c2 * v) == pytest.approx(scaled, rel=1e-9, abs=1e-12)


def test_p1_convexity_witness():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        d, v = rng.random(k), rng.random(k) + 1e-3
        p1, p2 = simplex(rng, k), simplex(rng, k)
        lam = rng.random()
        mixed = information_ratio(lam * p1 + (1 - lam) * p2, d, v)
        assert mixed <= lam * information_ratio(p1, d, v) + (1 - lam) * information_ratio(p2, d, v) + 1e-9


def test_lp_examples():
    pi, obj = solve_constrained_lp([0.1, 0.5], [3.0, 1.0], 2.0)
    np.testing.assert_array_equal(pi, [1, 0])
    assert obj == pytest.approx(0.1)
    pi, obj = solve_constrained_lp([0.1, 0.5], [1.0, 3.0], 2.0)
    np.testing.assert_allclose(pi, [0.5, 0.5])
    assert obj == pytest.approx(0.3)
    assert brute_force_lp([0.1, 0.5], [1.0, 3.0], 2.0) == pytest.approx(0.3)
    pi, obj = solve_constrained_lp([0.2, 0.2, 0.2], [1.0, 1.0, 1.0], 1.0)
    np.testing.assert_array_equal(pi, [1, 0, 0])
    assert obj == pytest.approx(0.2)


def test_lp_errors():
    with pytest.raises(InfeasibleError):
        solve_constrained_lp([0.1, 0.2], [1.0, 2.0], 2.0 + 1e-9)
    with pytest.raises(InfeasibleError):
        brute_force_lp([0.1, 0.2], [1.0, 2.0], 2.0 + 1e-9)
    with pytest.raises(NoInformationError):
        solve_constrained_lp([0.1, 0.2], [0.0, 0.0], 0.0)


def test_lp_minimum_constraint_gives_unconstrained_argmin():
    d, v = np.array([0.4, 0.1, 0.3]), np.array([2.0, 1.0, 3.0])
    _, obj = solve_constrained_lp(d, v, v.min())
    assert obj == pytest.approx(d.min())
    assert brute_force_lp(d, v, v.min()) == pytest.approx(d.min())


def test_lp_matches_linprog():
    optimize = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(4)
    for _ in range(300):
        k = int(rng.integers(2, 7))
        d, v = rng.random(k), rng.random(k)
        c = rng.uniform(v.min(), v.max())
        pi, obj = solve_constrained_lp(d, v, c)
        ref = optimize.linprog(d, A_ub=-v[None], b_ub=[-c], A_eq=np.ones((1, k)), b_eq=[1.0],
                               bounds=[(0, None)] * k, method="highs")
        assert ref.status == 0
        assert abs(obj - ref.fun) < 1e-7
        assert abs(obj - brute_force_lp(d, v, c)) < 1e-7
        assert np.count_nonzero(pi) <= 2
        assert pi @ v >= c - 1e-9
        if obj > d.min() + 1e-12:
            assert abs(pi @ v - c) < 1e-9


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_p1_property(dv):
    d, v = map(np.array, dv)
    assume(v.max() > 1e-6 or d.min() == 0)
    pi, obj = solve_p1(RatioProblem(d, v))
    assert np.count_nonzero(pi) <= 2
    assert abs(pi.sum() - 1) < 1e-9
    assert information_ratio(pi, d, v) == pytest.approx(obj, rel=1e-9, abs=1e-15)
    for i in range(len(d)):
        e = np.zeros(len(d))
        e[i] = 1.0
        assert obj <= information_ratio(e, d, v) * (1 + 1e-9) + 1e-15


@settings(max_examples=200, deadline=None)
@given(vectors, st.floats(0, 1))
def test_lp_property(dv, frac):
    d, v = map(np.array, dv)
    assume(v.max() > 0)
    c = v.min() + frac * (v.max() - v.min())
    pi, obj = solve_constrained_lp(d, v, c)
    assert abs(obj - brute_force_lp(d, v, c)) < 1e-9
    assert pi @ v >= c - 1e-9
    assert obj == pytest.approx(pi @ d, abs=1e-12)
