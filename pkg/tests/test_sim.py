import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptasep.bethe import RingGeometry
from ptasep.finite import FiniteQuery, InitialCondition, joint_cdf_step, transition_probability
from ptasep.sim import (SimConfig, exact_cdf_small, height_at, make_rng, mc_joint_cdf,
                        particle_position, simulate_path)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 8), st.data())
def test_paths_respect_exclusion(L, data):
    N = data.draw(st.integers(1, L - 1))
    seed = data.draw(st.integers(0, 2 ** 32 - 1))
    g = RingGeometry(L, N)
    tr = simulate_path(SimConfig(g, InitialCondition.step(N), 3.0, seed), make_rng(seed))
    assert np.all(np.diff(tr.times) > 0)
    for t in np.linspace(0, 3.0, 7):
        x, j0 = tr.state_at(t)
        assert x.size == N
        gaps = np.diff(np.append(x, x[0] + L))
        assert np.all(gaps >= 1)
        assert j0 >= 0


def test_state_and_height_conventions():
    g = RingGeometry(6, 3)
    tr = simulate_path(SimConfig(g, InitialCondition.step(3), 2.0, 7))
    x, j0 = tr.state_at(0.0)
    assert list(x) == [-2, -1, 0] and j0 == 0
    # step configuration: slope -1 on the occupied block, +1 to the right of the origin
    assert [height_at(tr, l, 0.0) for l in range(0, 4)] == [0, 1, 2, 3]
    assert [height_at(tr, l, 0.0) for l in (-1, -2, -3)] == [1, 2, 3]
    for t in (0.5, 1.7):
        x, j0 = tr.state_at(t)
        assert height_at(tr, 6, t) - height_at(tr, 0, t) == 0
        assert height_at(tr, 0, t) == 2 * j0
    with pytest.raises(ValueError):
        tr.state_at(2.5)
    assert particle_position(g, np.array([-2, -1, 0]), 4) == 4
    assert particle_position(g, np.array([-2, -1, 0]), 0) == -6


def test_csv():
    g = RingGeometry(4, 2)
    tr = simulate_path(SimConfig(g, InitialCondition.step(2), 1.0, 3))
    rows = tr.to_csv().splitlines()
    assert rows[0] == "time,particle,from,to" and len(rows) == tr.times.size + 1


def test_exact_at_time_zero_is_indicator():
    g = RingGeometry(6, 3)
    Y = InitialCondition.step(3)
    assert exact_cdf_small(g, Y, FiniteQuery.single(2, -1, 0.0)) == 1.0
    assert exact_cdf_small(g, Y, FiniteQuery.single(2, 0, 0.0)) == 0.0


def test_exact_partition_of_unity():
    g = RingGeometry(5, 2)
    Y = InitialCondition.step(2)
    t = 0.9
    total = 0.0
    for a in range(-1, 8):
        # disjoint events {x_1(t) = a}
        p_ge = exact_cdf_small(g, Y, FiniteQuery.single(1, a, t))
        p_gt = exact_cdf_small(g, Y, FiniteQuery.single(1, a + 1, t))
        total += p_ge - p_gt
    total += exact_cdf_small(g, Y, FiniteQuery.single(1, 8, t))
    assert abs(total - exact_cdf_small(g, Y, FiniteQuery.single(1, -1, t))) < 1e-12
    assert abs(total - 1.0) < 1e-10


def _point_mass(g, Y, x, t):
    P = lambda a1, a2: exact_cdf_small(g, Y, FiniteQuery((1, 2), (a1, a2), (t, t)))
    return P(*x) - P(x[0] + 1, x[1]) - P(x[0], x[1] + 1) + P(x[0] + 1, x[1] + 1)


@pytest.mark.parametrize("x", [(-1, 0), (0, 1), (0, 2), (1, 3), (2, 3)])
def test_exact_vs_transition_probability(x):
    g = RingGeometry(4, 2)
    Y = InitialCondition.step(2)
    t = 0.7
    p = transition_probability(g, Y, InitialCondition(x), t)
    assert abs(p - _point_mass(g, Y, x, t)) < 1e-10


def test_mc_against_formula_and_seeds():
    g = RingGeometry(6, 3)
    q = FiniteQuery.single(2, 0, 1.0)
    exact = joint_cdf_step(g, q).value
    cfg = SimConfig(g, InitialCondition.step(3), 1.0, seed=11, samples=100_000)
    est = mc_joint_cdf(cfg, q)
    assert abs(est.estimate - exact) < 3.5 * est.stderr
    again = mc_joint_cdf(cfg, q)
    assert again.hits == est.hits
    other = mc_joint_cdf(SimConfig(g, InitialCondition.step(3), 1.0, seed=12, samples=100_000), q)
    assert other.hits != est.hits
    assert abs(other.estimate - est.estimate) < 3.5 * np.hypot(est.stderr, other.stderr)


def test_config_validation():
    g = RingGeometry(6, 3)
    with pytest.raises(ValueError):
        SimConfig(g, InitialCondition.step(3), -1.0)
    with pytest.raises(ValueError):
        SimConfig(g, InitialCondition((0, 1, 2, 3)), 1.0)
    cfg = SimConfig(g, InitialCondition.step(3), 1.0, samples=1000)
    with pytest.raises(ValueError):
        mc_joint_cdf(cfg, FiniteQuery.single(1, 0, 0.5))
    cfg = SimConfig(g, InitialCondition.step(3), 1.0, samples=10_000)
    with pytest.raises(ValueError):
        mc_joint_cdf(cfg, FiniteQuery.single(1, 0, 2.0))
    assert cfg.to_dict()["rng"] == "Philox"
