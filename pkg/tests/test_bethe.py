import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptasep.bethe import (BetheRootSet, RingGeometry, eval_Hz, eval_lz, eval_rz, jfun,
                          root_identity_errors, solve_bethe_roots)

rings = st.integers(2, 40).flatmap(lambda L: st.tuples(st.just(L), st.integers(1, L - 1)))
ratios = st.floats(0.05, 0.95)
phases = st.floats(0, 2 * math.pi)


def _z(g, s, p):
    return s * g.r0 * cmath.exp(1j * p)


def test_geometry():
    g = RingGeometry(6, 3)
    assert g.rho == 0.5 and g.r0 == pytest.approx(0.5)
    assert math.exp(g.log_r0) == pytest.approx(g.r0)
    for bad in ((3, 0), (3, 3), (600, 5)):
        with pytest.raises(ValueError):
            RingGeometry(*bad)


def test_quadratic_case():
    g = RingGeometry(2, 1)
    rs = solve_bethe_roots(g, 0.15)
    disc = math.sqrt(1 + 4 * 0.15 ** 2)
    assert rs.left[0] == pytest.approx((-1 - disc) / 2, rel=1e-13)
    assert rs.right[0] == pytest.approx((-1 + disc) / 2, rel=1e-13)
    assert rs.left[0].real == pytest.approx(-1.0220, abs=1e-4)


def test_outside_r0_refused():
    g = RingGeometry(6, 3)
    for z in (0, g.r0, 1.2 * g.r0):
        with pytest.raises(ValueError):
            solve_bethe_roots(g, z)


@settings(max_examples=60, deadline=None)
@given(rings, ratios, phases)
def test_counts_and_identities(LN, s, p):
    g = RingGeometry(*LN)
    rs = solve_bethe_roots(g, _z(g, s, p))
    e = root_identity_errors(rs)
    assert e["counts_ok"]
    # roots very close to 0 or -1 carry a rounding floor eps/|w+1| in the residual
    w = rs.roots
    floor = 8 * np.finfo(float).eps * np.max(np.abs(g.N + (g.L - g.N) * w / (w + 1)))
    assert e["residual"] < max(1e-10, floor)
    assert e["product"] < max(1e-10, floor) and e["power"] < max(1e-10, floor)
    assert np.all(rs.left.real < -g.rho) and np.all(rs.right.real > -g.rho)
    allr = rs.roots
    gaps = np.abs(allr[:, None] - allr[None, :]) + np.eye(allr.size)
    assert gaps.min() > 0


@settings(max_examples=30, deadline=None)
@given(rings, ratios, phases, st.integers(0, 2 ** 31))
def test_l_times_r(LN, s, p, seed):
    g = RingGeometry(*LN)
    rs = solve_bethe_roots(g, _z(g, s, p))
    r = np.random.default_rng(seed)
    w = r.normal(size=20) + 1j * r.normal(size=20)
    lhs = eval_lz(rs, w) * eval_rz(rs, w)
    rhs = 1 - rs.power / (w ** g.N * (w + 1) ** (g.L - g.N))
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(rings, ratios, ratios, phases, phases)
def test_cross_root_product(LN, s1, s2, p1, p2):
    g = RingGeometry(*LN)
    rs = solve_bethe_roots(g, _z(g, s1, p1))
    rp = solve_bethe_roots(g, _z(g, s2, p2))
    if abs(rs.power - rp.power) < 1e-3 * abs(rs.power):
        return
    v = rp.roots
    lhs = rp.power - rs.power
    rhs = np.prod(v[:, None] - rs.left, axis=1) * np.prod(v[:, None] - rs.right, axis=1)
    assert np.allclose(rhs, lhs, rtol=1e-9, atol=1e-9 * abs(lhs))


def test_derivative_identity():
    g = RingGeometry(9, 4)
    rs = solve_bethe_roots(g, 0.6 * g.r0 * cmath.exp(0.4j))
    v = rs.right
    # q_{z,R}(w) = prod over right roots (w - v); its derivative at v_j
    dq = np.array([np.prod(vj - np.delete(v, j)) for j, vj in enumerate(v)])
    assert np.allclose(dq, v ** g.N / (jfun(g, v) * eval_lz(rs, v)), rtol=1e-10)


def test_r_at_foreign_root():
    g = RingGeometry(7, 3)
    rs = solve_bethe_roots(g, 0.5 * g.r0)
    rp = solve_bethe_roots(g, 0.8 * g.r0 * cmath.exp(1j))
    v = rp.right
    assert np.allclose(eval_rz(rs, v), (1 - rs.power / rp.power) / eval_lz(rs, v), rtol=1e-10)


def test_continuation_stable():
    g = RingGeometry(24, 8)
    z = 0.9 * g.r0 * cmath.exp(2.0j)
    a = solve_bethe_roots(g, z, steps=8)
    b = solve_bethe_roots(g, z, steps=16)
    assert np.max(np.abs(a.roots - b.roots)) < 1e-10


def test_ordering_by_argument():
    g = RingGeometry(10, 4)
    rs = solve_bethe_roots(g, 0.7 * g.r0 * cmath.exp(0.3j))
    for part in (rs.left, rs.right):
        ang = np.angle(part + g.rho)
        assert np.all(np.diff(ang) >= 0)


def test_Hz_dispatch_and_singularities():
    g = RingGeometry(6, 3)
    rs = solve_bethe_roots(g, 0.4 * g.r0)
    w = np.array([0.3 + 0.1j, -1.7 + 0.2j, 0.1 - 0.4j])
    h = eval_Hz(rs, w)
    assert h[0] == pytest.approx(eval_lz(rs, w[:1])[0])
    assert h[1] == pytest.approx(eval_rz(rs, w[1:2])[0])
    assert h[2] == pytest.approx(eval_lz(rs, w[2:])[0])
    assert np.all(eval_Hz(None, w) == 1)
    with pytest.raises(ZeroDivisionError):
        eval_lz(rs, -1.0)
    with pytest.raises(ZeroDivisionError):
        eval_rz(rs, 0.0)
    with pytest.raises(ValueError):
        eval_Hz(rs, -g.rho + 0.2j)


def test_json_roundtrip():
    g = RingGeometry(8, 3)
    rs = solve_bethe_roots(g, 0.3 * g.r0 * cmath.exp(0.5j))
    back = BetheRootSet.from_json(rs.to_json())
    assert np.array_equal(back.left, rs.left) and np.array_equal(back.right, rs.right)
    assert back.z == rs.z and back.geom == g
