import cmath
import math

import numpy as np
import pytest

from ptasep.limit import (ScaledQuery, check_residue_collapse, eval_C_limit, eval_D_limit,
                          eval_D_series_limit, eval_F, eval_F_mixed, limit_roots,
                          limit_rootsets, signed_limit_radii)
from ptasep.numerics import ContourScheme


def test_query_validation():
    with pytest.raises(ValueError):
        ScaledQuery((0, 0), (1, 1), (0.5, 0.5))
    with pytest.raises(ValueError):
        ScaledQuery.single(0, 0, 0)
    with pytest.raises(ValueError):
        ScaledQuery((0, 0), (2, 1), (0, 0))
    with pytest.raises(ValueError):
        ScaledQuery((0,), (1, 2), (0, 0))
    ScaledQuery((0, 0), (1, 1), (0.0, 0.5))
    q = ScaledQuery.canonical((0.1, 0.2), (2.0, 1.0), (1.0, -1.0))
    assert q.tau == (1.0, 2.0) and q.gamma == (0.2, 0.1)
    assert q.increments(2) == pytest.approx((1.0, -0.1, 2.0))
    assert q.drop(1).to_dict() == {"gamma": [0.1], "tau": [2.0], "x": [1.0]}


def test_limit_roots_real_z():
    rs = limit_roots(0.4, kmax=50)
    k0 = math.sqrt(-2 * math.log(0.4))
    assert abs(rs.right[50] - k0) < 1e-14 and abs(rs.left[50] + k0) < 1e-14
    assert rs.residual() < 1e-13
    assert np.all(rs.right.real > 0) and np.all(rs.left.real < 0)
    # far branches approach the diagonals
    assert abs(cmath.phase(rs.right[-1]) + math.pi / 4) < 0.05
    assert abs(cmath.phase(rs.right[0]) - math.pi / 4) < 0.05
    assert abs(cmath.phase(rs.left[0]) - 3 * math.pi / 4) < 0.05 or \
        abs(cmath.phase(rs.left[-1]) - 3 * math.pi / 4) < 0.05


def test_limit_roots_adaptive_and_errors():
    rs = limit_roots(0.5 * cmath.exp(1j), 1.0, 0.0, 0.0)
    assert rs.kmax >= 1 and rs.residual() < 1e-12
    assert len(rs.left) == len(rs.right) == 2 * rs.kmax + 1
    for bad in (0, 1.0, 1.2):
        with pytest.raises(ValueError):
            limit_roots(bad)


def test_C_single_point_and_pole():
    q = ScaledQuery.single(0.0, 1.0, 0.3)
    c = eval_C_limit([0.5], q)
    assert np.isfinite(c)
    q2 = ScaledQuery((0, 0), (1, 2), (0, 0))
    with pytest.raises(ZeroDivisionError):
        eval_C_limit([0.3, 0.3], q2)
    with pytest.raises(ValueError):
        eval_C_limit([0.3], q2)


def test_residue_collapse():
    q = ScaledQuery((0.0, 0.1), (1.0, 1.5), (0.0, 0.4))
    r = check_residue_collapse(0.3 * cmath.exp(0.7j), q)
    assert r["D_error"] < 1e-4 * max(1, abs(r["D_target"]))
    assert r["C_residue_error"] < 1e-4


@pytest.mark.parametrize("m", [1, 2])
def test_series_matches_fredholm(m):
    q = ScaledQuery.single(0.0, 1.0, 0.5) if m == 1 else ScaledQuery((0, 0.2), (1, 1.4), (0.5, 0.3))
    zs = [0.5 * cmath.exp(0.4j), 0.2 * cmath.exp(-1.1j)][:m]
    # with three roots per half plane at m=2 the capped series is complete
    rs = limit_rootsets(zs, q, kmax=6 if m == 1 else 1)
    fred = eval_D_limit(zs, q, rs)
    ser = eval_D_series_limit(zs, q, n_cap=3, rootsets=rs)
    assert abs(fred - ser) < 1e-8
    with pytest.raises(ValueError):
        eval_D_series_limit(zs, q, n_cap=5, rootsets=rs)


def test_F_tails_and_range():
    q = ScaledQuery.single(0.0, 1.0, 0.0)
    lo = eval_F(q, x=[-6.0]).value
    mid = eval_F(q).value
    hi = eval_F(q, x=[3.0]).value
    assert 0 <= lo < 0.01
    assert lo < mid < hi <= 1 + 1e-9
    assert hi > 0.99


def test_F_radius_invariance():
    q = ScaledQuery.single(0.3, 1.2, -0.5)
    a = eval_F(q).value
    b = eval_F(q, scheme=ContourScheme([0.55], adaptive=True)).value
    assert abs(a - b) < 1e-6


def test_mixed_all_minus_equals_F():
    q = ScaledQuery((0.0, 0.1), (1.0, 1.5), (0.0, 0.4))
    s = ContourScheme([0.8, 0.48], 32, adaptive=False)
    assert eval_F_mixed(q, signs="--", scheme=s).value == pytest.approx(
        eval_F(q, scheme=s).value, abs=1e-13)


def test_radii_validation():
    q = ScaledQuery((0.0, 0.1), (1.0, 1.5), (0.0, 0.4))
    with pytest.raises(ValueError):
        eval_F(q, scheme=ContourScheme([0.3, 0.5], 16, adaptive=False))
    with pytest.raises(ValueError):
        eval_F(q.drop(2), scheme=ContourScheme([0.95], 16, adaptive=False))
    with pytest.raises(ValueError):
        eval_F_mixed(q, signs="+-", scheme=ContourScheme([0.8, 0.48], 16, adaptive=False))
    with pytest.raises(ValueError):
        eval_F_mixed(q, signs="-+")
    assert signed_limit_radii("+-") == pytest.approx([0.48, 0.8])
    assert signed_limit_radii("--") == pytest.approx([0.8, 0.48])
