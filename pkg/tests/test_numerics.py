import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptasep.numerics import (DEFAULTS, ContourScheme, Tolerances, cauchy_det, cauchy_matrix,
                             circle_nodes, det_complex, nested_contour_integral)

finite = st.floats(-3, 3, allow_nan=False)


def test_det_conventions():
    assert det_complex(np.zeros((0, 0))) == 1
    assert det_complex(np.eye(3)) == pytest.approx(1)
    with pytest.raises(ValueError):
        det_complex(np.ones((2, 3)))


def test_cauchy_small_cases():
    assert cauchy_det([1], [0]) == pytest.approx(1)
    # det [[1/2, 1], [1/3, 1/2]] = 1/4 - 1/3
    assert cauchy_det([2, 3], [0, 1]) == pytest.approx(-1 / 12)
    with pytest.raises(ValueError):
        cauchy_det([1, 1], [0, 2])


def test_cauchy_closed_form_random(rng):
    for _ in range(20):
        x = rng.normal(size=4) + 1j * rng.normal(size=4)
        y = rng.normal(size=4) + 1j * rng.normal(size=4)
        d = det_complex(cauchy_matrix(x, y))
        assert abs(cauchy_det(x, y) - d) <= 1e-12 * abs(d)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 31))
def test_det_multiplicative(n, seed):
    r = np.random.default_rng(seed)
    A = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    B = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    lhs = det_complex(A @ B)
    assert abs(lhs - det_complex(A) * det_complex(B)) <= 1e-10 * max(abs(lhs), 1e-300)


@settings(max_examples=40, deadline=None)
@given(st.integers(-15, 15), st.floats(0.1, 2.0), st.floats(0, 6.3))
def test_trapezoid_exact_on_monomials(k, r, phase):
    s = ContourScheme([r], 16, adaptive=False, phase=phase)
    v = nested_contour_integral(lambda z: z ** k, s).value
    assert abs(v - (1 if k == 0 else 0)) < 1e-12 * max(1, r ** k)


def test_nested_geometric_kernel():
    s = ContourScheme([0.9, 0.3], 32, adaptive=False)
    v = nested_contour_integral(lambda a, b: a / (a - b), s).value
    assert v == pytest.approx(1, abs=1e-14)


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 6.3))
def test_phase_invariance(phase):
    f = lambda a, b: cmath.exp(a + 2 * b) / (1 - 0.5 * a * b)
    base = nested_contour_integral(f, ContourScheme([0.8, 0.4], 16, tol=1e-12)).value
    rot = nested_contour_integral(f, ContourScheme([0.8, 0.4], 16, tol=1e-12, phase=phase)).value
    assert abs(base - rot) < 1e-10


def test_adaptive_reports_history():
    f = lambda z: 1 / (1 - 0.95 * z)
    res = nested_contour_integral(f, ContourScheme([0.99], 8, tol=1e-12, max_doublings=9))
    assert res.converged and res.value == pytest.approx(1)
    assert [n for n, _ in res.history] == [8 << i for i in range(len(res.history))]


def test_adaptive_flags_nonconvergence():
    f = lambda z: 1 / (1 - 0.95 * z)
    res = nested_contour_integral(f, ContourScheme([0.99], 8, tol=1e-12, max_doublings=3))
    assert not res.converged and res.delta > 1e-12


def test_vectorized_path():
    s = ContourScheme([0.5], 32, adaptive=False)
    v = nested_contour_integral(lambda cs: np.exp(cs[0]), s, vectorized=True).value
    assert v == pytest.approx(1)


def test_scheme_validation():
    with pytest.raises(ValueError):
        ContourScheme([-1.0])
    with pytest.raises(ValueError):
        ContourScheme([0.5], nodes_per_circle=48)
    ContourScheme([0.5], nodes_per_circle=48, adaptive=False)


def test_tolerances_roundtrip():
    t = Tolerances(quad_tol=1e-9)
    assert Tolerances.from_json(t.to_json()) == t
    assert DEFAULTS.max_L == 512 and DEFAULTS.max_N == 64


def test_circle_nodes():
    z = circle_nodes(0.5, 8)
    assert np.allclose(np.abs(z), 0.5) and z[0] == pytest.approx(0.5)
