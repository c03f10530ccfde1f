import cmath
import math

import mpmath
import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings, strategies as st

from ptasep.specfun import A1, A2, Bfun, erfcx_complex, hfun, hfun_quad, polylog

disc = st.tuples(st.floats(0, 0.9), st.floats(0, 2 * math.pi)).map(
    lambda t: t[0] * cmath.exp(1j * t[1]))


def test_polylog_zero_and_orders():
    for s in (0.5, 1.5, 2.5):
        assert polylog(s, 0) == 0
    with pytest.raises(ValueError):
        polylog(2.0, 0.1)
    with pytest.raises(ValueError):
        polylog(0.5, 0.96)


def test_polylog_half_partial_sum():
    k = np.arange(1, 10 ** 6 + 1, dtype=float)
    with np.errstate(under="ignore"):
        brute = np.sum(0.1 ** k / np.sqrt(k))
    assert polylog(0.5, 0.1) == pytest.approx(brute, rel=1e-14)


def test_polylog_integral_representation():
    z = 0.5
    integral = scipy.integrate.quad(lambda x: math.sqrt(x) * math.exp(-x) / (1 - z * math.exp(-x)), 0, np.inf,
                                    epsabs=1e-14, epsrel=1e-13)[0]
    assert polylog(1.5, z).real == pytest.approx(z / math.gamma(1.5) * integral, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(disc, st.sampled_from([0.5, 1.5, 2.5]))
def test_polylog_vs_mpmath(z, s):
    ref = complex(mpmath.polylog(s, z))
    assert abs(polylog(s, z) - ref) <= 1e-13 * max(1, abs(ref))


def test_A_functions():
    assert A1(0) == 0 and A2(0) == 0
    k = np.arange(1, 200)
    assert A1(0.3) == pytest.approx(-np.sum(0.3 ** k / k ** 1.5) / math.sqrt(2 * math.pi))
    assert abs(complex(A2(0.7)).imag) == 0


@settings(max_examples=30, deadline=None)
@given(disc, disc)
def test_B_symmetric(z, zp):
    assert abs(Bfun(z, zp) - Bfun(zp, z)) < 1e-15
    assert Bfun(0, zp) == 0


def test_B_diagonal_integral():
    z = 0.4
    f = lambda y: polylog(0.5, y).real ** 2 / y
    integral = scipy.integrate.quad(f, 0, z, epsabs=1e-14, epsrel=1e-13)[0]
    assert Bfun(z, z).real == pytest.approx(integral / (4 * math.pi), abs=1e-9)


def test_erfcx():
    assert erfcx_complex(0) == pytest.approx(1)
    for u in (1.0, 2.0, 5.0):
        ref = float(mpmath.exp(u * u) * mpmath.erfc(u))
        assert erfcx_complex(u).real == pytest.approx(ref, rel=1e-13)
    u = 1.3 - 2.2j
    assert erfcx_complex(u) == pytest.approx(np.conj(erfcx_complex(np.conj(u))))


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 30), st.floats(0, 2 * math.pi))
def test_erfcx_vs_mpmath(r, p):
    u = r * cmath.exp(1j * p)
    if u.real < 0 and abs(u) > 5:
        return  # exp(u^2) overflows in the left half plane; not used by h
    ref = complex(mpmath.exp(mpmath.mpc(u) ** 2) * mpmath.erfc(mpmath.mpc(u)))
    assert abs(erfcx_complex(u) - ref) <= 1e-12 * abs(ref)


def test_h_basic():
    assert hfun(-1.5, 0) == 0
    assert hfun(-1.5 + 0.3j, 0.4) == pytest.approx(hfun(1.5 - 0.3j, 0.4))
    with pytest.raises(ValueError):
        hfun(0.5j, 0.3)


def test_h_vs_quadrature():
    assert hfun(-1.5, 0.4) == pytest.approx(hfun_quad(-1.5, 0.4), abs=1e-8)
    zeta, z = -0.8 + 1.1j, 0.6 * cmath.exp(0.9j)
    assert hfun(zeta, z) == pytest.approx(hfun_quad(zeta, z), abs=1e-8)


@pytest.mark.parametrize("arg", [math.pi / 4, -math.pi / 4, 3 * math.pi / 4, -3 * math.pi / 4])
def test_h_decay(arg):
    vals = [abs(hfun(R * cmath.exp(1j * arg), 0.7)) * R for R in (5, 10, 20)]
    assert max(vals) < 1.0


@settings(max_examples=20, deadline=None)
@given(disc, st.floats(0.3, 2.5), st.floats(-2, 2))
def test_cauchy_riemann(z, re, im):
    """Analyticity in z: d/dx and -i d/dy agree."""
    zeta = complex(-re, im)
    eps = 1e-6
    if abs(z) > 0.85:
        return
    for f in (lambda w: polylog(0.5, w), A1, A2, lambda w: Bfun(w, 0.3 + 0.2j),
              lambda w: hfun(zeta, w)):
        dx = (f(z + eps) - f(z - eps)) / (2 * eps)
        dy = (f(z + 1j * eps) - f(z - 1j * eps)) / (2j * eps)
        assert abs(dx - dy) <= 1e-6 * max(1.0, abs(dx))
