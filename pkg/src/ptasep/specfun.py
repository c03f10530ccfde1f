"""Polylogarithms of order 1/2, 3/2, 5/2 and the functions A1, A2, B, h."""
from __future__ import annotations

import functools
import math

import numpy as np
import scipy.integrate
import scipy.special

from .numerics import DEFAULTS

_ORDERS = (0.5, 1.5, 2.5)
SQRT2PI = math.sqrt(2 * math.pi)


def _check_radius(z, what="z"):
    r = np.max(np.abs(z)) if np.size(z) else 0.0
    if r > DEFAULTS.polylog_max_radius + 1e-15:
        raise ValueError(f"|{what}| = {r:.4g} exceeds {DEFAULTS.polylog_max_radius}")
    return r


def _n_terms(r: float, eps: float = 1e-17) -> int:
    """Smallest K with r^K below eps*(1-r), so the geometric tail is negligible."""
    if r == 0:
        return 1
    return max(1, int(math.ceil(math.log(eps * (1 - r)) / math.log(r))) + 1)


def polylog(s: float, z):
    """Li_s(z) = sum_{k>=1} z^k / k^s for s in {1/2, 3/2, 5/2}, |z| <= 0.95."""
    if s not in _ORDERS:
        raise ValueError(f"order {s} not supported; use one of {_ORDERS}")
    z = np.asarray(z, dtype=complex)
    r = _check_radius(z)
    K = _n_terms(r)
    k = np.arange(1, K + 1)
    # Horner in z keeps this O(K) per point without forming powers
    coef = k.astype(float) ** (-s)
    out = np.zeros_like(z)
    for c in coef[::-1]:
        out = (out + c) * z
    return out if out.ndim else complex(out)


def A1(z):
    return -polylog(1.5, z) / SQRT2PI


def A2(z):
    return -polylog(2.5, z) / SQRT2PI


@functools.lru_cache(maxsize=16)
def _bmatrix(K):
    k = np.arange(1, K + 1, dtype=float)
    return 1.0 / (k[:, None] + k[None, :]), 1.0 / np.sqrt(k)


def Bfun(z, zp):
    """(1/4pi) sum_{k,k'>=1} z^k zp^k' / ((k+k') sqrt(k k'))."""
    z = np.asarray(z, dtype=complex)
    zp = np.asarray(zp, dtype=complex)
    r = max(_check_radius(z), _check_radius(zp, "zp"))
    if r == 0:
        return np.zeros(np.broadcast(z, zp).shape, dtype=complex) if np.ndim(z) or np.ndim(zp) else 0j
    # tail of either index beyond K is at most r^(K+1)/(1-r)^2
    K = max(1, int(math.ceil(math.log(1e-17 * (1 - r) ** 2) / math.log(r))))
    M, isq = _bmatrix(K)
    k = np.arange(1, K + 1)
    zb, zpb = np.broadcast_arrays(z, zp)
    a = (zb[..., None] ** k) * isq
    b = (zpb[..., None] ** k) * isq
    out = np.einsum("...i,ij,...j->...", a, M, b) / (4 * math.pi)
    return out if out.ndim else complex(out)


def erfcx_complex(u):
    """Scaled complementary error function exp(u^2) erfc(u) for complex u."""
    u = np.asarray(u, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.special.erfcx(u)
    if not np.all(np.isfinite(out)):
        raise OverflowError("erfcx overflow; argument outside the representable region")
    return out if out.ndim else complex(out)


def hfun(zeta, z):
    """h(zeta, z) through the series -1/2 sum_k z^k/k erfcx(sqrt(k/2) * (-zeta)).

    The function is even in zeta, so both half planes use -|Re| orientation.
    """
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if np.any(zeta.real == 0):
        raise ValueError("h is undefined on Re(zeta) = 0")
    zeta = np.where(zeta.real > 0, -zeta, zeta)
    zb, zetab = np.broadcast_arrays(z, zeta)
    r = _check_radius(zb)
    shape = zb.shape
    if r == 0:
        out = np.zeros(shape, dtype=complex)
        return out if out.ndim else 0j
    K = _n_terms(r, 1e-18)
    k = np.arange(1, K + 1)
    zf = zb.reshape(-1, 1)
    arg = -np.sqrt(k / 2.0) * zetab.reshape(-1, 1)
    # erfcx is bounded by ~1 for Re(arg) > 0, so terms decay like |z|^k
    terms = (zf ** k) / k * erfcx_complex(arg)
    out = (-0.5 * terms.sum(axis=1)).reshape(shape)
    return out if out.ndim else complex(out)


def hfun_quad(zeta: complex, z: complex) -> complex:
    """h(zeta, z) by direct quadrature; used only as a reference.

    Integrates -(2pi)^(-1/2) Li_{1/2}(z e^{(zeta^2 - y^2)/2}) over y from -inf to
    Re zeta along the real axis and then vertically up to zeta.
    """
    zeta = complex(zeta)
    if zeta.real > 0:
        zeta = -zeta
    if zeta.real == 0:
        raise ValueError("h is undefined on Re(zeta) = 0")
    x0 = zeta.real

    def li(y):
        return polylog(0.5, z * np.exp((zeta * zeta - y * y) / 2))

    def cquad(fun, a, b):
        re = scipy.integrate.quad(lambda t: fun(t).real, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
        im = scipy.integrate.quad(lambda t: fun(t).imag, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
        return complex(re, im)

    total = cquad(lambda y: li(complex(y)), -np.inf, x0)
    if zeta.imag != 0:
        total += cquad(lambda s: li(complex(x0, s)) * 1j, 0.0, zeta.imag)
    return -total / SQRT2PI
