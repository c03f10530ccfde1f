"""Limiting multi-point distribution of the periodic TASEP height function.

F(x_1..x_m; p_1..p_m) = mean over nested circles |z_m| < ... < |z_1| < 1 of
C(z) det(I - K1 K2), where the kernels live on the roots of exp(-zeta^2/2) = z.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .finite import (DistributionResult, KernelPair, _collect_points, _nb1, _nb2, _result,
                     assemble_kernels, series_det)
from .numerics import DEFAULTS, ContourScheme, nested_contour_integral
from .specfun import A1, A2, Bfun, hfun


@dataclass(frozen=True)
class ScaledQuery:
    """Probe points p_j = (gamma_j, tau_j) with thresholds x_j.

    Times must be non-decreasing; a tie tau_i = tau_{i+1} needs x_i < x_{i+1}.
    """
    gamma: tuple
    tau: tuple
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
        object.__setattr__(self, "tau", tuple(float(v) for v in self.tau))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if not (len(self.gamma) == len(self.tau) == len(self.x) >= 1):
            raise ValueError("gamma, tau and x must have the same positive length")
        if any(t <= 0 for t in self.tau):
            raise ValueError("times tau_j must be positive")
        for i in range(self.m - 1):
            if self.tau[i] > self.tau[i + 1]:
                raise ValueError("times must be non-decreasing (use ScaledQuery.canonical)")
            if self.tau[i] == self.tau[i + 1] and not self.x[i] < self.x[i + 1]:
                raise ValueError("tau_i = tau_{i+1} requires x_i < x_{i+1}; the kernel is not "
                                 "trace class otherwise")

    @property
    def m(self) -> int:
        return len(self.tau)

    @classmethod
    def single(cls, gamma, tau, x):
        return cls((gamma,), (tau,), (x,))

    @classmethod
    def canonical(cls, gamma, tau, x) -> "ScaledQuery":
        """Sort points by (tau, x)."""
        order = sorted(range(len(tau)), key=lambda i: (tau[i], x[i]))
        return cls([gamma[i] for i in order], [tau[i] for i in order], [x[i] for i in order])

    def with_x(self, x) -> "ScaledQuery":
        return ScaledQuery(self.gamma, self.tau, x)

    def drop(self, k: int) -> "ScaledQuery":
        """Remove the k-th point (1-based)."""
        keep = [i for i in range(self.m) if i != k - 1]
        return ScaledQuery([self.gamma[i] for i in keep], [self.tau[i] for i in keep],
                           [self.x[i] for i in keep])

    def increments(self, i: int):
        """(dtau, dgamma, dx) between point i and i-1, with point 0 at the origin."""
        j = i - 1
        if i == 1:
            return self.tau[j], self.gamma[j], self.x[j]
        return (self.tau[j] - self.tau[j - 1], self.gamma[j] - self.gamma[j - 1],
                self.x[j] - self.x[j - 1])

    def to_dict(self):
        return {"gamma": list(self.gamma), "tau": list(self.tau), "x": list(self.x)}


# ---------------------------------------------------------------------------
# root lattices

def _log_f(zeta, dtau, dgamma, dx):
    """log f_i(zeta); the sign flips between the half planes."""
    zeta = np.asarray(zeta, dtype=complex)
    g = -dtau / 3 * zeta ** 3 + dgamma / 2 * zeta ** 2 + dx * zeta
    return np.where(zeta.real < 0, g, -g)


@dataclass
class LimitRootSet:
    z: complex
    left: np.ndarray
    right: np.ndarray
    kmax: int
    radius: float = field(default=0.0)

    @property
    def roots(self):
        return np.concatenate([self.left, self.right])

    def residual(self) -> float:
        r = self.roots
        return float(np.max(np.abs(np.exp(-r * r / 2) - self.z))) if r.size else 0.0

    def to_json(self):
        enc = lambda a: [[float(v.real), float(v.imag)] for v in a]
        return {"z": [self.z.real, self.z.imag], "kmax": self.kmax, "left": enc(self.left),
                "right": enc(self.right)}


def _branch(z: complex, k: int) -> complex:
    # zeta^2 = -2 Log z - 4 pi i k; principal sqrt lands in Re > 0 since |z| < 1
    return cmath.sqrt(-2 * cmath.log(z) - 4j * math.pi * k)


def limit_roots(z: complex, dtau: float = 1.0, dgamma: float = 0.0, dx: float = 0.0,
                f_threshold: float = DEFAULTS.limit_f_threshold, kmax: int | None = None,
                kcap: int = 5000) -> LimitRootSet:
    """Roots of exp(-zeta^2/2) = z split by half plane.

    Branches k = 0, +-1, ... are added until |f| (with the given increments)
    drops below ``f_threshold`` on both signs of k and both half planes.  A
    fixed ``kmax`` overrides the adaptive cut.
    """
    z = complex(z)
    if not 0 < abs(z) < 1:
        raise ValueError("need 0 < |z| < 1")
    if abs(z) > DEFAULTS.polylog_max_radius:
        raise ValueError(f"|z| = {abs(z):.3g} above the supported radius "
                         f"{DEFAULTS.polylog_max_radius}")
    log_thr = math.log(f_threshold)
    ks = [0]
    if kmax is None:
        k = 0
        while True:
            k += 1
            if k > kcap:
                raise ValueError("root lattice did not reach the f threshold; kernel decay too "
                                 "slow (equal times with nearly equal x?)")
            zs = np.array([_branch(z, k), _branch(z, -k)])
            pts = np.concatenate([zs, -zs])
            if np.max(_log_f(pts, dtau, dgamma, dx).real) < log_thr:
                break
            ks += [k, -k]
        kmax = k - 1
    else:
        for k in range(1, kmax + 1):
            ks += [k, -k]
    ks.sort()
    right = np.array([_branch(z, k) for k in ks])
    return LimitRootSet(z, -right, right, kmax, float(np.max(np.abs(right))))


# ---------------------------------------------------------------------------
# C(z)

def eval_C_limit(zs: Sequence[complex], q: ScaledQuery) -> complex:
    """Prefactor C(z) with z_{m+1} = 0."""
    zs = [complex(z) for z in zs]
    m = q.m
    if len(zs) != m:
        raise ValueError("one z per probe point")
    zx = zs + [0j]
    logc = 0j
    pref = 1 + 0j
    for l in range(m):
        z, zn = zx[l], zx[l + 1]
        if z == zn:
            raise ZeroDivisionError("C has a pole at z_l = z_{l+1}")
        pref *= z / (z - zn)
        logc += q.x[l] * A1(z) + q.tau[l] * A2(z) + 2 * Bfun(z, z)
        if zn != 0:
            logc -= q.x[l] * A1(zn) + q.tau[l] * A2(zn) + 2 * Bfun(zn, z)
    return complex(pref * cmath.exp(logc))


# ---------------------------------------------------------------------------
# kernels

def limit_rootsets(zs, q: ScaledQuery, f_threshold=DEFAULTS.limit_f_threshold, kmax=None):
    out = []
    for i, z in enumerate(zs, start=1):
        dt, dg, dx = q.increments(i)
        out.append(limit_roots(z, dt, dg, dx, f_threshold, kmax))
    return out


def _h(zeta, z):
    """h(zeta, z) with the convention h(., 0) = 0."""
    if z == 0:
        return np.zeros(np.shape(zeta), dtype=complex)
    return hfun(zeta, z)


def build_limit_kernels(zs, q: ScaledQuery, rootsets=None, balanced: bool = True,
                        floor: float = DEFAULTS.limit_entry_floor) -> KernelPair:
    """K1 on S2 -> S1 and K2 on S1 -> S2 over truncated root lattices.

    Entries below ``floor`` in modulus are stored as exact zeros.
    """
    m = q.m
    zs = [complex(z) for z in zs]
    if rootsets is None:
        rootsets = limit_rootsets(zs, q)
    pts, owner, side, in_s1 = _collect_points([r.left for r in rootsets],
                                              [r.right for r in rootsets])
    zext = [0j] + zs + [0j]
    logrow = np.empty(pts.size, dtype=complex)
    col1 = np.ones(pts.size, dtype=complex)
    col2 = np.ones(pts.size, dtype=complex)
    for ell in range(1, m + 1):
        sel = owner == ell
        w = pts[sel]
        n1, n2 = _nb1(ell), _nb2(ell)
        z1 = zext[n1] if 0 <= n1 <= m + 1 else 0j
        z2 = zext[n2] if 0 <= n2 <= m + 1 else 0j
        h_own = _h(w, zs[ell - 1])
        h1, h2 = _h(w, z1), _h(w, z2)
        base = _log_f(w, *q.increments(ell)) + 2 * h_own - np.log(w)
        logrow[sel] = base - np.where(in_s1[sel], h1, h2)
        col1[sel] = (1 - z1 / zs[ell - 1]) * np.exp(-h1)
        col2[sel] = (1 - z2 / zs[ell - 1]) * np.exp(-h2)
    return assemble_kernels(pts, owner, side, in_s1, logrow, col1, col2, balanced, floor)


def eval_D_limit(zs, q: ScaledQuery, rootsets=None) -> complex:
    return build_limit_kernels(zs, q, rootsets).fredholm_det()


def eval_D_series_limit(zs, q: ScaledQuery, n_cap: int = 3, rootsets=None) -> complex:
    """Truncated series sum_n D_n / (n!)^2 with every n_l <= n_cap."""
    if n_cap > 4:
        raise ValueError("n_cap is limited to 4")
    zs = [complex(z) for z in zs]
    m = q.m
    if rootsets is None:
        rootsets = limit_rootsets(zs, q)
    fl, fr, gpl, gpr, gnl, gnr, qp = [], [], [], [], [], [], [None]
    for ell, rs in enumerate(rootsets, start=1):
        z = zs[ell - 1]
        inc = q.increments(ell)
        for p, dst in ((rs.left, fl), (rs.right, fr)):
            dst.append(np.exp(_log_f(p, *inc) + 2 * _h(p, z)) / p)
        zp = zs[ell - 2] if ell >= 2 else 0j
        zn = zs[ell] if ell < m else 0j
        gpl.append(np.exp(-_h(rs.left, zp)))
        gpr.append(np.exp(-_h(rs.right, zp)))
        gnl.append(np.exp(-_h(rs.left, zn)))
        gnr.append(np.exp(-_h(rs.right, zn)))
        if ell >= 2:
            qp.append((1 - z / zp, 1 - zp / z))
    return series_det([r.left for r in rootsets], [r.right for r in rootsets],
                      fl, fr, gpl, gpr, gnl, gnr, qp, n_cap)


# ---------------------------------------------------------------------------
# F and its variants

def default_limit_radii(m: int):
    """|z_j| = 0.8 * 0.6^(j-1)."""
    return [0.8 * 0.6 ** j for j in range(m)]


def _integrand(q: ScaledQuery, f_threshold, kmax):
    def f(*zs):
        rs = limit_rootsets(zs, q, f_threshold, kmax)
        return eval_C_limit(zs, q) * eval_D_limit(zs, q, rs)
    return f


def _check_radii(radii):
    for r in radii:
        if not 0 < r <= 0.9:
            raise ValueError("limit contour radii must lie in (0, 0.9]")


def eval_F(q: ScaledQuery, x=None, scheme: ContourScheme | None = None,
           f_threshold: float = DEFAULTS.limit_f_threshold, kmax: int | None = None
           ) -> DistributionResult:
    """F(x; p) over nested circles 0 < |z_m| < ... < |z_1| <= 0.9."""
    if x is not None:
        q = q.with_x(x)
    if scheme is None:
        scheme = ContourScheme(default_limit_radii(q.m), adaptive=q.m == 1)
    if len(scheme.radii) != q.m:
        raise ValueError("one radius per probe point")
    _check_radii(scheme.radii)
    if any(scheme.radii[j] <= scheme.radii[j + 1] for j in range(q.m - 1)):
        raise ValueError("radii must be strictly decreasing")
    res = nested_contour_integral(_integrand(q, f_threshold, kmax), scheme)
    return _result(res, scheme.radii)


def signed_limit_radii(signs: Sequence[str], base: float = 0.8, ratio: float = 0.6):
    rank = [0]
    for s in signs[:-1]:
        rank.append(rank[-1] - 1 if s == "-" else rank[-1] + 1)
    top = max(rank)
    return [base * ratio ** (top - r) for r in rank]


def eval_F_mixed(q: ScaledQuery, x=None, signs: Sequence[str] = (), scheme=None,
                 f_threshold: float = DEFAULTS.limit_f_threshold, kmax=None
                 ) -> DistributionResult:
    """Limit of P(E_1 .. E_m) with E_j^- = {height variable <= x_j}, E_j^+ its complement.

    The last sign must be '-'.  Contours satisfy |z_j| > |z_{j+1}| after '-'
    and |z_j| < |z_{j+1}| after '+'; the result carries (-1)^(number of '+').
    """
    if x is not None:
        q = q.with_x(x)
    signs = list(signs) or ["-"] * q.m
    if len(signs) != q.m or any(s not in "+-" for s in signs):
        raise ValueError("one sign '+' or '-' per probe point")
    if signs[-1] != "-":
        raise ValueError("the last event must be '-'")
    if scheme is None:
        scheme = ContourScheme(signed_limit_radii(signs), adaptive=q.m == 1)
    _check_radii(scheme.radii)
    for j in range(q.m - 1):
        a, b = scheme.radii[j], scheme.radii[j + 1]
        if (signs[j] == "-" and a <= b) or (signs[j] == "+" and a >= b):
            raise ValueError("radii ordering inconsistent with event signs")
    res = nested_contour_integral(_integrand(q, f_threshold, kmax), scheme)
    return _result(res, scheme.radii, (-1.0) ** signs.count("+"))


def contour_exchange_residual(q: ScaledQuery, k: int = 1, nodes: int = 48) -> dict:
    """F^(m) - [F^(m-1) without point k + integral with |z_k| < |z_{k+1}|]."""
    if not 1 <= k < q.m:
        raise ValueError("need 1 <= k < m")
    radii = default_limit_radii(q.m)
    sw = list(radii)
    # z_k moves just inside z_{k+1}; the others keep their order
    sw[k - 1] = radii[k] * 0.6
    for j in range(k + 1, q.m):
        sw[j] = radii[j] * 0.6 ** 2
    lhs = eval_F(q, scheme=ContourScheme(radii, nodes, adaptive=False)).value
    f1 = eval_F(q.drop(k), scheme=ContourScheme(default_limit_radii(q.m - 1), nodes,
                                                adaptive=False)).value
    swapped = nested_contour_integral(_integrand(q, DEFAULTS.limit_f_threshold, None),
                                      ContourScheme(sw, nodes, adaptive=False)).value.real
    return {"F_m": lhs, "F_m_minus_1": f1, "swapped": swapped, "residual": abs(lhs - f1 - swapped)}


def check_consistency(q2: ScaledQuery, x1: float, X_large=(3, 4, 5, 6), nodes=(64, 32),
                      radii=(0.8, 0.2)) -> dict:
    """Gap F^(1)(x1) - F^(2)(x1, X) as the second threshold X grows.

    The gap is integrated directly as mean[C2 D2 - C1 D1] on shared z_1 nodes,
    so the quadrature error is relative to the gap rather than to F.  The
    z_2 circle is kept well inside z_1 (the integrand has a pole at z_1 = z_2).
    """
    if q2.m != 2:
        raise ValueError("two-point query expected")
    q1 = q2.drop(2).with_x([x1])
    th1 = 2 * np.pi * np.arange(nodes[0]) / nodes[0]
    th2 = 2 * np.pi * np.arange(nodes[1]) / nodes[1]
    z1s = radii[0] * np.exp(1j * th1)
    z2s = radii[1] * np.exp(1j * th2)
    one = np.array([eval_C_limit([a], q1) * eval_D_limit([a], q1) for a in z1s])
    f1 = float(one.mean().real)
    gaps, f2s = {}, {}
    for X in X_large:
        q = q2.with_x([x1, X])
        integ = _integrand(q, DEFAULTS.limit_f_threshold, None)
        inner = np.array([np.mean([integ(a, b) for b in z2s]) for a in z1s])
        diff = complex(np.mean(one - inner))
        gaps[float(X)] = abs(diff)
        f2s[float(X)] = f1 - diff.real
    vals = [gaps[float(X)] for X in X_large]
    return {"F1": f1, "F2": f2s, "gaps": gaps,
            "decreasing": all(a > b for a, b in zip(vals, vals[1:]))}


def check_residue_collapse(z: complex, q: ScaledQuery, k: int = 1,
                           deltas=(1e-2, 1e-3, 1e-4)) -> dict:
    """D^(m) at z_k = z_{k+1}(1 + delta) against D^(m-1) with point k removed.

    Richardson-extrapolates in delta (linear error model).
    """
    if q.m < 2 or not 1 <= k < q.m:
        raise ValueError("need m >= 2 and 1 <= k < m")
    zs = list(default_limit_radii(q.m))
    zs = [complex(v) * cmath.exp(0.3j * (i + 1)) for i, v in enumerate(zs)]
    zs[k] = complex(z)
    target_zs = zs[:k - 1] + zs[k:]
    target = eval_D_limit(target_zs, q.drop(k))
    vals = []
    for d in deltas:
        zz = list(zs)
        zz[k - 1] = zs[k] * (1 + d)
        vals.append(eval_D_limit(zz, q))
    ratio = deltas[-2] / deltas[-1]
    rich = (ratio * vals[-1] - vals[-2]) / (ratio - 1)
    # C residue: (z_k - z_{k+1}) C^(m) -> z_{k+1} C^(m-1), same extrapolation
    cvals = []
    for d in deltas[-2:]:
        zz = list(zs)
        zz[k - 1] = zs[k] * (1 + d)
        cvals.append((zz[k - 1] - zz[k]) * eval_C_limit(zz, q))
    cres = (ratio * cvals[-1] - cvals[-2]) / (ratio - 1)
    ctarget = zs[k] * eval_C_limit(target_zs, q.drop(k))
    return {"D_target": complex(target), "D_values": [complex(v) for v in vals],
            "D_extrapolated": complex(rich), "D_error": abs(rich - target),
            "C_residue_error": abs(cres - ctarget) / abs(ctarget)}
