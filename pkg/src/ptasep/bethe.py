"""Roots of w^N (w+1)^(L-N) = z^L and the products built on them."""
from __future__ import annotations

import cmath
import functools
import json
import math
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULTS


class RootSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class RingGeometry:
    L: int
    N: int

    def __post_init__(self):
        if not (0 < self.N < self.L):
            raise ValueError(f"need 0 < N < L, got L={self.L}, N={self.N}")
        if self.L > DEFAULTS.max_L or self.N > DEFAULTS.max_N:
            raise ValueError(f"L={self.L}, N={self.N} exceed caps "
                             f"L<={DEFAULTS.max_L}, N<={DEFAULTS.max_N}")

    @property
    def rho(self) -> float:
        return self.N / self.L

    @property
    def r0(self) -> float:
        rho = self.rho
        return rho ** rho * (1 - rho) ** (1 - rho)

    @property
    def log_r0(self) -> float:
        rho = self.rho
        return rho * math.log(rho) + (1 - rho) * math.log1p(-rho)


@dataclass(frozen=True, eq=False)
class BetheRootSet:
    """Left (Re w < -rho) and right (Re w > -rho) roots for one value of z^L.

    ``log_power`` is a logarithm of z^L, which is all the roots depend on.
    ``z`` is kept when the set was built from z itself.
    """

    geom: RingGeometry
    log_power: complex
    left: np.ndarray
    right: np.ndarray
    residual: float
    z: complex | None = None

    @property
    def power(self) -> complex:
        return cmath.exp(self.log_power)

    @property
    def roots(self) -> np.ndarray:
        return np.concatenate([self.left, self.right])

    def to_json(self) -> str:
        def enc(a):
            return [[float(v.real), float(v.imag)] for v in a]
        d = {
            "L": self.geom.L, "N": self.geom.N,
            "z": None if self.z is None else [self.z.real, self.z.imag],
            "log_power": [self.log_power.real, self.log_power.imag],
            "left": enc(self.left), "right": enc(self.right),
            "residual": self.residual,
        }
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "BetheRootSet":
        d = json.loads(text)
        dec = lambda a: np.array([complex(x, y) for x, y in a], dtype=complex)
        z = None if d["z"] is None else complex(*d["z"])
        return cls(RingGeometry(d["L"], d["N"]), complex(*d["log_power"]),
                   dec(d["left"]), dec(d["right"]), d["residual"], z)


def _newton_branch(c, kappa, flip, steps, maxit):
    """Solve s*w*(w+1)**kappa = c (right) or (w+1)*(-w)**kappa = c (left).

    Continuation in s from small to 1; principal powers are analytic on
    the respective component so each c picks out exactly one root.
    """
    c = np.asarray(c, dtype=complex)
    if flip:
        # unknown u = w + 1, equation u * (1-u)**kappa = c
        def g(u, cc):
            return u * (1 - u) ** kappa - cc, (1 - u) ** (kappa - 1) * (1 - u - kappa * u)
    else:
        def g(u, cc):
            return u * (1 + u) ** kappa - cc, (1 + u) ** (kappa - 1) * (1 + u + kappa * u)
    u = c / steps
    for s in np.arange(1, steps + 1) / steps:
        cc = s * c
        for _ in range(maxit):
            val, der = g(u, cc)
            du = val / der
            u = u - du
            if np.all(np.abs(du) <= 1e-15 * np.maximum(1.0, np.abs(u))):
                break
    return u - 1 if flip else u


def _polish(w, N, L, log_power, maxit=4):
    for _ in range(maxit):
        phi = N * np.log(w) + (L - N) * np.log(w + 1) - log_power
        phi = phi - 2j * np.pi * np.round(phi.imag / (2 * np.pi))
        dw = phi / (N / w + (L - N) / (w + 1))
        w = w - dw
        if np.all(np.abs(dw) < 1e-16 * np.abs(w) + 1e-300):
            break
    return w


def residuals(geom: RingGeometry, w, log_power) -> np.ndarray:
    """|w^N (w+1)^(L-N) / z^L - 1| evaluated in log form."""
    N, L = geom.N, geom.L
    phi = N * np.log(w) + (L - N) * np.log(w + 1) - log_power
    return np.abs(np.expm1(phi - 2j * np.pi * np.round(phi.imag / (2 * np.pi))))


@functools.lru_cache(maxsize=50000)
def _roots_cached(L, N, lp_re, lp_im, steps):
    geom = RingGeometry(L, N)
    log_power = complex(lp_re, lp_im)
    tol = DEFAULTS.root_residual
    if log_power.real >= L * geom.log_r0:
        raise ValueError(f"|z| must be below r0={geom.r0:.6g}")
    rho = geom.rho
    jr = np.arange(N)
    c = np.exp((log_power + 2j * np.pi * jr) / N)
    right = _newton_branch(c, (L - N) / N, False, steps, DEFAULTS.root_newton_maxit)
    jl = np.arange(L - N)
    d = np.exp((log_power + 1j * np.pi * N + 2j * np.pi * jl) / (L - N))
    left = _newton_branch(d, N / (L - N), True, steps, DEFAULTS.root_newton_maxit)
    right = _polish(right, N, L, log_power)
    left = _polish(left, N, L, log_power)
    if np.any(right.real <= -rho) or np.any(left.real >= -rho):
        raise RootSolverError("root classification failed; continuation left its component")
    right = right[np.argsort(np.angle(right + rho))]
    left = left[np.argsort(np.angle(left + rho))]
    allr = np.concatenate([left, right])
    resid = residuals(geom, allr, log_power)
    res = float(resid.max())
    # a root within one ulp can still leave |phi| ~ eps |w phi'(w)|, which is
    # large when w+1 or w is tiny; such roots are as good as double allows
    floor = 8 * np.finfo(float).eps * np.abs(allr) * np.abs(N / allr + (L - N) / (allr + 1))
    if not np.isfinite(res) or np.any(resid > np.maximum(tol, floor)):
        raise RootSolverError(f"Newton did not converge: residual {res:.3g}")
    # roots cluster at 0 and -1 for small |z|, so separation is measured
    # relative to the distance from the nearer cluster point
    scale = np.minimum(np.abs(allr), np.abs(allr + 1))
    gaps = np.abs(allr[:, None] - allr[None, :]) / np.maximum(scale[:, None], scale[None, :])
    if (gaps + np.eye(L)).min() < 1e-12:
        raise RootSolverError("coincident roots")
    left.setflags(write=False)
    right.setflags(write=False)
    return BetheRootSet(geom, log_power, left, right, res)


def roots_from_log_power(geom: RingGeometry, log_power: complex,
                         steps: int | None = None) -> BetheRootSet:
    """Root set for z^L = exp(log_power)."""
    steps = steps or DEFAULTS.root_continuation_steps
    lp = complex(log_power)
    # canonical branch so that cache keys agree
    lp = complex(lp.real, math.remainder(lp.imag, 2 * math.pi))
    return _roots_cached(geom.L, geom.N, lp.real, lp.imag, steps)


def roots_from_unit_power(geom: RingGeometry, u: complex) -> BetheRootSet:
    """Root set for z^L = r0^L * u, i.e. u = (z/r0)^L with 0 < |u| < 1."""
    u = complex(u)
    if not 0 < abs(u) < 1:
        raise ValueError("need 0 < |u| < 1")
    return roots_from_log_power(geom, geom.L * geom.log_r0 + cmath.log(u))


def solve_bethe_roots(geom: RingGeometry, z: complex, steps: int | None = None) -> BetheRootSet:
    z = complex(z)
    if z == 0 or abs(z) >= geom.r0:
        raise ValueError(f"need 0 < |z| < r0 = {geom.r0:.6g}, got |z| = {abs(z):.6g}")
    rs = roots_from_log_power(geom, geom.L * cmath.log(z), steps)
    return BetheRootSet(rs.geom, rs.log_power, rs.left, rs.right, rs.residual, z)


def jfun(geom: RingGeometry, w):
    w = np.asarray(w, dtype=complex)
    return w * (w + 1) / (geom.L * (w + geom.rho))


def eval_lz(rs: BetheRootSet, w):
    """prod_{u in left} (w-u) / (w+1)^(L-N)."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == -1):
        raise ZeroDivisionError("l_z is singular at w = -1")
    return np.prod((w[..., None] - rs.left) / (w[..., None] + 1), axis=-1)


def eval_rz(rs: BetheRootSet, w):
    """prod_{v in right} (w-v) / w^N."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ZeroDivisionError("r_z is singular at w = 0")
    return np.prod((w[..., None] - rs.right) / w[..., None], axis=-1)


def eval_Hz(rs: BetheRootSet | None, w):
    """l_z on Re w > -rho, r_z on Re w < -rho; None stands for z = 0."""
    w = np.asarray(w, dtype=complex)
    if rs is None:
        return np.ones_like(w)
    rho = rs.geom.rho
    if np.any(w.real == -rho):
        raise ValueError("H_z undefined on the line Re w = -rho")
    out = np.empty_like(w)
    r = w.real > -rho
    out[r] = eval_lz(rs, w[r])
    out[~r] = eval_rz(rs, w[~r])
    return out


def root_identity_errors(rs: BetheRootSet) -> dict:
    """Relative errors of the product identities satisfied by every root set.

    ``product``: z^L = (-1)^(N-1) prod(-u) prod(v) over left u and right v.
    ``power``: prod(-u)^N = prod(v+1)^(L-N), compared through logarithms
    modulo 2 pi i so that large powers do not overflow.
    """
    L, N = rs.geom.L, rs.geom.N
    u, v = rs.left, rs.right
    lhs = (-1) ** (N - 1) * np.prod(-u) * np.prod(v)
    zl = rs.power
    e_prod = abs(lhs - zl) / abs(zl)
    d = N * np.sum(np.log(-u)) - (L - N) * np.sum(np.log(v + 1))
    d = d - 2j * math.pi * round(d.imag / (2 * math.pi))
    e_pow = abs(np.expm1(d))
    return {"counts": (len(u), len(v)), "counts_ok": (len(u), len(v)) == (L - N, N),
            "residual": rs.residual, "product": float(e_prod), "power": float(e_pow)}
