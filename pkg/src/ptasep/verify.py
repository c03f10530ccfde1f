"""Verification suites: formulas against independent oracles and proven properties.

Each suite returns a list of :class:`Check` records.  A check stores the
measured error and the tolerance it is held to; the tolerances below are the
acceptance thresholds of the package.
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bethe import RingGeometry, root_identity_errors, solve_bethe_roots
from .finite import (FiniteQuery, InitialCondition, StepModel, D_series_finite,
                     check_L_independence, joint_cdf_general, joint_cdf_step,
                     mixed_event_prob_finite, power_radii, scale_parameters)
from .identities import verify_H_sums, verify_cauchy_identities
from .limit import (ScaledQuery, build_limit_kernels, check_consistency,
                    contour_exchange_residual, eval_C_limit, eval_D_limit, eval_F, limit_roots)
from .numerics import ContourScheme
from .sim import SimConfig, exact_cdf_small, mc_joint_cdf

SUITES = ("identities", "oracles", "limit-props", "l-independence")


@dataclass
class Check:
    suite: str
    name: str
    error: float
    tol: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return math.isfinite(self.error) and self.error < self.tol

    def to_dict(self):
        return {"suite": self.suite, "name": self.name, "error": self.error, "tol": self.tol,
                "passed": self.passed, "seconds": self.seconds, "detail": self.detail}


def _timed(suite, name, tol, fn):
    t0 = time.perf_counter()
    err, detail = fn()
    return Check(suite, name, float(err), tol, detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# individual measurements; each returns (error, detail)

def measure_roots(geoms=((6, 3), (10, 4), (24, 8)), ratios=(0.3, 0.6, 0.9), phases=8):
    worst = {"counts": 0, "residual": 0.0, "product": 0.0, "power": 0.0}
    for L, N in geoms:
        g = RingGeometry(L, N)
        for s in ratios:
            for p in range(phases):
                z = s * g.r0 * cmath.exp(2j * math.pi * (p + 0.5) / phases)
                e = root_identity_errors(solve_bethe_roots(g, z))
                worst["counts"] += not e["counts_ok"]
                for key in ("residual", "product", "power"):
                    worst[key] = max(worst[key], e[key])
    err = math.inf if worst["counts"] else max(worst["residual"], worst["product"], worst["power"])
    return err, worst


def measure_cauchy(trials=100, sizes=(1, 2, 3, 4), seed=5):
    rng = np.random.default_rng(seed)
    per = {n: verify_cauchy_identities(n, trials, rng)["max_rel_err"] for n in sizes}
    worst = max(max(v.values()) for v in per.values())
    return worst, {"trials": trials, "per_n": per}


def measure_H(geoms=((5, 2), (6, 3)), trials=3, seed=7):
    rng = np.random.default_rng(seed)
    out = {f"{L},{N}": verify_H_sums(RingGeometry(L, N), trials, rng)["max_rel_err"]
           for L, N in geoms}
    return out


def measure_series(geom=(5, 2), trials=4, seed=11):
    """det(I - K2 K1) against the full series sum_n D_n/(n!)^2, m in {1, 2}."""
    g = RingGeometry(*geom)
    rng = np.random.default_rng(seed)
    queries = [FiniteQuery.single(1, 0, 0.7), FiniteQuery((1, 2), (0, 1), (0.5, 1.2))]
    worst, rows = 0.0, []
    for q in queries:
        model = StepModel(g, q)
        for _ in range(trials):
            mods = np.sort(rng.uniform(0.05, 0.9, q.m))[::-1]
            us = [complex(r * cmath.exp(2j * math.pi * rng.random())) for r in mods]
            fred = model.D(us, model.rootsets(us))
            ser = D_series_finite(g, q, us)
            e = abs(fred - ser) / abs(fred)
            worst = max(worst, e)
            rows.append({"m": q.m, "rel": e})
    return worst, {"samples": rows}


def measure_exact(geom=(6, 3)):
    """Step and general-IC formulas against uniformization."""
    g = RingGeometry(*geom)
    Y = InitialCondition.step(g.N)
    cases = [FiniteQuery.single(k, a, t) for t in (0.5, 1.5) for k, a in ((1, -1), (2, 0), (3, 1))]
    cases += [FiniteQuery((1, 2), (-1, 0), (0.8, 1.6)), FiniteQuery((2, 3), (-1, 1), (0.8, 1.6))]
    worst, rows = 0.0, []
    for q in cases:
        ex = exact_cdf_small(g, Y, q)
        s = joint_cdf_step(g, q).value
        gen = joint_cdf_general(g, Y, q).value
        e = max(abs(s - ex), abs(gen - ex))
        worst = max(worst, e)
        rows.append({"query": q.to_dict(), "exact": ex, "step": s, "general": gen})
    return worst, {"cases": rows}


def measure_mixed_exact(geom=(6, 3)):
    g = RingGeometry(*geom)
    q = FiniteQuery((1, 2), (0, 0), (0.8, 1.6))
    ex = exact_cdf_small(g, InitialCondition.step(g.N), q, "+-")
    f = mixed_event_prob_finite(g, q, "+-").value
    return abs(f - ex), {"exact": ex, "formula": f}


def measure_mc(geom=(8, 4), samples=10 ** 6, seed=20171009):
    """Mixed two-point event against simulation; the error is in units of stderr."""
    g = RingGeometry(*geom)
    q = FiniteQuery((2, 3), (0, 1), (0.8, 1.6))
    f = mixed_event_prob_finite(g, q, "+-").value
    mc = mc_joint_cdf(SimConfig(g, InitialCondition.step(g.N), 1.6, seed=seed, samples=samples),
                      q, "+-")
    return abs(f - mc.estimate) / mc.stderr, {"formula": f, "mc": mc.to_dict()}


def measure_translation(geom=(6, 3)):
    g = RingGeometry(*geom)
    worst, rows = 0.0, []
    for k, a, t in ((1, 0, 1.0), (2, 1, 1.5), (3, 1, 0.7)):
        p = joint_cdf_step(g, FiniteQuery.single(k, a, t)).value
        p2 = joint_cdf_step(g, FiniteQuery.single(k + g.N, a + g.L, t), translate=False).value
        worst = max(worst, abs(p - p2))
        rows.append((k, a, t, p, p2))
    q = FiniteQuery((2, 3), (-1, 1), (0.8, 1.6))
    q2 = FiniteQuery((2 + g.N, 3), (-1 + g.L, 1), (0.8, 1.6))
    p, p2 = joint_cdf_step(g, q).value, joint_cdf_step(g, q2, translate=False).value
    worst = max(worst, abs(p - p2))
    rows.append((q.k, q.a, q.t, p, p2))
    return worst, {"cases": rows}


def measure_L_independence(N=3, Ls=(12, 15)):
    qs = [FiniteQuery.single(2, 0, 1.0), FiniteQuery((1, 2), (0, 1), (0.5, 1.0)),
          FiniteQuery((2, 3), (1, 2), (0.7, 1.4))]
    rows = [check_L_independence(N, q, *Ls) for q in qs]
    return max(r["diff"] for r in rows), {"cases": rows}


# -- limit properties ------------------------------------------------------

X_GRID = tuple(np.linspace(-4.0, 2.0, 13))


def measure_monotone(xs=X_GRID):
    q = ScaledQuery.single(0.0, 1.0, 0.0)
    vals = [eval_F(q, [x]).value for x in xs]
    drops = [max(0.0, a - b) for a, b in zip(vals, vals[1:])]
    out = [max(0.0, -v, v - 1) for v in vals]
    return max(drops + out), {"x": list(xs), "F": vals}


def measure_periodicity():
    """F depends on gamma only modulo 1: compare C D and F at gamma and gamma + 1."""
    q = ScaledQuery((0.3, 0.6), (1.0, 1.7), (-0.5, 0.5))
    zz = [0.7 * cmath.exp(0.4j), 0.3 * cmath.exp(-1.1j)]
    shifted = ScaledQuery([g + 1 for g in q.gamma], q.tau, q.x)
    a = eval_C_limit(zz, q) * eval_D_limit(zz, q)
    b = eval_C_limit(zz, shifted) * eval_D_limit(zz, shifted)
    p1 = ScaledQuery.single(0.25, 1.0, -1.0)
    f1 = eval_F(p1).value
    f2 = eval_F(ScaledQuery.single(1.25, 1.0, -1.0)).value
    err = max(abs(a - b) / abs(a), abs(f1 - f2))
    return err, {"integrand_rel": abs(a - b) / abs(a), "F": (f1, f2)}


def measure_limit_consistency(x1=-1.0, X_large=(3, 4, 5, 6)):
    q2 = ScaledQuery((0.1, 0.4), (1.0, 2.0), (x1, 0.0))
    r = check_consistency(q2, x1, X_large)
    gap = r["gaps"][float(X_large[-1])]
    err = gap if r["decreasing"] else math.inf
    return err, {k: r[k] for k in ("F1", "gaps", "decreasing")}


def measure_exchange(nodes=32):
    q = ScaledQuery((0.1, 0.4), (1.0, 2.0), (-1.0, 0.5))
    r = contour_exchange_residual(q, 1, nodes)
    return r["residual"], r


def measure_sylvester():
    q = ScaledQuery((0.1, 0.4), (1.0, 2.0), (-1.0, 0.5))
    worst = 0.0
    for zz in ([0.8 * cmath.exp(0.3j), 0.48 * cmath.exp(-0.9j)],
               [0.5 * cmath.exp(2.0j), 0.2 * cmath.exp(1.0j)]):
        kp = build_limit_kernels(zz, q)
        a, b = kp.fredholm_det(), kp.fredholm_det_other()
        worst = max(worst, abs(a - b) / abs(a))
    return worst, {}


def measure_doubling(m2=True):
    """Change of F under doubled nodes and a doubled root lattice."""
    q = ScaledQuery.single(0.0, 1.0, -1.0)
    base = eval_F(q, scheme=ContourScheme([0.8], 128, adaptive=False)).value
    nodes2 = eval_F(q, scheme=ContourScheme([0.8], 256, adaptive=False)).value
    k0 = limit_roots(0.8).kmax
    trunc2 = eval_F(q, scheme=ContourScheme([0.8], 128, adaptive=False), kmax=2 * k0).value
    detail = {"F": base, "nodes_doubled": nodes2, "kmax_doubled": trunc2}
    err = max(abs(base - nodes2), abs(base - trunc2))
    if m2:
        q2 = ScaledQuery((0.1, 0.4), (1.0, 2.0), (-1.0, 0.5))
        a = eval_F(q2, scheme=ContourScheme([0.8, 0.48], 32, adaptive=False)).value
        b = eval_F(q2, scheme=ContourScheme([0.8, 0.48], 64, adaptive=False)).value
        detail["F2"] = (a, b)
        err = max(err, abs(a - b))
    return err, detail


def measure_finite_to_limit(Ls=(50, 100), xs=(-1.0, 0.0, 1.0)):
    """Deviation of the scaled finite one-point CDF from F^(1); returns the L = max(Ls) value."""
    rows = {}
    for x in xs:
        F = eval_F(ScaledQuery.single(0.0, 1.0, x)).value
        for L in Ls:
            g = RingGeometry(L, L // 2)
            k, a, t = scale_parameters(g, 0.0, 1.0, x)
            p = joint_cdf_step(g, FiniteQuery.single(k, a, t), radii=power_radii(g, [0.8])).value
            rows[(x, L)] = {"finite": p, "limit": F, "dev": abs(p - F)}
    return rows


# ---------------------------------------------------------------------------
# suites

def suite_identities(quick=False):
    s = "identities"
    checks = [_timed(s, "cauchy lemmas n<=4", 1e-9,
                     lambda: measure_cauchy(20 if quick else 100))]
    t0 = time.perf_counter()
    H = measure_H(trials=1 if quick else 3)
    dt = time.perf_counter() - t0
    for key, tol in (("ge", 1e-10), ("lt", 1e-10), ("fixed", 1e-11)):
        err = max(v[key] for v in H.values())
        checks.append(Check(s, f"H sum closed form ({key})", err, tol,
                            {g: v[key] for g, v in H.items()}, dt / 3))
    return checks


def suite_oracles(quick=False):
    s = "oracles"
    checks = [
        _timed(s, "root counts and product identities", 1e-10, measure_roots),
        _timed(s, "Fredholm determinant vs series", 1e-10,
               lambda: measure_series(trials=2 if quick else 4)),
        _timed(s, "step and general IC vs uniformization", 1e-6, measure_exact),
        _timed(s, "mixed event vs uniformization", 1e-6, measure_mixed_exact),
        _timed(s, "translation (k,a)->(k+N,a+L)", 1e-9, measure_translation),
    ]
    checks.append(_timed(s, "mixed event vs Monte Carlo (stderr units)", 3.5,
                         lambda: measure_mc(samples=10 ** 5 if quick else 10 ** 6)))
    return checks


def suite_limit(quick=False):
    s = "limit-props"
    checks = [
        _timed(s, "F1 monotone and in [0,1]", 1e-12, measure_monotone),
        _timed(s, "gamma periodicity", 1e-6, measure_periodicity),
        _timed(s, "Sylvester det(I-K1K2)=det(I-K2K1)", 1e-10, measure_sylvester),
        _timed(s, "contour exchange residual", 1e-6, measure_exchange),
        _timed(s, "stability under doubling", 1e-6, lambda: measure_doubling(not quick)),
    ]
    if not quick:
        checks.append(_timed(s, "consistency gap at X=6 (decreasing)", 1e-2,
                             measure_limit_consistency))
    return checks


def suite_L(quick=False):
    return [_timed("l-independence", "P at L=12 vs L=15", 1e-8, measure_L_independence)]


_RUNNERS = {"identities": suite_identities, "oracles": suite_oracles,
            "limit-props": suite_limit, "l-independence": suite_L}


def run_suite(name: str, quick: bool = False) -> list:
    names = SUITES if name == "all" else (name,)
    for n in names:
        if n not in _RUNNERS:
            raise ValueError(f"unknown suite {n!r}; choose from {SUITES + ('all',)}")
    out = []
    for n in names:
        out.extend(_RUNNERS[n](quick))
    return out
