"""Stochastic and exact reference computations for TASEP on a ring."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse
import scipy.stats

from .bethe import RingGeometry
from .finite import FiniteQuery, InitialCondition
from .numerics import DEFAULTS


@dataclass
class SimConfig:
    geom: RingGeometry
    Y: InitialCondition
    horizon: float
    seed: int = 20171009
    samples: int = 100_000

    def __post_init__(self):
        self.Y.check(self.geom)
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")

    def to_dict(self):
        return {"L": self.geom.L, "N": self.geom.N, "Y": list(self.Y.y), "horizon": self.horizon,
                "seed": self.seed, "samples": self.samples, "rng": "Philox"}


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; the seed may be an int or a SeedSequence."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class Trajectory:
    """Jump events of one sample path.

    ``times[e]`` is the time of event e, ``who[e]`` the particle (0-based)
    and ``frm[e]`` its site before the jump.
    """

    geom: RingGeometry
    y0: np.ndarray
    horizon: float
    times: np.ndarray
    who: np.ndarray
    frm: np.ndarray

    def state_at(self, t: float):
        if not 0 <= t <= self.horizon:
            raise ValueError(f"t={t} outside [0, {self.horizon}]")
        n = int(np.searchsorted(self.times, t, side="right"))
        x = self.y0.copy()
        np.add.at(x, self.who[:n], 1)
        j0 = int(np.count_nonzero(self.frm[:n] % self.geom.L == 0))
        return x, j0

    def to_csv(self) -> str:
        rows = ["time,particle,from,to"]
        rows += [f"{float(t)!r},{i + 1},{f},{f + 1}" for t, i, f in zip(self.times, self.who, self.frm)]
        return "\n".join(rows) + "\n"


def simulate_path(cfg: SimConfig, rng: np.random.Generator | None = None) -> Trajectory:
    """One exact path: every particle owns a rate-1 clock; blocked rings are lost."""
    rng = rng or make_rng(cfg.seed)
    L, N = cfg.geom.L, cfg.geom.N
    x = np.array(cfg.Y.y, dtype=np.int64)
    y0 = x.copy()
    nxt = rng.exponential(1.0, N)
    times, who, frm = [], [], []
    while True:
        i = int(np.argmin(nxt))
        t = nxt[i]
        if t > cfg.horizon:
            break
        ahead = x[i + 1] if i < N - 1 else x[0] + L
        if x[i] + 1 < ahead:
            times.append(t)
            who.append(i)
            frm.append(int(x[i]))
            x[i] += 1
        nxt[i] = t + rng.exponential(1.0)
    return Trajectory(cfg.geom, y0, cfg.horizon, np.array(times), np.array(who, dtype=np.int64),
                      np.array(frm, dtype=np.int64))


def particle_position(geom: RingGeometry, x, k: int):
    """Position of particle k in the periodic labelling x_{k+nN} = x_k + nL."""
    n, r = divmod(k - 1, geom.N)
    return x[..., r] + n * geom.L


def height_at(traj: Trajectory, ell: int, t: float) -> int:
    """h(ell, t) = 2 J0(t) + sum over sites 1..ell of (1 - 2 eta) (reversed for ell < 0)."""
    x, j0 = traj.state_at(t)
    L = traj.geom.L
    occ = np.zeros(L, dtype=np.int64)
    occ[x % L] = 1
    if ell >= 0:
        sites = np.arange(1, ell + 1)
        return 2 * j0 + int(np.sum(1 - 2 * occ[sites % L]))
    sites = np.arange(ell + 1, 1)
    return 2 * j0 - int(np.sum(1 - 2 * occ[sites % L]))


def _event(geom, x, k, a, sign):
    pos = particle_position(geom, x, k)
    return pos >= a if sign == "-" else pos < a


def _sorted_events(q: FiniteQuery, signs):
    signs = list(signs) if signs is not None else ["-"] * q.m
    if len(signs) != q.m:
        raise ValueError("one sign per probe point")
    o = q.order()
    return [(q.k[j], q.a[j], q.t[j], signs[j]) for j in o]


@dataclass
class MCEstimate:
    estimate: float
    stderr: float
    n: int
    seed: int
    hits: int = 0

    def to_dict(self):
        return {"estimate": self.estimate, "stderr": self.stderr, "n": self.n, "seed": self.seed,
                "hits": self.hits, "rng": "Philox"}


def _mc_batch(geom, y, events, n, rng):
    """Clock rings of all particles form a rate-N Poisson stream with uniform marks."""
    L, N = geom.L, geom.N
    x = np.tile(np.asarray(y, dtype=np.int64), (n, 1))
    ok = np.ones(n, dtype=bool)
    rows = np.arange(n)
    t_now = 0.0
    for k, a, t, sign in events:
        rings = rng.poisson(N * (t - t_now), n)
        for s in range(int(rings.max(initial=0))):
            act = rings > s
            idx = rng.integers(0, N, n)
            cur = x[rows, idx]
            ahead = np.where(idx < N - 1, x[rows, np.minimum(idx + 1, N - 1)], x[:, 0] + L)
            move = act & (cur + 1 < ahead)
            x[rows[move], idx[move]] += 1
        t_now = t
        ok &= _event(geom, x, k, a, sign)
    return int(np.count_nonzero(ok))


def mc_joint_cdf(cfg: SimConfig, q: FiniteQuery, signs: Sequence[str] | None = None,
                 batch: int = 1 << 16) -> MCEstimate:
    """Monte Carlo estimate of the joint event with binomial standard error."""
    if cfg.samples < 10_000:
        raise ValueError("at least 10^4 samples required")
    events = _sorted_events(q, signs)
    if events[-1][2] > cfg.horizon:
        raise ValueError("query time beyond horizon")
    nb = -(-cfg.samples // batch)
    seeds = np.random.SeedSequence(cfg.seed).spawn(nb)
    hits = 0
    left = cfg.samples
    for ss in seeds:
        n = min(batch, left)
        hits += _mc_batch(cfg.geom, cfg.Y.y, events, n, make_rng(ss))
        left -= n
    p = hits / cfg.samples
    return MCEstimate(p, math.sqrt(max(p * (1 - p), 0.0) / cfg.samples), cfg.samples, cfg.seed, hits)


# ---------------------------------------------------------------------------
# exact transient probabilities by uniformization

def _poisson_cutoff(mean: float, tail: float) -> int:
    if mean == 0:
        return 0
    return int(scipy.stats.poisson.isf(tail, mean)) + 1


def _state_space(geom, y, dmax, limit):
    """Configurations reachable from y with total displacement <= dmax."""
    L, N = geom.L, geom.N
    y = tuple(int(v) for v in y)
    index = {y: 0}
    states = [y]
    src, dst = [], []
    head = 0
    while head < len(states):
        s = states[head]
        disp = sum(s) - sum(y)
        if disp < dmax:
            for i in range(N):
                ahead = s[i + 1] if i < N - 1 else s[0] + L
                if s[i] + 1 < ahead:
                    ns = s[:i] + (s[i] + 1,) + s[i + 1:]
                    j = index.get(ns)
                    if j is None:
                        j = len(states)
                        if j >= limit:
                            raise ValueError(f"state space exceeds {limit} configurations")
                        index[ns] = j
                        states.append(ns)
                    src.append(head)
                    dst.append(j)
        head += 1
    return (np.array(states, dtype=np.int64), np.array(src, dtype=np.int64),
            np.array(dst, dtype=np.int64))


def _uniformized(vec, P, lam_t, tail):
    K = _poisson_cutoff(lam_t, tail)
    out = np.zeros_like(vec)
    term = vec.copy()
    w = math.exp(-lam_t)
    for n in range(K + 1):
        out += w * term
        term = P @ term
        w *= lam_t / (n + 1)
    return out


def exact_cdf_small(geom: RingGeometry, Y: InitialCondition, q: FiniteQuery,
                    signs: Sequence[str] | None = None, tail: float | None = None,
                    max_states: int = 100_000) -> float:
    """Exact joint probability by uniformization of the jump chain with rate N.

    Displacements are truncated at the Poisson quantile of the total number
    of clock rings, so the neglected mass is below ``tail``.
    """
    Y.check(geom)
    tail = tail if tail is not None else DEFAULTS.poisson_tail
    events = _sorted_events(q, signs)
    N = geom.N
    t_end = events[-1][2]
    dmax = _poisson_cutoff(N * t_end, tail)
    states, src, dst = _state_space(geom, Y.y, dmax, max_states)
    n = len(states)
    # column-stochastic kernel: each ring picks a particle with prob 1/N
    data = np.full(src.size, 1.0 / N)
    moved = np.bincount(src, minlength=n) / N
    P = scipy.sparse.csr_matrix((data, (dst, src)), shape=(n, n))
    P = P + scipy.sparse.diags(1.0 - moved)
    vec = np.zeros(n)
    vec[0] = 1.0
    t_now = 0.0
    for k, a, t, sign in events:
        if t > t_now:
            vec = _uniformized(vec, P, N * (t - t_now), tail)
        t_now = t
        vec = vec * _event(geom, states, k, a, sign)
    return float(vec.sum())
