"""Summation identities behind the finite-time formulas, with brute-force sums.

R_X(W) = det[w_i^{-j} (w_i+1)^{-x_j+j}],  L_X(W') = det[w'_i^j (w'_i+1)^{x_j-j}].

The configuration sums cancel heavily when some |w+1| is small, so the
H-sum checks run in mpmath after pulling every root tuple onto one common
value of w^N (w+1)^(L-N).
"""
from __future__ import annotations

import functools
import itertools
import math

import mpmath
import numpy as np

from .bethe import RingGeometry
from .numerics import cauchy_matrix, det_complex

_XP = np.clongdouble  # enough for the random-input lemma checks
_DPS = 40  # lattice sums cancel by up to ~1e10 near w = -1


def harmonize_roots(geom: RingGeometry, W, iters: int = 6) -> tuple[list, object]:
    """Newton-polish W at high precision onto a common power P = z^L.

    P is the mean of w^N (w+1)^(L-N) over the tuple.  Returns (W, P) as
    mpmath numbers; call inside ``mpmath.workdps``.
    """
    N, L = geom.N, geom.L
    W = [mpmath.mpc(complex(w)) for w in np.asarray(W).ravel()]
    P = mpmath.fsum(w ** N * (w + 1) ** (L - N) for w in W) / len(W)
    for _ in range(iters):
        W = [w - (w ** N * (w + 1) ** (L - N) - P)
             / (w ** (N - 1) * (w + 1) ** (L - N - 1) * (N * (w + 1) + (L - N) * w)) for w in W]
    return W, P


def R_det(W, X) -> np.ndarray:
    """R_X(W) for a batch of configurations X with shape (..., N)."""
    W = np.asarray(W, dtype=complex)
    X = np.asarray(X)
    j = np.arange(1, W.size + 1)
    M = W[:, None] ** (-j) * (W[:, None] + 1) ** (-X[..., None, :] + j)
    return np.linalg.det(M)


def L_det(Wp, X) -> np.ndarray:
    Wp = np.asarray(Wp, dtype=complex)
    X = np.asarray(X)
    j = np.arange(1, Wp.size + 1)
    M = Wp[:, None] ** j * (Wp[:, None] + 1) ** (X[..., None, :] - j)
    return np.linalg.det(M)


def shapes_with_xk_zero(geom: RingGeometry, k: int) -> np.ndarray:
    """All x_1 < ... < x_N < x_1 + L with x_k = 0."""
    N, L = geom.N, geom.L
    rows = []
    for rest in itertools.combinations(range(1, L), N - 1):
        x = np.array((0,) + rest)
        rows.append(x - x[k - 1])
    return np.array(rows, dtype=np.int64)


def _mp_prod(it):
    out = mpmath.mpc(1)
    for v in it:
        out *= v
    return out


def _mp_cauchy_det(x, y):
    n = len(x)
    num = _mp_prod((x[j] - x[i]) * (y[i] - y[j]) for i in range(n) for j in range(i + 1, n))
    return num / _mp_prod(xi - yj for xi in x for yj in y)


def _log_ratio(W, Wp) -> float:
    return float(np.sum(np.log(np.abs(np.asarray(Wp, dtype=complex) + 1)))
                 - np.sum(np.log(np.abs(np.asarray(W, dtype=complex) + 1))))


def _H_closed(geom, W, Wp, k, a):
    W, P = harmonize_roots(geom, W)
    Wp, Pp = harmonize_roots(geom, Wp)
    if abs(P - Pp) <= 1e-14 * abs(P):
        raise ValueError("z^L and z'^L must differ")
    N = geom.N
    pref = (P / Pp) ** (k - 1) * (1 - Pp / P) ** (N - 1)
    prod = _mp_prod(w ** (-k) * (w + 1) ** (-a + k + 1) for w in W) / _mp_prod(
        v ** (-k) * (v + 1) ** (-a + k) for v in Wp)
    return pref * prod * _mp_cauchy_det(W, Wp)


def H_ka_closed(geom: RingGeometry, W, Wp, k: int, a: int, dps: int = _DPS) -> complex:
    """Closed form of the sum over x_k >= a of R_X(W) L_X(W').

    Needs prod|w'+1| < prod|w+1| for the sum to converge.
    """
    if _log_ratio(W, Wp) >= 0:
        raise ValueError("convergence needs prod|w'+1| < prod|w+1|")
    with mpmath.workdps(dps):
        return complex(_H_closed(geom, W, Wp, k, a))


def H_ka_mixed_closed(geom: RingGeometry, W, Wp, k: int, a: int, dps: int = _DPS) -> complex:
    """Sum over x_k < a of R_X(W) L_X(W'); needs prod|w'+1| > prod|w+1|.

    It is minus the x_k >= a closed form at the same a.
    """
    if _log_ratio(W, Wp) <= 0:
        raise ValueError("convergence needs prod|w'+1| > prod|w+1|")
    with mpmath.workdps(dps):
        return complex(-_H_closed(geom, W, Wp, k, a))


def factorization_factor(geom: RingGeometry, W, Wp, k: int, dps: int = _DPS) -> complex:
    """(z/z')^((k-1)L) prod((w+1)w'/(w(w'+1)))^(k-1), the ratio H_{k,a}/H_{1,a}."""
    with mpmath.workdps(dps):
        Wx, P = harmonize_roots(geom, W)
        Wpx, Pp = harmonize_roots(geom, Wp)
        f = (P / Pp) * _mp_prod((w + 1) / w for w in Wx) * _mp_prod(v / (v + 1) for v in Wpx)
        return complex(f ** (k - 1))


def _det_small(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    return sum((-1) ** c * M[0][c] * _det_small([row[:c] + row[c + 1:] for row in M[1:]])
               for c in range(n))


def _lattice_sum(W, Wp, X) -> complex:
    """Sum over the rows of X of R_X(W) L_X(W'), at the working precision."""
    n = len(W)
    if n > 5:
        raise ValueError("brute-force sums are limited to N <= 5")

    @functools.lru_cache(maxsize=None)
    def pw(side, i, e):
        v = W[i] if side == 0 else Wp[i]
        return (v + 1) ** e

    lw = [[W[i] ** (-j) for j in range(1, n + 1)] for i in range(n)]
    lp = [[Wp[i] ** j for j in range(1, n + 1)] for i in range(n)]
    total = mpmath.mpc(0)
    for x in X:
        x = [int(v) for v in x]
        R = [[lw[i][j - 1] * pw(0, i, -x[j - 1] + j) for j in range(1, n + 1)] for i in range(n)]
        Lm = [[lp[i][j - 1] * pw(1, i, x[j - 1] - j) for j in range(1, n + 1)] for i in range(n)]
        total += _det_small(R) * _det_small(Lm)
    return total


def H_ka_bruteforce(geom: RingGeometry, W, Wp, k: int, a: int, M: int | None = None,
                    tail_tol: float = 1e-14, below: bool = False, dps: int = _DPS) -> complex:
    """Direct configuration sum over x_k >= a (or x_k < a if ``below``).

    Layers x_k = b are enumerated one at a time, every inner configuration
    exactly.  M defaults to the smallest power of two whose geometric tail
    bound q^M/(1-q) is below ``tail_tol`` relative to the first layer.
    """
    lr = _log_ratio(W, Wp)
    q = math.exp(lr if not below else -lr)
    if q >= 1:
        raise ValueError("geometric ratio on the wrong side of 1 for this domain")
    if M is None:
        M = max(1, math.ceil(math.log(tail_tol * (1 - q)) / math.log(q)))
    if q ** M / (1 - q) > tail_tol:
        raise ValueError(f"tail bound {q ** M / (1 - q):.3g} above tolerance")
    shapes = shapes_with_xk_zero(geom, k)
    bs = np.arange(a, a + M) if not below else np.arange(a - 1, a - 1 - M, -1)
    X = (shapes[None, :, :] + bs[:, None, None]).reshape(-1, shapes.shape[1])
    with mpmath.workdps(dps):
        Wx, _ = harmonize_roots(geom, W)
        Wpx, _ = harmonize_roots(geom, Wp)
        return complex(_lattice_sum(Wx, Wpx, X))


def H_a_fixed_closed(geom: RingGeometry, W, Wp, a: int, dps: int = _DPS) -> complex:
    """Sum over x_1 = a of R_X(W) L_X(W'), a finite sum, in closed form."""
    N = geom.N
    with mpmath.workdps(dps):
        W, P = harmonize_roots(geom, W)
        Wp, Pp = harmonize_roots(geom, Wp)
        t1 = _mp_prod(v * (v + 1) ** (a - 1) for v in Wp) / _mp_prod(w * (w + 1) ** (a - 2) for w in W)
        t2 = _mp_prod(v * (v + 1) ** a for v in Wp) / _mp_prod(w * (w + 1) ** (a - 1) for w in W)
        return complex(-((Pp / P) - 1) ** (N - 1) * (t1 - t2) * _mp_cauchy_det(Wp, W))


def H_a_fixed_bruteforce(geom: RingGeometry, W, Wp, a: int, dps: int = _DPS) -> complex:
    with mpmath.workdps(dps):
        Wx, _ = harmonize_roots(geom, W)
        Wpx, _ = harmonize_roots(geom, Wp)
        return complex(_lattice_sum(Wx, Wpx, shapes_with_xk_zero(geom, 1) + a))


# ---------------------------------------------------------------------------
# Cauchy-determinant lemmas on arbitrary complex inputs

def _perm_sign(p):
    p = list(p)
    s = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def _xp_cauchy_det(x, y):
    """Closed-form Cauchy determinant in extended precision."""
    x = np.asarray(x, dtype=_XP)
    y = np.asarray(y, dtype=_XP)
    iu = np.triu_indices(x.size, 1)
    num = np.prod((x[iu[1]] - x[iu[0]]) * (y[iu[0]] - y[iu[1]]))
    return num / np.prod(x[:, None] - y[None, :])


def lemma_perm_sum(w, wp):
    """Both sides of the double-permutation identity."""
    w = np.asarray(w, dtype=_XP)
    wp = np.asarray(wp, dtype=_XP)
    n = w.size
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)
    sg = np.array([_perm_sign(p) for p in perms])
    ws = w[perms][:, None, :]
    wps = wp[perms][None, :, :]
    num = np.prod((wps / ws) ** np.arange(n), axis=-1)
    r = (wps + 1) / (ws + 1)
    tails = np.cumprod(r[..., ::-1], axis=-1)[..., ::-1]
    den = np.prod(1 - tails[..., 1:], axis=-1)
    lhs = np.sum(sg[:, None] * sg[None, :] * num / den)
    rhs = (np.prod(w + 1) - np.prod(wp + 1)) * _xp_cauchy_det(w, wp)
    return complex(lhs), complex(rhs)


def lemma_cauchy_minor_sum(x, y):
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    n = x.size
    C = cauchy_matrix(x, y)
    lhs = 0j
    for l in range(n):
        for k in range(n):
            minor = np.delete(np.delete(C, l, 0), k, 1)
            lhs += (-1) ** (l + k) * x[l] / ((x[l] + 1) * y[k]) * det_complex(minor)
    A = lambda z: np.prod(z - x)
    B = lambda z: np.prod(z - y)
    rhs = A(0) / B(0) * (1 - B(-1) / A(-1)) * det_complex(C)
    return complex(lhs), complex(rhs)


def lemma_rank_one(x, y, u):
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    C = cauchy_matrix(x, y)
    lhs = det_complex(C + u / x[:, None])
    rhs = (1 + u * (1 - np.prod(-y) / np.prod(-x))) * det_complex(C)
    return complex(lhs), complex(rhs)


def _inversions(blocks):
    """#(I_0, ..., I_k): pairs m < n with m in a later block than n."""
    owner = {}
    for b, blk in enumerate(blocks):
        for e in blk:
            owner[e] = b
    keys = sorted(owner)
    return sum(1 for i, m in enumerate(keys) for n in keys[i + 1:] if owner[m] > owner[n])


def _ordered_partitions(elems):
    """All ordered set partitions of ``elems`` into non-empty blocks."""
    elems = tuple(elems)
    if not elems:
        yield ()
        return
    for r in range(1, len(elems) + 1):
        for first in itertools.combinations(elems, r):
            rest = tuple(e for e in elems if e not in first)
            for tail in _ordered_partitions(rest):
                yield (first,) + tail


@functools.lru_cache(maxsize=8)
def _partitions_by_shape(n: int) -> dict:
    groups: dict = {}
    for J in _ordered_partitions(range(n)):
        key = tuple(len(b) for b in J)
        groups.setdefault(key, []).append((J, _inversions(J)))
    return groups


def lemma_partition_sum(w, wp):
    w = np.asarray(w, dtype=_XP)
    wp = np.asarray(wp, dtype=_XP)
    n = w.size
    lhs = _XP(0)
    cdet: dict = {}

    def block_det(ia, ib):
        key = (tuple(ia), tuple(ib))
        if key not in cdet:
            cdet[key] = _xp_cauchy_det(w[ia], wp[ib])
        return cdet[key]

    for shape, group in _partitions_by_shape(n).items():
        # each ordered partition contributes the same factor on either side
        def factors(vals, J):
            out, before = [], 0
            for b in J:
                out.append((np.prod(vals[list(b)]), list(b), before + 1))
                before += len(b)
            return out
        fw = [(factors(w, J), inv) for J, inv in group]
        fwp = [(factors(wp, J), inv) for J, inv in group]
        for A, invA in fw:
            for B, invB in fwp:
                term = _XP((-1) ** (len(shape) + invA + invB))
                for (pa, ia, e), (pb, ib, _) in zip(A, B):
                    term *= (pb / pa) ** e * block_det(ia, ib)
                lhs += term
    rhs = np.prod(wp / w) ** n * (-1) ** n * _xp_cauchy_det(w, wp)
    return complex(lhs), complex(rhs)


def lemma_block_sum(A, B):
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    full = set(range(n))
    lhs = 0j
    for r in range(n + 1):
        for J in itertools.combinations(range(n), r):
            Jc = sorted(full - set(J))
            sJ = _inversions((J, Jc))
            for Jp in itertools.combinations(range(n), r):
                Jpc = sorted(full - set(Jp))
                lhs += ((-1) ** (sJ + _inversions((Jp, Jpc)))
                        * det_complex(A[np.ix_(J, Jp)]) * det_complex(B[np.ix_(Jc, Jpc)]))
    return complex(lhs), det_complex(A + B)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def verify_cauchy_identities(n: int, trials: int, rng: np.random.Generator | None = None) -> dict:
    """Max relative error of each identity over random complex inputs of size n.

    Inputs have modulus log-uniform on [1/2, 2] and uniform phase.
    """
    if not 1 <= n <= 5:
        raise ValueError("n must be between 1 and 5")
    rng = rng or np.random.default_rng(0)

    def cz(k):
        # log-uniform modulus in [1/2, 2]; near-zero points make the sums
        # cancel catastrophically in double precision
        return np.exp(rng.uniform(-math.log(2), math.log(2), k) + 2j * np.pi * rng.random(k))
    errs = {"perm_sum": 0.0, "cauchy_minor_sum": 0.0, "rank_one": 0.0,
            "partition_sum": 0.0, "block_sum": 0.0}
    for _ in range(trials):
        w, wp = cz(n), cz(n)
        errs["perm_sum"] = max(errs["perm_sum"], _rel(*lemma_perm_sum(w, wp)))
        errs["cauchy_minor_sum"] = max(errs["cauchy_minor_sum"], _rel(*lemma_cauchy_minor_sum(w, wp)))
        errs["rank_one"] = max(errs["rank_one"], _rel(*lemma_rank_one(w, wp, complex(cz(1)[0]))))
        errs["partition_sum"] = max(errs["partition_sum"], _rel(*lemma_partition_sum(w, wp)))
        A = cz(n * n).reshape(n, n)
        B = cz(n * n).reshape(n, n)
        errs["block_sum"] = max(errs["block_sum"], _rel(*lemma_block_sum(A, B)))
    return {"n": n, "trials": trials, "max_rel_err": errs, "worst": max(errs.values())}


# ---------------------------------------------------------------------------
# H-sum checks on random root tuples

def random_admissible_pair(geom: RingGeometry, rng: np.random.Generator, ratio_max: float = 0.9,
                           radius=(0.2, 0.9), max_tries: int = 1000):
    """N-tuples W of roots at z and W' at z' with prod|w'+1| / prod|w+1| <= ratio_max.

    Both tuples are drawn uniformly from all L roots (left and right alike).
    """
    from .bethe import solve_bethe_roots

    N, r0 = geom.N, geom.r0
    for _ in range(max_tries):
        z, zp = (r0 * rng.uniform(*radius) * np.exp(2j * np.pi * rng.random()) for _ in range(2))
        R = solve_bethe_roots(geom, z).roots
        Rp = solve_bethe_roots(geom, zp).roots
        W = R[np.sort(rng.choice(geom.L, N, replace=False))]
        Wp = Rp[np.sort(rng.choice(geom.L, N, replace=False))]
        if abs(z ** geom.L - zp ** geom.L) < 1e-3 * abs(z) ** geom.L:
            continue
        if _log_ratio(W, Wp) <= math.log(ratio_max):
            return W, Wp
    raise RuntimeError("no admissible tuple found")


def verify_H_sums(geom: RingGeometry, trials: int, rng: np.random.Generator | None = None,
                  ks=(1, 2), as_=(-1, 0, 1, 2)) -> dict:
    """Closed forms of the configuration sums against direct enumeration.

    ``ge``: sums over x_k >= a.  ``lt``: sums over x_k < a with the tuples
    swapped so that the series converges.  ``fixed``: the finite x_1 = a sums.
    """
    rng = rng or np.random.default_rng(1)
    errs = {"ge": 0.0, "lt": 0.0, "fixed": 0.0}
    for _ in range(trials):
        W, Wp = random_admissible_pair(geom, rng)
        for k in ks:
            for a in as_:
                errs["ge"] = max(errs["ge"], _rel(H_ka_bruteforce(geom, W, Wp, k, a),
                                                  H_ka_closed(geom, W, Wp, k, a)))
                errs["lt"] = max(errs["lt"], _rel(H_ka_bruteforce(geom, Wp, W, k, a, below=True),
                                                  H_ka_mixed_closed(geom, Wp, W, k, a)))
        for a in as_:
            errs["fixed"] = max(errs["fixed"], _rel(H_a_fixed_bruteforce(geom, W, Wp, a),
                                                    H_a_fixed_closed(geom, W, Wp, a)))
    return {"L": geom.L, "N": geom.N, "trials": trials, "max_rel_err": errs}
