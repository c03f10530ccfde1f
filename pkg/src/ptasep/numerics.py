"""Complex determinants, Cauchy matrices and nested-circle quadrature."""
from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg


@dataclass
class Tolerances:
    """Every numerical knob used across the package, in one place."""

    quad_tol: float = 1e-8
    quad_start_nodes: int = 64
    quad_max_nodes: int = 4096
    root_residual: float = 1e-10
    root_newton_maxit: int = 60
    root_continuation_steps: int = 8
    finite_power_ceiling: float = 0.95
    polylog_max_radius: float = 0.95
    limit_f_threshold: float = 1e-16
    limit_entry_floor: float = 1e-18
    poisson_tail: float = 1e-12
    max_N: int = 64
    max_L: int = 512

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Tolerances":
        return cls(**json.loads(text))


DEFAULTS = Tolerances()


def det_complex(M) -> complex:
    """Determinant by LU with partial pivoting; the empty matrix gives 1."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix required, got shape {M.shape}")
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0j
    lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    sign = -1.0 if np.count_nonzero(piv != np.arange(n)) % 2 else 1.0
    return complex(sign * np.prod(np.diag(lu)))


def cauchy_matrix(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return 1.0 / (x[:, None] - y[None, :])


def cauchy_det(x, y) -> complex:
    """Closed form of det[1/(x_i - y_j)]."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    n = x.size
    dx = x[:, None] - x[None, :]
    dy = y[None, :] - y[:, None]
    cross = x[:, None] - y[None, :]
    iu = np.triu_indices(n, 1)
    if np.any(dx[iu] == 0) or np.any(dy[iu] == 0) or np.any(cross == 0):
        raise ValueError("coincident points in Cauchy determinant")
    # prod_{i<j} (x_i - x_j)(y_j - y_i) / prod_{i,j} (x_i - y_j)
    return complex(np.prod(dx[iu]) * np.prod(dy[iu]) / np.prod(cross))


@dataclass
class ContourScheme:
    """Radii of the nested circles and the node schedule."""

    radii: Sequence[float]
    nodes_per_circle: int = 64
    adaptive: bool = True
    tol: float = 1e-8
    max_doublings: int = 6
    phase: float = 0.0
    workers: int = 1

    def __post_init__(self):
        self.radii = [float(r) for r in self.radii]
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        n = self.nodes_per_circle
        if n < 8:
            raise ValueError("nodes_per_circle must be at least 8")
        if self.adaptive and n & (n - 1):
            raise ValueError("nodes_per_circle must be a power of two when adaptive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class QuadResult:
    value: complex
    nodes: int
    delta: float
    converged: bool
    history: list = field(default_factory=list)


def circle_nodes(radius: float, n: int, phase: float = 0.0) -> np.ndarray:
    theta = phase + 2 * np.pi * np.arange(n) / n
    return radius * np.exp(1j * theta)


def _tensor_mean(f, circles, workers, cache, stride):
    m = len(circles)
    idx = np.indices([c.size for c in circles]).reshape(m, -1).T

    def one(row):
        # nodes shared with coarser levels are looked up, not recomputed
        key = tuple(int(r) * stride for r in row)
        val = cache.get(key)
        if val is None:
            val = complex(f(*[circles[j][row[j]] for j in range(m)]))
            cache[key] = val
        return val

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = np.fromiter(ex.map(one, idx), dtype=complex, count=len(idx))
    else:
        vals = np.fromiter((one(r) for r in idx), dtype=complex, count=len(idx))
    # np.sum uses pairwise summation; order is fixed by the node layout
    return vals.sum() / vals.size


def nested_contour_integral(f: Callable[..., complex], scheme: ContourScheme,
                            vectorized: bool = False) -> QuadResult:
    """Tensor-product trapezoid rule for the mean of f over m circles.

    ``f`` takes m complex arguments (one per circle) unless ``vectorized`` is
    set, in which case it receives the list of node arrays and must return
    the full tensor of values.
    """
    radii = scheme.radii
    n = scheme.nodes_per_circle
    history = []
    prev = None
    delta = math.inf
    levels = scheme.max_doublings if scheme.adaptive else 0
    finest = n << levels
    cache: dict = {}
    for _ in range(levels + 1):
        circles = [circle_nodes(r, n, scheme.phase) for r in radii]
        if vectorized:
            est = complex(np.asarray(f(circles)).mean())
        else:
            est = complex(_tensor_mean(f, circles, scheme.workers, cache, finest // n))
        history.append((n, est))
        if prev is not None:
            delta = abs(est - prev)
            if delta < scheme.tol:
                return QuadResult(est, n, delta, True, history)
        prev = est
        if not scheme.adaptive:
            return QuadResult(est, n, delta, True, history)
        n *= 2
    return QuadResult(prev, history[-1][0], delta, False, history)
