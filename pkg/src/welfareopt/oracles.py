"""Independent brute-force oracles used by the test and acceptance suites.

Everything here trades efficiency for obviousness: exhaustive vertex
enumeration, central finite differences, and dense grid search.  None of it
shares logic with the production code paths it is meant to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from welfareopt.solver import Box
from welfareopt.welfare import WelfareMeasure, as_utility_vector

# Enumerating k-subsets of n agents blows up combinatorially.
MAX_ENUM_AGENTS = 12
MAX_GRID_DIM = 3


@lru_cache(maxsize=None)
def _subsets(n: int, k: int) -> np.ndarray:
    return np.array(list(combinations(range(n), k)), dtype=np.intp)


def min_over_capped_simplex(u, k: int) -> tuple[float, np.ndarray]:
    """Exact minimum of ``<w, u>`` over simplex weights capped at 1/k.

    Solves the linear program by enumerating the feasible set's extreme
    points, which are exactly the vectors putting weight 1/k on a k-subset
    of coordinates.  Returns the minimum value and an attaining vertex
    (first k-subset in lexicographic order on ties).
    """
    arr = as_utility_vector(u)
    n = arr.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for {n} agents")
    if n > MAX_ENUM_AGENTS:
        raise ValueError(
            f"refusing vertex enumeration for n={n} > {MAX_ENUM_AGENTS}"
        )
    subs = _subsets(n, k)
    totals = arr[subs].sum(axis=1)
    best = int(np.argmin(totals))
    w = np.zeros(n)
    w[subs[best]] = 1.0 / k
    return float(totals[best] / k), w


def max_over_capped_simplex(u, k: int) -> tuple[float, np.ndarray]:
    """Mirror image of :func:`min_over_capped_simplex` (maximization)."""
    value, w = min_over_capped_simplex(-np.asarray(u, dtype=np.float64), k)
    return -value, w


def finite_difference_gradient(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar field at ``x``.

    The default step balances truncation against roundoff for
    double-precision inputs of moderate scale.
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty(x.size)
    for j in range(x.size):
        step = np.zeros(x.size)
        step[j] = h
        grad[j] = (float(f(x + step)) - float(f(x - step))) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class GridSpec:
    """Dense grid over a finite box, with spacing at most ``resolution``."""

    resolution: float
    box: Box

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        lo, hi = self.box.lower, self.box.upper
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("grid search needs a finite box")
        if np.any(self.resolution > hi - lo):
            raise ValueError("resolution exceeds a box edge length")

    def axes(self) -> list[np.ndarray]:
        out = []
        for lo, hi in zip(self.box.lower, self.box.upper):
            npts = int(np.ceil((hi - lo) / self.resolution - 1e-12)) + 1
            out.append(np.linspace(lo, hi, npts))
        return out


def grid_search_optimum(
    phi: WelfareMeasure, oracle, grid: GridSpec, chunk_rows: int = 64
) -> tuple[float, np.ndarray]:
    """Exhaustive maximization of the welfare of utilities over a grid.

    Evaluates phi(U(theta)) at every grid point and returns the best value
    with its point.  Ties resolve to the lexicographically smallest point
    (row-major scan order).  The true box optimum exceeds the returned value
    by at most L * resolution * sqrt(D) for L-Lipschitz phi(U(.)).
    """
    axes = grid.axes()
    d = len(axes)
    if d > MAX_GRID_DIM:
        raise ValueError(f"grid search supports at most {MAX_GRID_DIM} dims")
    tail_axes = axes[1:]
    tail_grids = np.meshgrid(*tail_axes, indexing="ij") if tail_axes else []
    tail = (
        np.stack([g.ravel() for g in tail_grids], axis=1)
        if tail_grids
        else np.zeros((1, 0))
    )
    m_tail = tail.shape[0]

    best_val = -np.inf
    best_theta: np.ndarray | None = None
    batch = getattr(oracle, "utilities_batch", None)

    for start in range(0, axes[0].size, chunk_rows):
        lead = axes[0][start : start + chunk_rows]
        pts = np.empty((lead.size * m_tail, d))
        pts[:, 0] = np.repeat(lead, m_tail)
        if d > 1:
            pts[:, 1:] = np.tile(tail, (lead.size, 1))
        if batch is not None:
            U = batch(pts)
        else:
            U = np.array([oracle.utilities(p) for p in pts])
        vals = phi.evaluate_many(U)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val = float(vals[j])
            best_theta = pts[j].copy()
    assert best_theta is not None
    return best_val, best_theta
