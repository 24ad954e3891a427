"""Welfare measures over per-agent utility vectors.

A welfare measure aggregates an N-vector of agent utilities into a single
system score.  Every measure implemented here is monotone, concave,
positively homogeneous and normalized, which is equivalent to having a dual
representation as the minimum of weighted averages over a closed convex
weight set inside the probability simplex.  The weight attaining that
minimum at a point u is exactly a supergradient of the measure at u, which
is what the ascent solver consumes.

Four measure families are provided:

* ``AverageWelfare`` -- a fixed weighted average (singleton weight set).
* ``MinimumWelfare`` -- the worst-off utility (weight set = full simplex).
* ``LowKWelfare`` -- mean of the k smallest utilities (weights capped at 1/k).
* ``VertexSetWelfare`` -- minimum of averages over an explicit vertex list
  (weight set = convex hull of the vertices).

Scalar evaluation paths deliberately use plain sequential loops so that the
compiled solver kernel can reproduce them bit for bit.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.optimize import linprog

# Simplex membership / weight comparisons.
SIMPLEX_TOL = 1e-12
# Convex-hull membership for vertex-list weight sets.
HULL_TOL = 1e-9


def as_utility_vector(u) -> np.ndarray:
    """Validate and convert a utility vector to a 1-D float64 array."""
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("utility vector must be 1-D and nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("utility vector must be finite")
    return arr


def validate_weights(w, n: int | None = None) -> np.ndarray:
    """Check that ``w`` is a probability weight vector.

    Entries must be nonnegative and sum to one within ``SIMPLEX_TOL``.
    Returns the validated float64 array.
    """
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("weight vector must be 1-D and nonempty")
    if n is not None and arr.size != n:
        raise ValueError(f"weight vector has length {arr.size}, expected {n}")
    if np.any(arr < 0.0):
        raise ValueError("weights must be nonnegative")
    if abs(float(arr.sum()) - 1.0) > SIMPLEX_TOL:
        raise ValueError("weights must sum to 1 within 1e-12")
    return arr


def sort_permutation(u) -> np.ndarray:
    """Indices sorting ``u`` into nondecreasing order, ties by index.

    The stable tie-break makes the permutation (and everything downstream
    that uses it, like low-k weight selection) deterministic.
    """
    arr = as_utility_vector(u)
    return np.argsort(arr, kind="stable")


def _is_simplex_member(w: np.ndarray, tol: float = SIMPLEX_TOL) -> bool:
    return bool(np.all(w >= -tol) and abs(float(w.sum()) - 1.0) <= tol)


class WelfareMeasure(ABC):
    """Common interface for all welfare measures."""

    @abstractmethod
    def evaluate(self, u) -> float:
        """Welfare score of the utility vector ``u``."""

    @abstractmethod
    def select_weight(self, u) -> np.ndarray:
        """A weight-set member whose inner product with ``u`` equals
        ``evaluate(u)``.  Such a weight is a supergradient of the measure
        at ``u``; the selection rule is deterministic."""

    @abstractmethod
    def contains_weight(self, w) -> bool:
        """Whether ``w`` belongs to the measure's weight set."""

    @abstractmethod
    def weight_bound(self, caps) -> float:
        """Maximum of ``<w, caps>`` over the weight set (``caps`` >= 0).

        Used to bound accumulated supergradient norms: if agent i's
        supergradients never exceed ``caps[i]`` in norm, no weighted
        combination from the weight set exceeds this value.
        """

    def evaluate_many(self, U: np.ndarray) -> np.ndarray:
        """Vectorized ``evaluate`` over the rows of ``U`` (m, N)."""
        U = np.asarray(U, dtype=np.float64)
        return np.array([self.evaluate(row) for row in U])

    def __call__(self, u) -> float:
        return self.evaluate(u)


@dataclass(frozen=True, eq=False)
class AverageWelfare(WelfareMeasure):
    """Fixed weighted average of utilities; weight set is a single point."""

    weights: np.ndarray

    def __post_init__(self):
        w = validate_weights(self.weights)
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @staticmethod
    def uniform(n: int) -> "AverageWelfare":
        return AverageWelfare(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.weights.size

    def evaluate(self, u) -> float:
        arr = as_utility_vector(u)
        if arr.size != self.n:
            raise ValueError("dimension mismatch")
        acc = 0.0
        for i in range(arr.size):
            acc += float(self.weights[i]) * float(arr[i])
        return acc

    def select_weight(self, u) -> np.ndarray:
        arr = as_utility_vector(u)
        if arr.size != self.n:
            raise ValueError("dimension mismatch")
        return self.weights.copy()

    def contains_weight(self, w) -> bool:
        arr = np.asarray(w, dtype=np.float64)
        if arr.shape != self.weights.shape:
            raise ValueError("dimension mismatch")
        return bool(np.max(np.abs(arr - self.weights)) <= SIMPLEX_TOL)

    def weight_bound(self, caps) -> float:
        caps = np.asarray(caps, dtype=np.float64)
        return float(self.weights @ caps)

    def evaluate_many(self, U: np.ndarray) -> np.ndarray:
        return np.asarray(U, dtype=np.float64) @ self.weights


@dataclass(frozen=True, eq=False)
class LowKWelfare(WelfareMeasure):
    """Mean of the k smallest utilities.

    Interpolates between the worst-case score (k=1) and the uniform average
    (k=N).  Its weight set is the simplex with every coordinate capped at
    1/k, and the minimizing weight puts mass 1/k on the k lowest-utility
    agents (stable ties).
    """

    k: int

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError("k must be a positive integer")
        object.__setattr__(self, "k", int(self.k))

    def _check_dim(self, n: int) -> None:
        if self.k > n:
            raise ValueError(f"k={self.k} exceeds the number of agents {n}")

    def evaluate(self, u) -> float:
        arr = as_utility_vector(u)
        self._check_dim(arr.size)
        perm = np.argsort(arr, kind="stable")
        acc = 0.0
        for i in range(self.k):
            acc += float(arr[perm[i]])
        return acc / self.k

    def select_weight(self, u) -> np.ndarray:
        arr = as_utility_vector(u)
        self._check_dim(arr.size)
        perm = np.argsort(arr, kind="stable")
        w = np.zeros(arr.size)
        w[perm[: self.k]] = 1.0 / self.k
        return w

    def contains_weight(self, w) -> bool:
        arr = np.asarray(w, dtype=np.float64)
        if arr.ndim != 1 or arr.size < self.k:
            raise ValueError("dimension mismatch")
        if not _is_simplex_member(arr):
            return False
        return bool(np.all(arr <= 1.0 / self.k + SIMPLEX_TOL))

    def weight_bound(self, caps) -> float:
        caps = np.asarray(caps, dtype=np.float64)
        self._check_dim(caps.size)
        top = np.sort(caps)[::-1][: self.k]
        return float(top.sum() / self.k)

    def evaluate_many(self, U: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=np.float64)
        self._check_dim(U.shape[1])
        return np.sort(U, axis=1)[:, : self.k].sum(axis=1) / self.k


@dataclass(frozen=True, eq=False)
class MinimumWelfare(WelfareMeasure):
    """Worst-off utility; weight set is the whole simplex.

    Behaves identically to ``LowKWelfare(1)``; kept as its own type because
    callers frequently mean exactly "the minimum".
    """

    def evaluate(self, u) -> float:
        return LowKWelfare(1).evaluate(u)

    def select_weight(self, u) -> np.ndarray:
        return LowKWelfare(1).select_weight(u)

    def contains_weight(self, w) -> bool:
        arr = np.asarray(w, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("dimension mismatch")
        return _is_simplex_member(arr)

    def weight_bound(self, caps) -> float:
        caps = np.asarray(caps, dtype=np.float64)
        return float(caps.max())

    def evaluate_many(self, U: np.ndarray) -> np.ndarray:
        return np.asarray(U, dtype=np.float64).min(axis=1)


@dataclass(frozen=True, eq=False)
class VertexSetWelfare(WelfareMeasure):
    """Minimum weighted average over an explicit list of weight vertices.

    The weight set is the convex hull of the rows of ``vertices``; because a
    linear function attains its minimum over a polytope at a vertex, both
    evaluation and weight selection reduce to finite scans.
    """

    vertices: np.ndarray  # (n_vertices, n_agents)

    def __post_init__(self):
        arr = np.asarray(self.vertices, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("vertices must be a nonempty 2-D array")
        for row in arr:
            validate_weights(row)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "vertices", arr)

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    def _dots(self, arr: np.ndarray) -> list[float]:
        out = []
        for row in self.vertices:
            acc = 0.0
            for i in range(arr.size):
                acc += float(row[i]) * float(arr[i])
            out.append(acc)
        return out

    def evaluate(self, u) -> float:
        arr = as_utility_vector(u)
        if arr.size != self.n:
            raise ValueError("dimension mismatch")
        return min(self._dots(arr))

    def select_weight(self, u) -> np.ndarray:
        arr = as_utility_vector(u)
        if arr.size != self.n:
            raise ValueError("dimension mismatch")
        dots = self._dots(arr)
        best = min(range(len(dots)), key=lambda i: (dots[i], i))
        return self.vertices[best].copy()

    def contains_weight(self, w) -> bool:
        arr = np.asarray(w, dtype=np.float64)
        if arr.shape != (self.n,):
            raise ValueError("dimension mismatch")
        m = self.vertices.shape[0]
        # Feasibility of w = sum(lambda_j * vertex_j), lambda in the simplex.
        res = linprog(
            c=np.zeros(m),
            A_eq=np.vstack([self.vertices.T, np.ones((1, m))]),
            b_eq=np.append(arr, 1.0),
            bounds=[(0.0, None)] * m,
            method="highs",
        )
        if not res.success:
            return False
        recon = res.x @ self.vertices
        return bool(np.max(np.abs(recon - arr)) <= HULL_TOL)

    def weight_bound(self, caps) -> float:
        caps = np.asarray(caps, dtype=np.float64)
        return float(np.max(self.vertices @ caps))

    def evaluate_many(self, U: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=np.float64)
        return (U @ self.vertices.T).min(axis=1)


WelfareLike = Union[WelfareMeasure, Callable[[np.ndarray], float]]


@dataclass
class AxiomCheck:
    name: str
    passed: bool
    checked: int
    counterexample: tuple | None = None


@dataclass
class AxiomReport:
    """Outcome of the randomized welfare-axiom checker.

    Upper semi-continuity is not sampled: all four measure families are
    finite minima of continuous linear functions and therefore continuous,
    so the property holds by construction.
    """

    monotonicity: AxiomCheck
    concavity: AxiomCheck
    homogeneity: AxiomCheck
    normalization: AxiomCheck

    @property
    def passed(self) -> bool:
        return (
            self.monotonicity.passed
            and self.concavity.passed
            and self.homogeneity.passed
            and self.normalization.passed
        )

    def summary(self) -> str:
        lines = []
        for check in (self.monotonicity, self.concavity, self.homogeneity,
                      self.normalization):
            status = "pass" if check.passed else "FAIL"
            lines.append(f"{check.name}: {status} ({check.checked} checks)")
        return "\n".join(lines)


def _batch_eval(phi: WelfareLike, U: np.ndarray) -> np.ndarray:
    if isinstance(phi, WelfareMeasure):
        return phi.evaluate_many(U)
    return np.array([float(phi(row)) for row in U])


def check_axioms(phi: WelfareLike, samples, tol: float = 1e-9) -> AxiomReport:
    """Sample-based check of the welfare-measure axioms.

    ``phi`` may be a :class:`WelfareMeasure` or any callable mapping a
    utility vector to a float (useful as a negative control).  Checks run
    over all sample pairs:

    * monotonicity: phi(u) <= phi(max(u, v)) elementwise-join pairs;
    * concavity: phi of a midpoint >= average of phis;
    * positive homogeneity with factors 0, 0.5 and 2;
    * normalization: phi(1) == -phi(-1).
    """
    S = np.asarray(samples, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] < 1:
        raise ValueError("samples must be a nonempty 2-D array")
    m, n = S.shape
    vals = _batch_eval(phi, S)

    # Monotonicity against elementwise joins: u <= max(u, v) always holds,
    # which gives a dense supply of comparable pairs from arbitrary samples.
    idx_i, idx_j = np.triu_indices(m, k=1)
    joins = np.maximum(S[idx_i], S[idx_j])
    join_vals = _batch_eval(phi, joins)
    mono_bad = np.flatnonzero(
        (vals[idx_i] > join_vals + tol) | (vals[idx_j] > join_vals + tol)
    )
    mono = AxiomCheck("monotonicity", mono_bad.size == 0, idx_i.size)
    if mono_bad.size:
        b = int(mono_bad[0])
        mono.counterexample = (S[idx_i[b]].copy(), joins[b].copy())

    mids = 0.5 * (S[idx_i] + S[idx_j])
    mid_vals = _batch_eval(phi, mids)
    conc_bad = np.flatnonzero(mid_vals < 0.5 * (vals[idx_i] + vals[idx_j]) - tol)
    conc = AxiomCheck("concavity", conc_bad.size == 0, idx_i.size)
    if conc_bad.size:
        b = int(conc_bad[0])
        conc.counterexample = (S[idx_i[b]].copy(), S[idx_j[b]].copy())

    homo = AxiomCheck("homogeneity", True, 3 * m)
    for lam in (0.0, 0.5, 2.0):
        scaled_vals = _batch_eval(phi, lam * S)
        bad = np.flatnonzero(np.abs(scaled_vals - lam * vals) > tol)
        if bad.size:
            homo.passed = False
            homo.counterexample = (float(lam), S[int(bad[0])].copy())
            break

    ones = np.ones(n)
    norm_ok = abs(
        float(_batch_eval(phi, ones[None, :])[0])
        + float(_batch_eval(phi, -ones[None, :])[0])
    ) <= tol
    norm = AxiomCheck("normalization", norm_ok, 1)

    return AxiomReport(mono, conc, homo, norm)
