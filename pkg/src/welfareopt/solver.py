"""Projected supergradient ascent for welfare maximization.

The solver maximizes phi(U(theta)) over a feasible allocation set, where
phi is a welfare measure and U is a vector of concave per-agent utilities
exposed through a :class:`UtilityOracle`.  Each iteration evaluates the
utilities, picks a minimizing weight from phi's dual weight set, combines
the selected agents' utility supergradients with those weights, and takes a
projected ascent step.  Both classical outputs are produced: the step-size
weighted (ergodic) average of the iterates and the best iterate seen.

A compiled kernel covers the hot case (low-k welfare of wireless utilities
on a box); the pure-Python loop below is the reference implementation and
the fallback when the extension is unavailable.  The two paths are written
to produce bit-identical traces.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import lambertw

from welfareopt._kernels import compiled_run as _compiled_run
from welfareopt.welfare import LowKWelfare, MinimumWelfare, WelfareMeasure


class SolverError(RuntimeError):
    """Raised when a run cannot proceed (e.g. the oracle returned a
    non-finite utility at some iterate)."""


class UnsupportedConfigurationError(ValueError):
    """Raised for feasible-set shapes the projection does not support."""


# ---------------------------------------------------------------------------
# Feasible sets and projection
# ---------------------------------------------------------------------------


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box; bounds may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("bounds must be 1-D arrays of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("infeasible box: lower > upper")
        object.__setattr__(self, "lower", _freeze(lo))
        object.__setattr__(self, "upper", _freeze(hi))

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.lower.shape:
            raise ValueError("dimension mismatch")
        return np.clip(x, self.lower, self.upper)

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(
            np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol)
        )

    def diameter(self) -> float:
        edges = self.upper - self.lower
        if not np.all(np.isfinite(edges)):
            return math.inf
        return float(np.linalg.norm(edges))

    def sample(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("cannot sample an unbounded box")
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))


@dataclass(frozen=True, eq=False)
class LogPolytope:
    """Feasible set {theta : coeffs @ exp(theta) <= limits}.

    ``coeffs`` must be nonnegative and ``limits`` strictly positive, so the
    set is nonempty (sufficiently negative theta always qualifies).
    Projection is supported when the constraints reduce to a box (each row
    touching exactly one variable) or consist of a single row; other shapes
    raise :class:`UnsupportedConfigurationError`.
    """

    coeffs: np.ndarray  # (m, d)
    limits: np.ndarray  # (m,)

    def __post_init__(self):
        C = np.asarray(self.coeffs, dtype=np.float64)
        p = np.asarray(self.limits, dtype=np.float64)
        if C.ndim != 2 or p.ndim != 1 or C.shape[0] != p.size:
            raise ValueError("coeffs must be (m, d) with m matching limits")
        if np.any(C < 0) or not np.all(np.isfinite(C)):
            raise ValueError("coeffs must be finite and nonnegative")
        if np.any(p <= 0) or not np.all(np.isfinite(p)):
            raise ValueError("limits must be finite and positive")
        object.__setattr__(self, "coeffs", _freeze(C))
        object.__setattr__(self, "limits", _freeze(p))

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def as_box(self) -> Box | None:
        """Equivalent box when every row constrains a single variable."""
        upper = np.full(self.dim, np.inf)
        for row, limit in zip(self.coeffs, self.limits):
            nz = np.flatnonzero(row)
            if nz.size == 0:
                continue  # vacuous: limits are positive
            if nz.size > 1:
                return None
            j = int(nz[0])
            upper[j] = min(upper[j], math.log(limit / row[j]))
        return Box(np.full(self.dim, -np.inf), upper)

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(self.coeffs @ np.exp(x) <= self.limits * (1 + tol) + tol))

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError("dimension mismatch")
        box = self.as_box()
        if box is not None:
            return box.project(x)
        if self.coeffs.shape[0] == 1:
            return self._project_single_row(x)
        raise UnsupportedConfigurationError(
            "projection supports box-reducible constraints or a single row; "
            f"got {self.coeffs.shape[0]} coupled rows"
        )

    def _project_single_row(self, x: np.ndarray) -> np.ndarray:
        c = self.coeffs[0]
        cap = float(self.limits[0])
        if float(c @ np.exp(x)) <= cap:
            return x.copy()

        # Stationarity of 0.5*||y - x||^2 + mu*(c @ exp(y) - cap) gives
        # y_j = x_j - W(mu * c_j * exp(x_j)); the slack is strictly
        # decreasing in mu, so the multiplier solves a 1-D root problem.
        active = c > 0
        z0 = c[active] * np.exp(x[active])

        def slack(mu: float) -> float:
            y = x[active] - lambertw(mu * z0).real
            return float(c[active] @ np.exp(y)) - cap

        hi = 1.0
        while slack(hi) > 0:
            hi *= 2.0
        mu = brentq(slack, 0.0, hi, xtol=1e-15, rtol=1e-14)
        y = x.copy()
        y[active] = x[active] - lambertw(mu * z0).real
        return y


FeasibleSet = Box | LogPolytope


def project(feasible: FeasibleSet, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto the feasible set."""
    return feasible.project(x)


# ---------------------------------------------------------------------------
# Step-size schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedStep:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("step size must be positive")

    def gammas(self, horizon: int) -> np.ndarray:
        return np.full(horizon, self.gamma)


@dataclass(frozen=True)
class InverseSqrtStep:
    """Diminishing steps c / sqrt(t + 1) for t = 0, 1, ..."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("step coefficient must be positive")

    def gammas(self, horizon: int) -> np.ndarray:
        out = np.empty(horizon)
        for t in range(horizon):
            out[t] = self.c / math.sqrt(t + 1.0)
        return out


StepSchedule = FixedStep | InverseSqrtStep


# ---------------------------------------------------------------------------
# Oracle contract and run record
# ---------------------------------------------------------------------------


class UtilityOracle(ABC):
    """Per-agent utilities and their supergradients at an allocation.

    Implementations must set ``n_agents``, ``dim`` and ``concave`` (whether
    every utility is concave on the feasible set; runs with non-concave
    utilities are flagged heuristic and excluded from convergence-theory
    assertions).
    """

    n_agents: int
    dim: int
    concave: bool = True

    @abstractmethod
    def utilities(self, theta: np.ndarray) -> np.ndarray:
        """Utility of every agent at ``theta`` (shape (n_agents,))."""

    @abstractmethod
    def supergradient(self, theta: np.ndarray, agent: int) -> np.ndarray:
        """A supergradient of agent's utility at ``theta`` (shape (dim,))."""


@dataclass(frozen=True, eq=False)
class SolverRun:
    """Full record of one ascent run.

    Per-iteration arrays cover t = 0..T-1: the iterate, its welfare value,
    the selected weight vector, the accumulated supergradient norm, and the
    step size used.  ``ergodic`` is the step-weighted average of the
    iterates; ``best``/``best_value`` track the best iterate.
    """

    thetas: np.ndarray        # (T, dim)
    welfare: np.ndarray       # (T,)
    weights: np.ndarray       # (T, n_agents)
    grad_norms: np.ndarray    # (T,)
    gammas: np.ndarray        # (T,)
    ergodic: np.ndarray       # (dim,)
    best: np.ndarray          # (dim,)
    best_value: float
    best_index: int
    heuristic: bool
    start_projected: bool
    backend: str

    @property
    def horizon(self) -> int:
        return self.welfare.size


def _finish_run(
    thetas, welfare, weights, grad_norms, gammas, heuristic, start_projected, backend
) -> SolverRun:
    total = float(gammas.sum())
    ergodic = (gammas[:, None] * thetas).sum(axis=0) / total
    best_index = int(np.argmax(welfare))
    return SolverRun(
        thetas=_freeze(thetas),
        welfare=_freeze(welfare),
        weights=_freeze(weights),
        grad_norms=_freeze(grad_norms),
        gammas=_freeze(gammas),
        ergodic=_freeze(ergodic),
        best=thetas[best_index].copy(),
        best_value=float(welfare[best_index]),
        best_index=best_index,
        heuristic=heuristic,
        start_projected=start_projected,
        backend=backend,
    )


# ---------------------------------------------------------------------------
# The ascent loop
# ---------------------------------------------------------------------------


def _run_loop_python(phi, oracle, feasible, theta0, horizon, gammas):
    d = theta0.size
    n = oracle.n_agents
    thetas = np.empty((horizon, d))
    welfare = np.empty(horizon)
    weights = np.empty((horizon, n))
    grad_norms = np.empty(horizon)
    theta = theta0.copy()
    for t in range(horizon):
        u = oracle.utilities(theta)
        if u.shape != (n,) or not np.all(np.isfinite(u)):
            raise SolverError(
                f"utility oracle failed at iteration {t} "
                f"(theta={theta.tolist()}): non-finite or misshaped utilities"
            )
        value = phi.evaluate(u)
        w = phi.select_weight(u)
        g = np.zeros(d)
        # Only agents carrying weight are queried; zero-weight agents cannot
        # contribute to the accumulated supergradient.
        for i in np.flatnonzero(w):
            g += w[i] * oracle.supergradient(theta, int(i))
        acc = 0.0
        for j in range(d):
            acc += float(g[j]) * float(g[j])
        thetas[t] = theta
        welfare[t] = value
        weights[t] = w
        grad_norms[t] = math.sqrt(acc)
        theta = feasible.project(theta + gammas[t] * g)
    return thetas, welfare, weights, grad_norms


def _kernel_eligible(phi, oracle, feasible) -> bool:
    if _compiled_run is None:
        return False
    if not isinstance(phi, (LowKWelfare, MinimumWelfare)):
        return False
    # Imported here to avoid a circular import at module load.
    from welfareopt.wireless import WirelessUtilityOracle

    if not isinstance(oracle, WirelessUtilityOracle):
        return False
    if oracle.model.qos.kernel_id is None:
        return False
    if not isinstance(feasible, Box) or feasible.dim != oracle.dim:
        return False
    return bool(
        np.all(np.isfinite(feasible.lower)) and np.all(np.isfinite(feasible.upper))
    )


def _run_loop_kernel(phi, oracle, feasible, theta0, horizon, gammas):
    k = 1 if isinstance(phi, MinimumWelfare) else phi.k
    model = oracle.model
    n = model.n
    thetas = np.empty((horizon, n))
    welfare = np.empty(horizon)
    weights = np.empty((horizon, n))
    grad_norms = np.empty(horizon)
    status = _compiled_run(
        np.ascontiguousarray(model.gains),
        np.ascontiguousarray(model.noise),
        model.qos.kernel_id,
        model.qos.kernel_param,
        k,
        np.ascontiguousarray(feasible.lower),
        np.ascontiguousarray(feasible.upper),
        np.ascontiguousarray(theta0),
        np.ascontiguousarray(gammas),
        horizon,
        thetas,
        welfare,
        weights,
        grad_norms,
    )
    if status >= 0:
        raise SolverError(
            f"utility oracle failed at iteration {status}: non-finite utility"
        )
    return thetas, welfare, weights, grad_norms


def maximize_welfare(
    phi: WelfareMeasure,
    oracle: UtilityOracle,
    feasible: FeasibleSet,
    theta0,
    horizon: int,
    schedule: StepSchedule,
    use_kernel: bool | None = None,
) -> SolverRun:
    """Run projected supergradient ascent on phi(U(theta)).

    ``theta0`` is projected onto the feasible set if needed (recorded in
    ``SolverRun.start_projected``).  ``use_kernel`` forces the compiled or
    pure-Python loop; the default picks the compiled kernel whenever the
    problem shape supports it.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    theta0 = np.asarray(theta0, dtype=np.float64)
    if theta0.shape != (oracle.dim,):
        raise ValueError("theta0 has the wrong dimension")
    start_projected = not feasible.contains(theta0)
    start = feasible.project(theta0)
    gammas = schedule.gammas(horizon)

    eligible = _kernel_eligible(phi, oracle, feasible)
    if use_kernel is True and not eligible:
        raise ValueError("compiled kernel unavailable for this configuration")
    run_loop = (
        _run_loop_kernel
        if (eligible and use_kernel is not False)
        else _run_loop_python
    )
    thetas, welfare, weights, grad_norms = run_loop(
        phi, oracle, feasible, start, horizon, gammas
    )
    return _finish_run(
        thetas,
        welfare,
        weights,
        grad_norms,
        gammas,
        heuristic=not oracle.concave,
        start_projected=start_projected,
        backend="compiled" if run_loop is _run_loop_kernel else "python",
    )


def maximize_lowest_k(
    k: int,
    oracle: UtilityOracle,
    feasible: FeasibleSet,
    theta0,
    horizon: int,
    schedule: StepSchedule,
    use_kernel: bool | None = None,
) -> SolverRun:
    """Ascent specialized to the mean of the k lowest utilities.

    Exactly the loop of :func:`maximize_welfare` with the low-k measure:
    per iteration the utilities are sorted, the k worst agents get weight
    1/k, and only those k supergradients are queried.
    """
    if not 1 <= k <= oracle.n_agents:
        raise ValueError(f"k={k} out of range for {oracle.n_agents} agents")
    return maximize_welfare(
        LowKWelfare(k), oracle, feasible, theta0, horizon, schedule, use_kernel
    )


# ---------------------------------------------------------------------------
# Convergence bookkeeping
# ---------------------------------------------------------------------------


def convergence_gap_bound(
    radius: float, grad_bound: float, schedule: StepSchedule, horizon: int
) -> float:
    """Worst-case optimality gap of the best/ergodic output after T steps.

    Computes radius^2 / sum(gamma) + grad_bound^2 * sum(gamma^2) / sum(gamma).
    ``radius`` squares to half the squared diameter of the feasible set
    (pass diameter / sqrt(2)); ``grad_bound`` caps the accumulated
    supergradient norms, e.g. from :func:`supergradient_norm_bound`.
    """
    if radius < 0 or grad_bound < 0:
        raise ValueError("radius and grad_bound must be nonnegative")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    g = schedule.gammas(horizon)
    total = float(g.sum())
    return radius * radius / total + grad_bound * grad_bound * float(
        (g * g).sum()
    ) / total


def supergradient_norm_bound(caps, phi: WelfareMeasure) -> float:
    """Upper bound on accumulated supergradient norms.

    Given per-agent caps M[i] >= sup-norm of agent i's utility
    supergradients over the feasible set, the weighted accumulation never
    exceeds max over the weight set of <w, M>.
    """
    caps = np.asarray(caps, dtype=np.float64)
    if np.any(caps < 0):
        raise ValueError("per-agent caps must be nonnegative")
    return phi.weight_bound(caps)


__all__ = [
    "Box",
    "FixedStep",
    "InverseSqrtStep",
    "LogPolytope",
    "SolverError",
    "SolverRun",
    "UnsupportedConfigurationError",
    "UtilityOracle",
    "convergence_gap_bound",
    "maximize_lowest_k",
    "maximize_welfare",
    "project",
    "supergradient_norm_bound",
]
