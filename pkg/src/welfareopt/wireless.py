"""Wireless power-control layer: interference model, QoS maps, gradients.

Agents transmit concurrently; agent k's signal quality is its
signal-to-interference-plus-noise ratio

    sinr_k(s) = gains[k, k] * exp(s_k)
                / (sum_{l != k} gains[k, l] * exp(s_l) + noise[k]),

where ``s`` holds log transmit powers.  A scalar QoS map converts the ratio
into the agent's utility.  Maps for which x -> qos(exp(x)) is concave make
every utility concave in log power (``assumption1`` below); the other two
popular maps are provided as flagged heuristics.

The scalar ``utilities``/``supergradient`` paths in
:class:`WirelessUtilityOracle` use plain sequential arithmetic so the
compiled solver kernel reproduces them exactly; the ``*_batch`` helpers are
vectorized for bulk evaluation (grid search, property tests, trace stats).
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from welfareopt.solver import Box, UtilityOracle


# ---------------------------------------------------------------------------
# QoS maps
# ---------------------------------------------------------------------------


class QoSMap(ABC):
    """Scalar map from a (positive) SINR value to a utility."""

    #: whether x -> value(exp(x)) is concave, i.e. utilities are concave in
    #: log power and the convergence theory applies.
    assumption1: bool
    #: identifier used by the compiled kernel (None = unsupported).
    kernel_id: int | None = None
    kernel_param: float = 0.0

    @abstractmethod
    def value(self, x: float) -> float: ...

    @abstractmethod
    def chain_coefficient(self, x: float) -> float:
        """d/ds value(sinr) factors through value'(x) * x; this returns it."""

    @abstractmethod
    def value_batch(self, x: np.ndarray) -> np.ndarray: ...

    @property
    @abstractmethod
    def label(self) -> str:
        """Short name used in file names and CLI arguments."""

    def to_dict(self) -> dict:
        return {"kind": self.label}


@dataclass(frozen=True)
class LogQoS(QoSMap):
    """Natural log of the SINR (high-SINR rate proxy)."""

    assumption1 = True
    kernel_id = 0

    def value(self, x: float) -> float:
        return math.log(x)

    def chain_coefficient(self, x: float) -> float:
        return 1.0

    def value_batch(self, x: np.ndarray) -> np.ndarray:
        return np.log(x)

    @property
    def label(self) -> str:
        return "log"


@dataclass(frozen=True)
class NegPowerQoS(QoSMap):
    """-1 / sinr^alpha with alpha >= 1 (negative error-rate proxy)."""

    alpha: float = 2.0
    assumption1 = True
    kernel_id = 1

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise ValueError("alpha must be at least 1")
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def kernel_param(self) -> float:
        return self.alpha

    def value(self, x: float) -> float:
        return -math.pow(x, -self.alpha)

    def chain_coefficient(self, x: float) -> float:
        return self.alpha * math.pow(x, -self.alpha)

    def value_batch(self, x: np.ndarray) -> np.ndarray:
        return -np.power(x, -self.alpha)

    @property
    def label(self) -> str:
        return f"neginv{self.alpha:g}"

    def to_dict(self) -> dict:
        return {"kind": "neginv", "alpha": self.alpha}


@dataclass(frozen=True)
class Log1pQoS(QoSMap):
    """log(1 + sinr): exact rate, but not concave in log power."""

    assumption1 = False
    kernel_id = 2

    def value(self, x: float) -> float:
        return math.log1p(x)

    def chain_coefficient(self, x: float) -> float:
        return x / (1.0 + x)

    def value_batch(self, x: np.ndarray) -> np.ndarray:
        return np.log1p(x)

    @property
    def label(self) -> str:
        return "log1p"


@dataclass(frozen=True)
class IdentityQoS(QoSMap):
    """Raw SINR as utility; not concave in log power."""

    assumption1 = False
    kernel_id = 3

    def value(self, x: float) -> float:
        return x

    def chain_coefficient(self, x: float) -> float:
        return x

    def value_batch(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64).copy()

    @property
    def label(self) -> str:
        return "id"


def parse_qos(token: str) -> QoSMap:
    """Parse a QoS spec: ``log``, ``neginv:ALPHA``, ``log1p`` or ``id``."""
    token = token.strip()
    if token == "log":
        return LogQoS()
    if token == "log1p":
        return Log1pQoS()
    if token == "id":
        return IdentityQoS()
    if token.startswith("neginv"):
        rest = token[len("neginv"):]
        if rest.startswith(":"):
            return NegPowerQoS(float(rest[1:]))
        if rest == "":
            return NegPowerQoS()
    raise ValueError(f"unknown QoS map {token!r}")


def _qos_from_dict(d: dict) -> QoSMap:
    kind = d["kind"]
    if kind == "log":
        return LogQoS()
    if kind == "neginv":
        return NegPowerQoS(float(d["alpha"]))
    if kind == "log1p":
        return Log1pQoS()
    if kind == "id":
        return IdentityQoS()
    raise ValueError(f"unknown QoS kind {kind!r}")


# ---------------------------------------------------------------------------
# Network model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """Channel gains, receiver noise powers and the QoS map.

    ``gains[k, k]`` is agent k's own-link gain (strictly positive);
    ``gains[k, l]`` for l != k scales the interference agent l causes at
    agent k's receiver (nonnegative).
    """

    gains: np.ndarray   # (n, n)
    noise: np.ndarray   # (n,)
    qos: QoSMap

    def __post_init__(self):
        V = np.asarray(self.gains, dtype=np.float64)
        s2 = np.asarray(self.noise, dtype=np.float64)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise ValueError("gains must be a square matrix")
        if s2.shape != (V.shape[0],):
            raise ValueError("noise must match the gain matrix size")
        if not (np.all(np.isfinite(V)) and np.all(np.isfinite(s2))):
            raise ValueError("gains and noise must be finite")
        if np.any(np.diag(V) <= 0):
            raise ValueError("diagonal gains must be strictly positive")
        if np.any(V < 0):
            raise ValueError("gains must be nonnegative")
        if np.any(s2 <= 0):
            raise ValueError("noise powers must be strictly positive")
        V = V.copy()
        s2 = s2.copy()
        V.flags.writeable = False
        s2.flags.writeable = False
        object.__setattr__(self, "gains", V)
        object.__setattr__(self, "noise", s2)

    @property
    def n(self) -> int:
        return self.noise.size

    def with_qos(self, qos: QoSMap) -> "NetworkModel":
        return replace(self, qos=qos)


def _interference_plus_noise(model: NetworkModel, es: list[float], k: int) -> float:
    acc = 0.0
    for l in range(model.n):
        if l != k:
            acc += float(model.gains[k, l]) * es[l]
    return acc + float(model.noise[k])


def sinr(model: NetworkModel, s, k: int) -> float:
    """SINR of agent ``k`` at log powers ``s`` (strictly positive)."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (model.n,):
        raise ValueError("dimension mismatch")
    es = [math.exp(float(v)) for v in s]
    den = _interference_plus_noise(model, es, k)
    return float(model.gains[k, k]) * es[k] / den


def utility(model: NetworkModel, s, k: int) -> float:
    """Agent ``k``'s utility: the QoS map applied to its SINR."""
    return model.qos.value(sinr(model, s, k))


def utility_gradient(model: NetworkModel, s, k: int) -> np.ndarray:
    """Gradient of s -> qos(sinr_k(s)).

    With r the SINR, den the interference-plus-noise term and
    c = qos'(r) * r, the own component is c and the component for j != k is
    -c * gains[k, j] * exp(s_j) / den.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (model.n,):
        raise ValueError("dimension mismatch")
    es = [math.exp(float(v)) for v in s]
    den = _interference_plus_noise(model, es, k)
    r = float(model.gains[k, k]) * es[k] / den
    c = model.qos.chain_coefficient(r)
    g = np.empty(model.n)
    for j in range(model.n):
        if j == k:
            g[j] = c
        else:
            g[j] = -(c * float(model.gains[k, j]) * es[j] / den)
    return g


def sinr_batch(model: NetworkModel, S: np.ndarray) -> np.ndarray:
    """SINR of every agent at every row of ``S`` (m, n) -> (m, n)."""
    S = np.asarray(S, dtype=np.float64)
    es = np.exp(S)
    diag = np.diag(model.gains)
    den = es @ model.gains.T - es * diag + model.noise
    return (diag * es) / den


def gradient_norm_cap(model: NetworkModel, box: Box, k: int) -> float:
    """Interval-arithmetic bound on sup over the box of the gradient norm.

    Deliberately loose where looseness is safe: correctness only requires
    the returned value to dominate every attainable gradient norm.
    """
    if box.dim != model.n:
        raise ValueError("dimension mismatch")
    lo, hi = box.lower, box.upper
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("gradient caps need a finite box")
    el = np.exp(lo)
    eu = np.exp(hi)
    V = model.gains
    s2 = float(model.noise[k])
    off = np.arange(model.n) != k
    den_min = s2 + float(V[k, off] @ el[off])
    den_max = s2 + float(V[k, off] @ eu[off])
    r_hi = float(V[k, k]) * float(eu[k]) / den_min
    r_lo = float(V[k, k]) * float(el[k]) / den_max

    qos = model.qos
    if isinstance(qos, LogQoS):
        c_hi = 1.0
    elif isinstance(qos, NegPowerQoS):
        c_hi = qos.alpha * math.pow(r_lo, -qos.alpha)  # decreasing in r
    elif isinstance(qos, Log1pQoS):
        c_hi = r_hi / (1.0 + r_hi)
    elif isinstance(qos, IdentityQoS):
        c_hi = r_hi
    else:  # pragma: no cover - interval bound unknown for exotic maps
        raise ValueError(f"no gradient cap rule for {type(qos).__name__}")

    cross_sq = float(np.sum(((V[k, off] * eu[off]) / den_min) ** 2))
    return c_hi * math.sqrt(1.0 + cross_sq)


# ---------------------------------------------------------------------------
# Oracle adapter for the solver
# ---------------------------------------------------------------------------


class WirelessUtilityOracle(UtilityOracle):
    """Solver-facing view of a network model."""

    def __init__(self, model: NetworkModel):
        self.model = model
        self.n_agents = model.n
        self.dim = model.n
        self.concave = model.qos.assumption1

    def utilities(self, theta: np.ndarray) -> np.ndarray:
        model = self.model
        n = model.n
        es = [math.exp(float(v)) for v in theta]
        u = np.empty(n)
        for k in range(n):
            den = _interference_plus_noise(model, es, k)
            r = float(model.gains[k, k]) * es[k] / den
            u[k] = model.qos.value(r)
        return u

    def supergradient(self, theta: np.ndarray, agent: int) -> np.ndarray:
        return utility_gradient(self.model, theta, agent)

    def utilities_batch(self, S: np.ndarray) -> np.ndarray:
        return self.model.qos.value_batch(sinr_batch(self.model, S))

    def gradient_caps(self, box: Box) -> np.ndarray:
        return np.array(
            [gradient_norm_cap(self.model, box, k) for k in range(self.model.n)]
        )


# ---------------------------------------------------------------------------
# Scenario generation and serialization
# ---------------------------------------------------------------------------


def generate_scenario(n: int, seed: int, qos: QoSMap | None = None) -> NetworkModel:
    """Random network: own gains Uniform[1, 3], cross gains Exponential
    with mean 0.1, noise power 0.2 everywhere.

    Deterministic given ``seed``; uses numpy's PCG64 generator with a fixed
    draw order (full cross-gain matrix first, then the diagonal), so
    scenarios reproduce exactly across runs and platforms.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    rng = np.random.default_rng(seed)
    gains = rng.exponential(scale=0.1, size=(n, n))
    np.fill_diagonal(gains, rng.uniform(1.0, 3.0, size=n))
    noise = np.full(n, 0.2)
    return NetworkModel(gains=gains, noise=noise, qos=qos or LogQoS())


def save_model(model: NetworkModel, path, seed: int | None = None) -> None:
    """Write a scenario as JSON; floats round-trip exactly.

    ``seed`` is informational provenance (the draw that produced the model)
    and is ignored when loading.
    """
    doc = {
        "n": model.n,
        "seed": seed,
        "gains": [[float(v) for v in row] for row in model.gains],
        "noise": [float(v) for v in model.noise],
        "qos": model.qos.to_dict(),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path) -> NetworkModel:
    doc = json.loads(Path(path).read_text())
    return NetworkModel(
        gains=np.array(doc["gains"], dtype=np.float64),
        noise=np.array(doc["noise"], dtype=np.float64),
        qos=_qos_from_dict(doc["qos"]),
    )
