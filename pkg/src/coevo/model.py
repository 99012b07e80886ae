"""Model constants, influence graph, incentives and transition rates.

Behavior is coded as ``x_i = 1`` (responsible) and ``x_i = 0`` (irresponsible).
The rate formulas accept either a 0/1 behavior vector or a vector of
probabilities ``p1``; the mean-field layer relies on the latter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import AssumptionError, ParameterError

DENSE_LIMIT = 64


@dataclass(frozen=True)
class ModelParams:
    """The six model constants.

    Attributes:
        gamma: growth coefficient of the impact driven by irresponsible behavior (1/time).
        tau: impact reduction rate (1/time).
        mu: gain of the population response to the impact.
        alpha: awareness-campaign level.
        kappa: cost of responsible behavior.
        sigma: subsidy level, reduces the cost; must satisfy ``0 <= sigma <= kappa``.
    """

    gamma: float = 10.0
    tau: float = 0.1
    mu: float = 0.6
    alpha: float = 0.3
    kappa: float = 3.0
    sigma: float = 0.6

    def __post_init__(self):
        for name in ("gamma", "tau", "mu", "alpha", "kappa", "sigma"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("gamma", "tau", "mu", "kappa"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.alpha < 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 <= self.sigma <= self.kappa:
            raise ParameterError(
                f"sigma must lie in [0, kappa={self.kappa}], got {self.sigma}")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("gamma", "tau", "mu", "alpha", "kappa", "sigma")}


# Parameter values used for the reference phase portraits.
REFERENCE_PARAMS = ModelParams(gamma=10.0, tau=0.1, mu=0.6, alpha=0.3, kappa=3.0, sigma=0.6)


@dataclass(frozen=True)
class AssumptionReport:
    tau_below_gamma: bool
    cost_dominates: bool
    messages: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return self.tau_below_gamma and self.cost_dominates


def validate_assumptions(params: ModelParams) -> AssumptionReport:
    """Check the regime ``tau < gamma`` and ``kappa > sigma + alpha + 1``."""
    p = params
    first = p.tau < p.gamma
    second = p.kappa > p.sigma + p.alpha + 1
    msgs = []
    if not first:
        msgs.append(f"tau < gamma fails: tau={p.tau}, gamma={p.gamma}")
    if not second:
        msgs.append(
            f"kappa > sigma + alpha + 1 fails: kappa={p.kappa}, "
            f"sigma + alpha + 1={p.sigma + p.alpha + 1}")
    return AssumptionReport(first, second, tuple(msgs))


def require_assumptions(params: ModelParams) -> None:
    report = validate_assumptions(params)
    if not report.holds:
        raise AssumptionError("; ".join(report.messages))


@dataclass(frozen=True, eq=False)
class Graph:
    """Static directed influence network.

    ``neighbors[i]`` lists the nodes that influence node ``i``. Use
    :meth:`complete` for the all-to-all network (every node, itself included)
    or :meth:`from_edges` for an explicit edge list.
    """

    n: int
    neighbors: tuple[Sequence[int], ...]
    is_complete: bool = False
    _weights: sparse.csr_array | np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("graph needs at least one node")
        if len(self.neighbors) != self.n:
            raise ParameterError(
                f"neighbors has {len(self.neighbors)} entries for n={self.n}")
        if self.is_complete:
            return
        rows, cols = [], []
        for i, nbrs in enumerate(self.neighbors):
            if len(nbrs) == 0:
                raise ParameterError(f"node {i} has no neighbors (degree 0)")
            if len(set(nbrs)) != len(nbrs):
                raise ParameterError(f"node {i} lists a neighbor more than once")
            for j in nbrs:
                if not 0 <= j < self.n:
                    raise ParameterError(f"neighbor index {j} of node {i} outside [0, {self.n})")
            rows.extend([i] * len(nbrs))
            cols.extend(nbrs)
        deg = np.array([len(nb) for nb in self.neighbors], dtype=float)
        data = 1.0 / deg[np.asarray(rows, dtype=int)]
        w = sparse.csr_array((data, (rows, cols)), shape=(self.n, self.n))
        # dense products are cheaper than sparse ones for small graphs
        object.__setattr__(self, "_weights", w.toarray() if self.n <= DENSE_LIMIT else w)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        everyone = range(n)
        return cls(n, tuple(everyone for _ in range(n)), is_complete=True)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build from pairs ``(i, j)`` meaning ``j`` influences ``i``."""
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for i, j in edges:
            i, j = int(i), int(j)
            if not 0 <= i < n:
                raise ParameterError(f"edge source {i} outside [0, {n})")
            nbrs[i].append(j)
        return cls(n, tuple(tuple(nb) for nb in nbrs))

    @classmethod
    def random(cls, n: int, p: float, seed: int, self_loops: bool = True) -> "Graph":
        """Directed Erdos-Renyi graph; with ``self_loops`` every degree is >= 1."""
        rng = np.random.default_rng(seed)
        adj = rng.random((n, n)) < p
        if self_loops:
            np.fill_diagonal(adj, True)
        return cls(n, tuple(tuple(np.flatnonzero(row).tolist()) for row in adj))

    @property
    def degrees(self) -> np.ndarray:
        if self.is_complete:
            return np.full(self.n, self.n)
        return np.array([len(nb) for nb in self.neighbors])

    def neighbor_mean(self, values: np.ndarray) -> np.ndarray:
        """``(1/d_i) * sum_{j in N_i} values[j]`` for every node ``i``."""
        values = np.asarray(values, dtype=float)
        if self.is_complete:
            return np.full(self.n, values.mean())
        return self._weights @ values

    def dense_weights(self) -> np.ndarray:
        if self.is_complete:
            return np.full((self.n, self.n), 1.0 / self.n)
        w = self._weights
        return w.toarray() if sparse.issparse(w) else w.copy()


def as_behavior(bits, n: int | None = None) -> np.ndarray:
    """Validate a 0/1 behavior vector and return it as an int8 array."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ParameterError("behavior vector must be one-dimensional")
    if not np.all((arr == 0) | (arr == 1)):
        raise ParameterError("behavior entries must be exactly 0 or 1")
    if n is not None and arr.size != n:
        raise ParameterError(f"behavior vector has length {arr.size}, expected {n}")
    return arr.astype(np.int8)


def _check_node(i: int, g: Graph) -> None:
    if not 0 <= i < g.n:
        raise ParameterError(f"node index {i} outside [0, {g.n})")


def incentive_vectors(X, eps: float, g: Graph, params: ModelParams):
    """Incentives ``(iota1, iota0)`` of every node, as arrays."""
    X = np.asarray(X, dtype=float)
    s = g.neighbor_mean(X)
    iota1 = s + params.mu * eps + params.alpha
    iota0 = (1.0 - s) + params.kappa - params.sigma
    return iota1, iota0


def rate_coefficients(X, g: Graph, params: ModelParams):
    """Split the rates so that ``rho01 = a01 + eps * b01`` and ``rho10`` is eps-free.

    Returns ``(a01, b01, rho10)`` arrays. The split exists because the
    responsible incentive is affine in the impact.
    """
    X = np.asarray(X, dtype=float)
    s = g.neighbor_mean(X)
    a01 = g.neighbor_mean(X * (s + params.alpha))
    b01 = params.mu * s
    rho10 = g.neighbor_mean((1.0 - X) * ((1.0 - s) + params.kappa - params.sigma))
    return a01, b01, rho10


def rate_vectors(X, eps: float, g: Graph, params: ModelParams):
    """Switching rates ``(rho01, rho10)`` of every node."""
    a01, b01, rho10 = rate_coefficients(X, g, params)
    return a01 + eps * b01, rho10


def node_incentives(i: int, X, eps: float, g: Graph, params: ModelParams) -> tuple[float, float]:
    _check_node(i, g)
    X = np.asarray(X, dtype=float)
    nbrs = np.fromiter(g.neighbors[i], dtype=int)
    if nbrs.size == 0:
        raise ParameterError(f"node {i} has degree 0")
    frac = X[nbrs].mean()
    iota1 = frac + params.mu * eps + params.alpha
    iota0 = (1.0 - frac) + params.kappa - params.sigma
    return float(iota1), float(iota0)


def node_rates(i: int, X, eps: float, g: Graph, params: ModelParams) -> tuple[float, float]:
    """Rates at which node ``i`` switches 0 -> 1 and 1 -> 0.

    Each rate averages, over the neighbors of ``i``, the neighbor's behavior
    indicator times that neighbor's own incentive.
    """
    _check_node(i, g)
    X = np.asarray(X, dtype=float)
    nbrs = list(g.neighbors[i])
    iota = [node_incentives(j, X, eps, g, params) for j in nbrs]
    d = len(nbrs)
    rho01 = sum(X[j] * io[0] for j, io in zip(nbrs, iota)) / d
    rho10 = sum((1.0 - X[j]) * io[1] for j, io in zip(nbrs, iota)) / d
    return float(rho01), float(rho10)


def growth_rate(xbar0: float, params: ModelParams) -> float:
    """Impact growth rate given the irresponsible fraction ``xbar0``."""
    if not 0.0 <= xbar0 <= 1.0:
        raise ParameterError(f"fraction must lie in [0, 1], got {xbar0}")
    return params.gamma * xbar0 - params.tau


def mf_incentives(x: float, eps: float, params: ModelParams) -> tuple[float, float]:
    """Incentives on the complete graph, as functions of the responsible fraction."""
    return x + params.mu * eps + params.alpha, 1.0 - x + params.kappa - params.sigma
