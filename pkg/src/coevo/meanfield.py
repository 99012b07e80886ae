"""Mean-field dynamics: the per-node probability system and its planar reduction.

The node system evolves ``p1[i] = P(x_i = 1)`` together with the impact on
an arbitrary influence graph. On the complete graph with a uniform initial
condition it collapses onto the planar system in ``(x, eps)``, where ``x`` is
the population-average probability of responsible behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from . import ode
from .errors import ParameterError
from .model import Graph, ModelParams, rate_coefficients


@dataclass(frozen=True)
class PlanarState:
    x: float
    eps: float

    def __post_init__(self):
        x, eps = float(self.x), float(self.eps)
        if not (0.0 <= x <= 1.0):
            raise ParameterError(f"x must lie in [0, 1], got {x}")
        if not (eps >= 0.0 and math.isfinite(eps)):
            raise ParameterError(f"eps must be finite and >= 0, got {eps}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "eps", eps)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.eps])

    @property
    def interior(self) -> bool:
        return 0.0 < self.x < 1.0 and self.eps > 0.0


@dataclass(frozen=True, eq=False)
class NodeState:
    """Per-node probabilities of responsible behavior plus the shared impact."""

    p1: np.ndarray
    eps: float

    def __post_init__(self):
        p1 = as_probabilities(self.p1)
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise ParameterError(f"eps must be finite and >= 0, got {self.eps}")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "eps", float(self.eps))

    @classmethod
    def uniform(cls, n: int, p: float, eps: float) -> "NodeState":
        return cls(np.full(n, float(p)), eps)


def as_probabilities(p1) -> np.ndarray:
    arr = np.array(p1, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError("p1 must be a non-empty one-dimensional vector")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ParameterError("every p1 entry must lie in [0, 1]")
    return arr


def node_mf_rhs(p1, eps: float, g: Graph, params: ModelParams):
    p1 = np.asarray(p1, dtype=float)
    a01, b01, rho10 = rate_coefficients(p1, g, params)
    rho01 = a01 + eps * b01
    dp1 = rho01 * (1.0 - p1) - rho10 * p1
    deps = (params.gamma * (1.0 - p1.mean()) - params.tau) * eps
    return dp1, deps


def planar_rhs(s, params: ModelParams) -> tuple[float, float]:
    """Vector field of the planar system at ``s`` (a PlanarState or ``(x, eps)``)."""
    x, eps = (s.x, s.eps) if isinstance(s, PlanarState) else (float(s[0]), float(s[1]))
    p = params
    dx = x * (1.0 - x) * (2.0 * x + p.mu * eps + p.alpha + p.sigma - p.kappa - 1.0)
    deps = (p.gamma * (1.0 - x) - p.tau) * eps
    return dx, deps


def reduce_to_planar(p1, eps: float) -> PlanarState:
    return PlanarState(float(np.mean(p1)), eps)


def _planar_field(params: ModelParams):
    g, t, m = params.gamma, params.tau, params.mu
    offset = params.alpha + params.sigma - params.kappa - 1.0

    def fun(_t, y):
        x, e = y.tolist()
        return np.array([x * (1.0 - x) * (2.0 * x + m * e + offset), (g * (1.0 - x) - t) * e])

    return fun


def _node_field(g: Graph, params: ModelParams):
    """Node system as one vector ``(p1, eps)``; same arithmetic as :func:`node_mf_rhs`."""
    n = g.n
    gam, tau, mu, alpha = params.gamma, params.tau, params.mu, params.alpha
    cost = params.kappa - params.sigma
    inv_n = 1.0 / n

    if g.is_complete:
        # every neighborhood is the whole population: the means are scalars
        def fun(_t, y):
            p1, e = y[:n], float(y[n])
            s = p1.sum() * inv_n
            q1 = 1.0 - p1
            out = np.empty(n + 1)
            out[:n] = (s * (s + alpha) + e * (mu * s)) * q1 - (1.0 - s) * ((1.0 - s) + cost) * p1
            out[n] = (gam * (1.0 - s) - tau) * e
            return out

        return fun

    w = g._weights

    def fun(_t, y):
        p1, e = y[:n], float(y[n])
        s = w @ p1
        q1 = 1.0 - p1
        out = np.empty(n + 1)
        out[:n] = (w @ (p1 * (s + alpha)) + e * (mu * s)) * q1 - (w @ (q1 * ((1.0 - s) + cost))) * p1
        out[n] = (gam * (1.0 - p1.sum() * inv_n) - tau) * e
        return out

    return fun


def integrate_planar(params: ModelParams, init, horizon: float, *, rtol: float = 1e-9,
                     atol: float = 1e-12, stop=None, field=None, **kw) -> ode.Trajectory:
    """Integrate the planar system in natural coordinates; columns are ``(x, eps)``.

    ``field`` replaces the vector field (used by feedback-controlled variants).
    """
    init = init if isinstance(init, PlanarState) else PlanarState(*init)
    fun = field if field is not None else _planar_field(params)
    return ode.solve(fun, init.as_array(), horizon, rtol=rtol, atol=atol,
                     lower=[0.0, 0.0], upper=[1.0, np.inf], stop=stop, **kw)


def integrate_nodes(g: Graph, params: ModelParams, init: NodeState, horizon: float, *,
                    rtol: float = 1e-9, atol: float = 1e-12, stop=None, **kw) -> ode.Trajectory:
    """Integrate the node system; columns are ``p1[0..n-1]`` followed by ``eps``."""
    if init.p1.size != g.n:
        raise ParameterError(f"initial p1 has length {init.p1.size}, graph has {g.n} nodes")
    fun = _node_field(g, params)
    n = g.n

    y0 = np.append(init.p1, init.eps)
    upper = np.append(np.ones(n), np.inf)
    return ode.solve(fun, y0, horizon, rtol=rtol, atol=atol,
                     lower=0.0, upper=upper, stop=stop, **kw)


def integrate(init, horizon: float, params: ModelParams, graph: Graph | None = None,
              **kw) -> ode.Trajectory:
    """Dispatch on the state type: PlanarState -> planar, NodeState -> node system."""
    if isinstance(init, NodeState):
        if graph is None:
            raise ParameterError("node system needs a graph")
        return integrate_nodes(graph, params, init, horizon, **kw)
    return integrate_planar(params, init, horizon, **kw)


class InteriorTrajectory:
    """Planar trajectory integrated in the chart ``u = logit(x)``, ``v = log(eps)``.

    Orbits of the planar system pass exponentially close to the edges of the
    domain, far closer than double precision resolves in ``x``. In the chart
    those passages stay well conditioned. Calling the object returns natural
    ``(x, eps)`` values; :meth:`chart` returns the raw ``(u, v)``.
    """

    def __init__(self, inner: ode.Trajectory):
        self.inner = inner
        self.t = inner.t
        self.y = self._to_natural(inner.y)

    @staticmethod
    def _to_natural(uv):
        uv = np.asarray(uv)
        return np.stack([expit(uv[..., 0]), np.exp(uv[..., 1])], axis=-1)

    def chart(self, t):
        return self.inner(t)

    def __call__(self, t):
        return self._to_natural(self.inner(t))

    @property
    def t_final(self) -> float:
        return self.inner.t_final

    @property
    def terminated(self) -> bool:
        return self.inner.terminated


def planar_chart_field(params: ModelParams):
    g, t, m = params.gamma, params.tau, params.mu
    offset = params.alpha + params.sigma - params.kappa - 1.0

    def fun(_t, y):
        x = expit(y[0])
        one_minus_x = expit(-y[0])
        e = math.exp(y[1]) if y[1] < 700 else math.inf
        return np.array([2.0 * x + m * e + offset, g * one_minus_x - t])

    return fun


def integrate_planar_interior(params: ModelParams, init, horizon: float, *,
                              rtol: float = 1e-9, atol: float = 1e-12, stop=None,
                              field=None, **kw) -> InteriorTrajectory:
    """Integrate an interior initial condition in the logit/log chart.

    ``stop`` and ``field`` act on chart coordinates ``(u, v)``.
    """
    init = init if isinstance(init, PlanarState) else PlanarState(*init)
    if not init.interior:
        raise ParameterError("chart integration needs 0 < x < 1 and eps > 0")
    y0 = np.array([logit(init.x), math.log(init.eps)])
    fun = field if field is not None else planar_chart_field(params)
    return InteriorTrajectory(ode.solve(fun, y0, horizon, rtol=rtol, atol=atol, stop=stop, **kw))
