"""Exact event-driven simulation of the n-agent behavior process.

Between behavior changes the irresponsible fraction is constant, so the
impact evolves as a pure exponential and the total switching rate has the
form ``A + B * exp(r * dt)``. Its integral is closed-form, which lets the
waiting time be drawn exactly by inverting the integrated hazard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ParameterError, SimulationOverflow
from .model import Graph, ModelParams, as_behavior, rate_coefficients, rate_vectors

EPS_OVERFLOW = 1e12
HAZARD_TOL = 1e-12
MAX_GENERATOR_NODES = 12


@dataclass(frozen=True, eq=False)
class PopulationState:
    t: float
    X: np.ndarray
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "X", as_behavior(self.X))
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise ParameterError(f"eps must be finite and >= 0, got {self.eps}")
        if self.t < 0:
            raise ParameterError("t must be >= 0")

    @classmethod
    def with_fraction(cls, n: int, xbar1: float, eps: float, t: float = 0.0) -> "PopulationState":
        """First ``round(xbar1 * n)`` nodes responsible, the rest irresponsible."""
        k = int(round(xbar1 * n))
        X = np.zeros(n, dtype=np.int8)
        X[:k] = 1
        return cls(t, X, eps)


@dataclass(eq=False)
class EventTrajectory:
    """Sample path: initial state plus the list of behavior flips.

    ``eps_at[k]`` is the impact just after event ``k``; between events the
    impact is ``eps_k * exp(r_k * (t - t_k))`` with ``r_k`` fixed by the
    irresponsible fraction in force.
    """

    params: ModelParams
    init: PopulationState
    horizon: float
    times: np.ndarray
    nodes: np.ndarray
    new_bits: np.ndarray
    eps_at: np.ndarray
    frozen_impact: bool = False
    ones: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k0 = int(self.init.X.sum())
        steps = 2 * self.new_bits.astype(np.int64) - 1
        self.ones = k0 + np.concatenate([[0], np.cumsum(steps)])

    @property
    def n(self) -> int:
        return self.init.X.size

    @property
    def n_events(self) -> int:
        return self.times.size

    def final_state(self) -> PopulationState:
        X = self.init.X.copy()
        X[self.nodes] = self.new_bits  # later writes win, matching event order
        return PopulationState(self.horizon, X, self.eps_at_time(self.horizon))

    def behavior_at(self, t: float) -> np.ndarray:
        k = self._segment(np.array([t]))[0]
        X = self.init.X.copy()
        X[self.nodes[:k]] = self.new_bits[:k]
        return X

    def _segment(self, grid: np.ndarray) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        if np.any(grid < self.init.t) or np.any(grid > self.horizon):
            raise ParameterError(
                f"grid times must lie in [{self.init.t}, {self.horizon}]")
        # number of events at or before each grid time
        return np.searchsorted(self.times, grid, side="right")

    def eps_at_time(self, grid):
        grid = np.atleast_1d(np.asarray(grid, dtype=float))
        k = self._segment(grid)
        t_start = np.concatenate([[self.init.t], self.times])[k]
        eps_start = np.concatenate([[self.init.eps], self.eps_at])[k]
        if self.frozen_impact:
            out = eps_start
        else:
            xbar0 = 1.0 - self.ones[k] / self.n
            r = self.params.gamma * xbar0 - self.params.tau
            out = eps_start * np.exp(r * (grid - t_start))
        return out if out.size > 1 else float(out[0])

    def samples(self, grid):
        """Arrays ``(t, xbar1, eps)`` on the given grid."""
        grid = np.asarray(grid, dtype=float)
        k = self._segment(grid)
        xbar1 = self.ones[k] / self.n
        eps = np.atleast_1d(self.eps_at_time(grid))
        return grid, xbar1, eps


def empirical_fractions(traj: EventTrajectory, grid) -> list[tuple[float, float, float]]:
    """``(t, xbar0, xbar1)`` at each grid time, X held constant between events."""
    grid = np.asarray(grid, dtype=float)
    _, xbar1, _ = traj.samples(grid)
    return [(float(t), float(1.0 - x1), float(x1)) for t, x1 in zip(grid, xbar1)]


def next_event_time(A: float, B: float, r: float, u: float) -> float:
    """Waiting time for a clock with total rate ``A + B * exp(r * dt)``.

    Solves ``A*dt + (B/r)*(exp(r*dt) - 1) = -log(u)`` for ``dt``; returns
    ``inf`` if the integrated hazard never reaches ``-log(u)``.
    """
    if A < 0 or B < 0:
        raise ValueError("rate coefficients must be nonnegative")
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie in (0, 1), got {u}")
    target = -math.log(u)
    if A + B == 0:
        return math.inf
    if B == 0:
        return target / A
    if r == 0:
        return target / (A + B)
    if A == 0:
        z = r * target / B
        return math.log1p(z) / r if z > -1.0 else math.inf

    def hazard(dt):
        try:
            return A * dt + B * math.expm1(r * dt) / r
        except OverflowError:
            return math.inf

    # bracket: H is convex for r > 0 and concave for r < 0
    if r > 0:
        lo = 0.0
        hi = min(target / (A + B), math.log1p(r * target / B) / r)
    else:
        # A*dt <= H(dt) <= A*dt + B/|r|
        lo = max(target / (A + B), (target + B / r) / A)
        hi = target / A
        z = r * target / B
        if z > -1.0:
            hi = min(hi, math.log1p(z) / r)
        if math.isinf(lo):
            return math.inf
    dt = 0.5 * (lo + hi)
    width = hi - lo
    for _ in range(400):
        h = hazard(dt) - target
        if abs(h) <= HAZARD_TOL * max(1.0, target):
            return dt
        if h > 0:
            hi = dt
        else:
            lo = dt
        if hi - lo <= 4 * np.spacing(hi):
            return dt
        slope = A + B * math.exp(min(r * dt, 700.0))
        newton = dt - h / slope
        # Newton only while it stays bracketed and beats bisection
        if lo < newton < hi and abs(newton - dt) < 0.5 * width:
            width = abs(newton - dt)
            dt = newton
        else:
            width = hi - lo
            dt = 0.5 * (lo + hi)
    return dt


def _growth(params: ModelParams, ones: int, n: int, frozen: bool) -> float:
    if frozen:
        return 0.0
    return params.gamma * (1.0 - ones / n) - params.tau


def simulate(g: Graph, params: ModelParams, init: PopulationState, horizon: float,
             seed: int, *, frozen_impact: bool = False) -> EventTrajectory:
    """Draw one exact sample path on ``[init.t, horizon]``.

    With ``frozen_impact`` the impact stays at ``init.eps`` (growth rate 0);
    this is the setting in which the behavior process is a homogeneous
    Markov chain with the generator of :func:`generator_matrix`.
    """
    if horizon <= init.t:
        raise ParameterError("horizon must exceed the initial time")
    if init.X.size != g.n:
        raise ParameterError(f"initial behavior has length {init.X.size}, graph has {g.n} nodes")
    rng = np.random.default_rng(seed)
    if g.is_complete:
        events = _run_complete(g.n, params, init, horizon, rng, frozen_impact)
    else:
        events = _run_general(g, params, init, horizon, rng, frozen_impact)
    times, nodes, bits, eps_at = events
    traj = EventTrajectory(
        params=params, init=init, horizon=float(horizon),
        times=np.array(times, dtype=float), nodes=np.array(nodes, dtype=np.int64),
        new_bits=np.array(bits, dtype=np.int8), eps_at=np.array(eps_at, dtype=float),
        frozen_impact=frozen_impact)
    with np.errstate(over="ignore"):
        final_eps = traj.eps_at_time(horizon)
    if not final_eps <= EPS_OVERFLOW:
        raise SimulationOverflow(f"impact exceeded {EPS_OVERFLOW:g} before t={horizon:g}")
    return traj


def _advance_eps(eps, r, dt, t):
    eps = eps * math.exp(r * dt) if r * dt < 700 else math.inf
    if not eps <= EPS_OVERFLOW:
        raise SimulationOverflow(f"impact exceeded {EPS_OVERFLOW:g} at t={t:.6g}")
    return eps


def _run_complete(n, params, init, horizon, rng, frozen):
    """Aggregate-count path for the complete graph: O(1) rate updates per event."""
    p = params
    zeros = [i for i in range(n) if init.X[i] == 0]
    ones = [i for i in range(n) if init.X[i] == 1]
    t, eps = float(init.t), float(init.eps)
    times, nodes, bits, eps_at = [], [], [], []
    random = rng.random
    while True:
        k = len(ones)
        s = k / n
        up_base = s * (s + p.alpha)
        up_slope = p.mu * s
        down = (1.0 - s) * ((1.0 - s) + p.kappa - p.sigma)
        n0 = n - k
        A = n0 * up_base + k * down
        B = n0 * up_slope * eps
        r = _growth(p, k, n, frozen)
        dt = next_event_time(A, B, r, 1.0 - random())
        if t + dt > horizon:
            break
        t += dt
        eps = _advance_eps(eps, r, dt, t)
        total_up = n0 * (up_base + up_slope * eps)
        total = total_up + k * down
        go_up = random() * total < total_up
        src, dst = (zeros, ones) if go_up else (ones, zeros)
        j = min(int(random() * len(src)), len(src) - 1)
        node = src[j]
        last = src.pop()
        if last != node:
            src[j] = last
        dst.append(node)
        times.append(t)
        nodes.append(node)
        bits.append(1 if go_up else 0)
        eps_at.append(eps)
    return times, nodes, bits, eps_at


def _run_general(g, params, init, horizon, rng, frozen):
    X = init.X.astype(float)
    n = g.n
    t, eps = float(init.t), float(init.eps)
    times, nodes, bits, eps_at = [], [], [], []
    while True:
        a01, b01, rho10 = rate_coefficients(X, g, params)
        zero = X == 0
        A = float(a01[zero].sum() + rho10[~zero].sum())
        B = float(b01[zero].sum()) * eps
        ones = int(n - zero.sum())
        r = _growth(params, ones, n, frozen)
        dt = next_event_time(A, B, r, 1.0 - rng.random())
        if t + dt > horizon:
            break
        t += dt
        eps = _advance_eps(eps, r, dt, t)
        rates = np.where(zero, a01 + eps * b01, rho10)
        cum = np.cumsum(rates)
        node = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        node = min(node, n - 1)
        X[node] = 1.0 - X[node]
        times.append(t)
        nodes.append(node)
        bits.append(int(X[node]))
        eps_at.append(eps)
    return times, nodes, bits, eps_at


def config_index(X) -> int:
    """Integer code of a behavior vector: bit ``i`` holds ``x_i``."""
    return int(sum(int(b) << i for i, b in enumerate(X)))


def config_bits(index: int, n: int) -> np.ndarray:
    return np.array([(index >> i) & 1 for i in range(n)], dtype=np.int8)


def generator_matrix(g: Graph, params: ModelParams, eps: float) -> np.ndarray:
    """Dense ``2**n x 2**n`` rate matrix of the behavior chain at frozen impact."""
    n = g.n
    if n > MAX_GENERATOR_NODES:
        raise ParameterError(f"generator needs n <= {MAX_GENERATOR_NODES}, got {n}")
    size = 1 << n
    Q = np.zeros((size, size))
    for idx in range(size):
        X = config_bits(idx, n)
        rho01, rho10 = rate_vectors(X, eps, g, params)
        for i in range(n):
            Q[idx, idx ^ (1 << i)] = rho10[i] if X[i] else rho01[i]
        Q[idx, idx] = -Q[idx].sum()
    return Q


def transient_distribution(Q: np.ndarray, p0: np.ndarray, t: float) -> np.ndarray:
    """Row vector ``p0 @ expm(Q t)``."""
    return np.asarray(p0, dtype=float) @ expm(Q * t)
