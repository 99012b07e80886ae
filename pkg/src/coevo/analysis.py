"""Phase-plane analysis of the planar system.

Equilibria and their linearization, eigenvalue classification, return-map
tracking on a Poincare section, and the fate of boundary initial conditions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit, logit

from . import ode
from .errors import IntegrationError, ParameterError
from .meanfield import PlanarState, integrate_planar, planar_chart_field
from .model import ModelParams, require_assumptions

SADDLE = "saddle"
UNSTABLE_SPIRAL = "unstable-spiral"
STABLE_SPIRAL = "stable-spiral"
STABLE_NODE = "stable-node"
UNSTABLE_NODE = "unstable-node"
CENTER = "center-marginal"

TO_ONE_ZERO = "to-(1,0)"
TO_ORIGIN = "to-(0,0)"
DIVERGING = "diverging"
DIVERGENCE_THRESHOLD = 1e6


@dataclass(frozen=True)
class EquilibriumReport:
    location: PlanarState
    eigenvalues: tuple[complex, complex]
    classification: str


@dataclass
class CycleReport:
    """Outcome of return-map tracking on the section ``x = section_x``.

    ``crossings`` holds ``(time, eps)`` for every upward crossing found;
    ``period`` is the time between the last two (nan with fewer than two).
    ``amplitude`` maps ``"x"`` and ``"eps"`` to ``(min, max)`` over that
    last return. ``potential`` is the orbit potential at the start and at
    the end of the run (see :func:`orbit_potential`).
    """

    converged: bool
    crossings: list[tuple[float, float]]
    period: float
    amplitude: dict[str, tuple[float, float]]
    peak_eps_transient: tuple[float, float]
    section_x: float
    t_final: float
    potential: tuple[float, float] = (math.nan, math.nan)
    notes: list[str] = field(default_factory=list)

    @property
    def return_ratios(self) -> list[float]:
        e = [c[1] for c in self.crossings]
        return [b / a for a, b in zip(e, e[1:])]


def interior_equilibrium(params: ModelParams) -> PlanarState:
    p = params
    q = p.tau / p.gamma
    return PlanarState(1.0 - q, (2.0 * q + p.kappa - p.sigma - p.alpha - 1.0) / p.mu)


def jacobian_planar(s, params: ModelParams) -> np.ndarray:
    x, eps = (s.x, s.eps) if isinstance(s, PlanarState) else (float(s[0]), float(s[1]))
    p = params
    bracket = 2.0 * x + p.mu * eps + p.alpha + p.sigma - p.kappa - 1.0
    logistic = x * (1.0 - x)
    return np.array([
        [(1.0 - 2.0 * x) * bracket + 2.0 * logistic, p.mu * logistic],
        [-p.gamma * eps, p.gamma * (1.0 - x) - p.tau],
    ])


def interior_radicand(params: ModelParams) -> float:
    p = params
    q = p.tau / p.gamma
    return q**2 * (1 - q) ** 2 - q * (1 - q) * (2 * p.tau + p.gamma * (p.kappa - p.sigma - p.alpha - 1))


def eigenvalues_interior(params: ModelParams) -> tuple[complex, complex]:
    """Closed-form eigenvalues ``(lambda_plus, lambda_minus)`` at the interior equilibrium."""
    require_assumptions(params)
    q = params.tau / params.gamma
    centre = q * (1 - q)
    root = cmath.sqrt(interior_radicand(params))
    return complex(centre + root), complex(centre - root)


def classify(eigenvalues, tol: float = 0.0) -> str:
    l1, l2 = (complex(v) for v in eigenvalues)
    if abs(l1.imag) > tol or abs(l2.imag) > tol:
        re = l1.real
        if abs(re) <= tol:
            return CENTER
        return UNSTABLE_SPIRAL if re > 0 else STABLE_SPIRAL
    a, b = sorted((l1.real, l2.real))
    if abs(a) <= tol or abs(b) <= tol:
        return CENTER
    if a < 0 < b:
        return SADDLE
    return STABLE_NODE if b < 0 else UNSTABLE_NODE


def equilibria(params: ModelParams) -> list[EquilibriumReport]:
    """The origin, ``(1, 0)`` and the interior point, with eigenvalues and class."""
    require_assumptions(params)
    p = params
    origin = (complex(p.gamma - p.tau), complex(p.alpha + p.sigma - 1.0 - p.kappa))
    one_zero = (complex(-p.tau), complex(p.kappa - (p.sigma + p.alpha + 1.0)))
    inner = eigenvalues_interior(params)
    return [
        EquilibriumReport(PlanarState(0.0, 0.0), origin, classify(origin)),
        EquilibriumReport(PlanarState(1.0, 0.0), one_zero, classify(one_zero)),
        EquilibriumReport(interior_equilibrium(params), inner, classify(inner)),
    ]


def orbit_potential(s, params: ModelParams) -> float:
    """Potential that grows along every interior orbit.

    ``F = mu*eps - b*log(eps) + G(x)`` with ``b = kappa + 1 - alpha - sigma - 2*xs``,
    ``xs = 1 - tau/gamma`` and ``G(x) = -gamma*xs*log(x) - tau*log(1 - x)``.
    Along solutions ``dF/dt = 2*gamma*(x - xs)**2``, so it is constant only
    at the interior equilibrium.
    """
    x, eps = (s.x, s.eps) if isinstance(s, PlanarState) else (float(s[0]), float(s[1]))
    p = params
    xs = 1.0 - p.tau / p.gamma
    b = p.kappa + 1.0 - p.alpha - p.sigma - 2.0 * xs
    return p.mu * eps - b * math.log(eps) - p.gamma * xs * math.log(x) - p.tau * math.log1p(-x)


def potential_rate(s, params: ModelParams) -> float:
    x = s.x if isinstance(s, PlanarState) else float(s[0])
    xs = 1.0 - params.tau / params.gamma
    return 2.0 * params.gamma * (x - xs) ** 2


def _chart_potential(uv, params: ModelParams) -> float:
    # same as orbit_potential, evaluated without leaving the chart
    u, v = float(uv[0]), float(uv[1])
    p = params
    xs = 1.0 - p.tau / p.gamma
    b = p.kappa + 1.0 - p.alpha - p.sigma - 2.0 * xs
    log_x = -math.log1p(math.exp(-u)) if u > -30 else u
    log_1mx = -math.log1p(math.exp(u)) if u < 30 else -u
    return p.mu * math.exp(v) - b * v - p.gamma * xs * log_x - p.tau * log_1mx


def _bisect_crossing(seg: ode.Trajectory, k: int, level: float, time_tol: float) -> float:
    lo, hi = seg.t[k], seg.t[k + 1]
    while hi - lo > time_tol:
        mid = 0.5 * (lo + hi)
        if seg(mid)[0] < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _segment_peak(seg: ode.Trajectory) -> tuple[float, float]:
    """Maximum of ``v = log(eps)`` over a chart segment, refined on the dense output."""
    k = int(np.argmax(seg.y[:, 1]))
    lo = seg.t[max(k - 1, 0)]
    hi = seg.t[min(k + 1, len(seg.t) - 1)]
    best_t, best_v = seg.t[k], seg.y[k, 1]
    if hi > lo:
        res = minimize_scalar(lambda t: -seg(t)[1], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if -res.fun > best_v:
            best_t, best_v = float(res.x), float(-res.fun)
    return float(best_t), float(best_v)


def detect_limit_cycle(params: ModelParams, init, *, section_x: float | None = None,
                       crossing_tol: float = 1e-4, max_crossings: int = 200,
                       horizon: float = 2000.0, rtol: float = 1e-9, atol: float = 1e-12,
                       consecutive: int = 3, time_tol: float = 1e-10,
                       field=None) -> CycleReport:
    """Track upward crossings of ``x = section_x`` and test the return map for convergence.

    Converged means ``consecutive`` successive returns with relative eps change
    below ``crossing_tol``. The orbit is integrated in the logit/log chart, so
    ``init`` must lie in the open interior. ``field`` optionally replaces the
    chart vector field (feedback-controlled variants).
    """
    require_assumptions(params)
    init = init if isinstance(init, PlanarState) else PlanarState(*init)
    if not init.interior:
        raise ParameterError("init must lie in the open interior (use boundary_behavior)")
    star = interior_equilibrium(params)
    if math.isclose(init.x, star.x, rel_tol=0, abs_tol=1e-14) and \
            math.isclose(init.eps, star.eps, rel_tol=1e-14, abs_tol=0):
        raise ParameterError("init coincides with the interior equilibrium")
    if section_x is None:
        section_x = star.x
    if not 0.0 < section_x < 1.0:
        raise ParameterError("section_x must lie in (0, 1)")
    level = float(logit(section_x))
    fun = field if field is not None else planar_chart_field(params)

    crossings: list[tuple[float, float]] = []
    segments: list[ode.Trajectory] = []
    y0 = np.array([float(logit(init.x)), math.log(init.eps)])
    t0 = 0.0
    streak = 0
    converged = False
    while t0 < horizon and len(crossings) < max_crossings:
        seg = ode.solve(fun, y0, horizon - t0, t0=t0, rtol=rtol, atol=atol,
                        stop=_upward_crossing(level, y0[0]))
        segments.append(seg)
        t0, y0 = seg.t_final, seg.y_final.copy()
        if not seg.terminated:
            break
        k = len(seg.t) - 2
        tc = _bisect_crossing(seg, k, level, time_tol)
        eps_c = math.exp(seg(tc)[1])
        if crossings:
            prev = crossings[-1][1]
            streak = streak + 1 if abs(eps_c - prev) / prev < crossing_tol else 0
        crossings.append((tc, eps_c))
        if streak >= consecutive:
            converged = True
            break

    peak_t, peak_v = max((_segment_peak(s) for s in segments), key=lambda tv: tv[1])
    period = math.nan
    amplitude = {"x": (math.nan, math.nan), "eps": (math.nan, math.nan)}
    if len(crossings) >= 2:
        ta, tb = crossings[-2][0], crossings[-1][0]
        period = tb - ta
        grid = np.linspace(ta, tb, 4001)
        uv = _eval_segments(segments, grid)
        xs, es = expit(uv[:, 0]), np.exp(uv[:, 1])
        amplitude = {"x": (float(xs.min()), float(xs.max())),
                     "eps": (float(es.min()), float(es.max()))}
    notes = []
    if not converged:
        notes.append("return map did not settle within the horizon")
    elif len(crossings) >= 2:
        notes.append("convergence is evidence from one orbit, not a uniqueness guarantee")
    potential = (_chart_potential(segments[0].y[0], params),
                 _chart_potential(segments[-1].y_final, params))
    return CycleReport(
        converged=converged, crossings=crossings, period=period, amplitude=amplitude,
        peak_eps_transient=(peak_t, math.exp(peak_v)), section_x=section_x,
        t_final=t0, potential=potential, notes=notes)


def _upward_crossing(level: float, u0: float):
    prev = [u0]

    def stop(_t, y):
        hit = prev[0] < level <= y[0]
        prev[0] = y[0]
        return hit

    return stop


def _eval_segments(segments, grid):
    out = np.full((grid.size, 2), np.nan)
    for seg in segments:
        mask = (grid >= seg.t[0]) & (grid <= seg.t[-1]) & np.isnan(out[:, 0])
        if mask.any():
            out[mask] = seg(grid[mask])
    return out


@dataclass
class BoundaryOutcome:
    tag: str
    trajectory: ode.Trajectory


def boundary_behavior(init, params: ModelParams, horizon: float = 400.0, *,
                      rtol: float = 1e-9, atol: float = 1e-12,
                      settle_tol: float = 1e-6) -> BoundaryOutcome:
    """Integrate a boundary initial condition and report where it goes."""
    init = init if isinstance(init, PlanarState) else PlanarState(*init)
    if init.interior:
        raise ParameterError("init lies in the interior (use detect_limit_cycle)")
    require_assumptions(params)
    traj = integrate_planar(params, init, horizon, rtol=rtol, atol=atol,
                            stop=lambda t, y: y[1] > DIVERGENCE_THRESHOLD)
    x, eps = traj.y_final
    if eps > DIVERGENCE_THRESHOLD:
        return BoundaryOutcome(DIVERGING, traj)
    if abs(x - 1.0) <= settle_tol and eps <= settle_tol:
        return BoundaryOutcome(TO_ONE_ZERO, traj)
    if x <= settle_tol and eps <= settle_tol:
        return BoundaryOutcome(TO_ORIGIN, traj)
    raise IntegrationError(
        f"boundary orbit from ({init.x}, {init.eps}) unsettled at t={traj.t_final}: ({x}, {eps})")


def natural_peak(traj: ode.Trajectory) -> tuple[float, float]:
    """Largest impact on a natural-coordinate trajectory, refined on the dense output."""
    k = int(np.argmax(traj.y[:, 1]))
    lo = traj.t[max(k - 1, 0)]
    hi = traj.t[min(k + 1, len(traj.t) - 1)]
    best = (float(traj.t[k]), float(traj.y[k, 1]))
    if hi > lo:
        res = minimize_scalar(lambda t: -traj(t)[1], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if -res.fun > best[1]:
            best = (float(res.x), float(-res.fun))
    return best
