"""Adaptive Dormand-Prince 5(4) integrator with dense output.

Written for the small, smooth systems of this package. The state may carry
box bounds (probabilities in [0, 1], impact >= 0). A step that would leave
the box by more than ``CLAMP`` is retried with a shorter step; smaller
excursions are clipped. A clipped state whose vector field still points out
of the box, or a box exit no step size avoids, is reported as an
:class:`InvariantViolation`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IntegrationError, InvariantViolation

CLAMP = 1e-12

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# fifth-order minus embedded fourth-order weights, seven stages (FSAL)
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# quartic continuous extension (Shampine 1986)
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


@dataclass
class Trajectory:
    """Accepted steps of an integration plus the piecewise-quartic interpolant.

    Calling the trajectory evaluates the dense output: ``traj(t)`` returns the
    state at scalar ``t``; an array of times gives one row per time.
    """

    t: np.ndarray
    y: np.ndarray
    coeffs: np.ndarray = field(repr=False)
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    terminated: bool = False
    lower: np.ndarray | None = field(default=None, repr=False)
    upper: np.ndarray | None = field(default=None, repr=False)

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1]

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)
        if np.any(t_arr < self.t[0] - 1e-12) or np.any(t_arr > self.t[-1] + 1e-12):
            raise ValueError(
                f"requested time outside [{self.t[0]}, {self.t[-1]}]")
        k = np.searchsorted(self.t, t_arr, side="right") - 1
        k = np.clip(k, 0, len(self.t) - 2)
        if len(self.t) == 1:
            out = np.repeat(self.y[:1], t_arr.size, axis=0)
        else:
            h = self.t[k + 1] - self.t[k]
            theta = np.clip((t_arr - self.t[k]) / h, 0.0, 1.0)
            powers = np.stack([theta, theta**2, theta**3, theta**4], axis=-1)
            out = self.y[k] + h[:, None] * np.einsum("kmj,kj->km", self.coeffs[k], powers)
            # the interpolant must reproduce stored (possibly clamped) nodes exactly
            out[theta == 1.0] = self.y[k + 1][theta == 1.0]
        if self.lower is not None:
            out = np.maximum(out, self.lower)
        if self.upper is not None:
            out = np.minimum(out, self.upper)
        return out[0] if scalar else out


def _initial_step(fun, t0, y0, f0, rtol, atol, direction=1.0):
    scale = atol + np.abs(y0) * rtol
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = fun(t0 + h0 * direction, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _bounds(value, m):
    if value is None:
        return None
    arr = np.broadcast_to(np.asarray(value, dtype=float), (m,)).copy()
    return arr


def _check_face(y, f, lower, upper, t):
    """A clipped state must not sit on a face the vector field points out of."""
    out = np.zeros(y.size, dtype=bool)
    if lower is not None:
        out |= (y == lower) & (f < 0)
    if upper is not None:
        out |= (y == upper) & (f > 0)
    if out.any():
        i = int(np.argmax(out))
        raise InvariantViolation(
            f"vector field points out of the state box at component {i} "
            f"(value {y[i]!r}, derivative {f[i]!r}) at t={t}")


def _enforce(y, lower, upper, t):
    if lower is not None:
        gap = lower - y
        if np.any(gap > CLAMP):
            i = int(np.argmax(gap))
            raise InvariantViolation(
                f"component {i} = {y[i]!r} below bound {lower[i]} at t={t}")
        y = np.maximum(y, lower)
    if upper is not None:
        gap = y - upper
        if np.any(gap > CLAMP):
            i = int(np.argmax(gap))
            raise InvariantViolation(
                f"component {i} = {y[i]!r} above bound {upper[i]} at t={t}")
        y = np.minimum(y, upper)
    return y


def solve(
    fun: Callable[[float, np.ndarray], np.ndarray],
    y0,
    horizon: float,
    *,
    t0: float = 0.0,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    lower=None,
    upper=None,
    stop: Callable[[float, np.ndarray], bool] | None = None,
    max_step: float = np.inf,
    max_steps: int = 2_000_000,
) -> Trajectory:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t0 + horizon``.

    ``stop(t, y)`` is checked after every accepted step; a true result ends
    the integration early with ``terminated=True``. A step whose result
    leaves the ``lower``/``upper`` box by more than the clamp threshold is
    retried with half the step; if no representable step stays inside,
    :class:`InvariantViolation` is raised. Error control uses the
    max-norm of the scaled local error estimate.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    with np.errstate(over="ignore", invalid="ignore"):
        return _solve(fun, y0, horizon, t0, rtol, atol, lower, upper, stop, max_step, max_steps)


def _solve(fun, y0, horizon, t0, rtol, atol, lower, upper, stop, max_step, max_steps):
    y = np.array(y0, dtype=float)
    m = y.size
    lower, upper = _bounds(lower, m), _bounds(upper, m)
    y = _enforce(y, lower, upper, t0)
    t_end = t0 + horizon
    lo_limit = None if lower is None else lower - CLAMP
    hi_limit = None if upper is None else upper + CLAMP

    f = np.asarray(fun(t0, y), dtype=float)
    n_rhs = 1
    if not np.all(np.isfinite(f)):
        raise IntegrationError(f"nonfinite derivative at t={t0}")
    h = min(_initial_step(fun, t0, y, f, rtol, atol), max_step, horizon)
    n_rhs += 1

    ts, ys, qs = [t0], [y.copy()], []
    t = t0
    n_steps = n_rejected = 0
    terminated = False
    K = np.empty((7, m))

    while t < t_end:
        if n_steps >= max_steps:
            raise IntegrationError(f"step budget {max_steps} exhausted at t={t}")
        min_step = 16 * np.spacing(max(abs(t), 1.0))
        h = min(h, t_end - t)
        if t + h > t_end - min_step:
            h = t_end - t
        mag_y = np.abs(y)
        while True:
            if h < min_step:
                raise IntegrationError(f"step size underflow at t={t}, h={h}")
            K[0] = f
            for s in range(1, 6):
                K[s] = fun(t + _C[s] * h, y + h * np.dot(_A[s], K[:s]))
            y_new = y + h * np.dot(_B, K[:6])
            K[6] = fun(t + h, y_new)
            n_rhs += 6
            err = (np.abs(h * np.dot(_E, K))
                   / (atol + rtol * np.maximum(mag_y, np.abs(y_new)))).max()
            if not err <= 1.0:
                n_rejected += 1
                # nan/inf estimates come from overflowing stages
                h *= 0.5 if not np.isfinite(err) else max(MIN_FACTOR, SAFETY * err ** -0.2)
                continue
            if ((lo_limit is not None and (y_new < lo_limit).any())
                    or (hi_limit is not None and (y_new > hi_limit).any())):
                # the proposal left the state box: retry with a shorter step
                if h * 0.5 < min_step:
                    _enforce(y_new, lower, upper, t + h)
                h *= 0.5
                n_rejected += 1
                continue
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
            break
        t_new = t_end if t_end - (t + h) < min_step else t + h
        qs.append(np.dot(K.T, _P))
        f_new = K[6].copy()
        if ((lower is not None and (y_new < lower).any())
                or (upper is not None and (y_new > upper).any())):
            y_new = _enforce(y_new, lower, upper, t_new)
            f_new = np.asarray(fun(t_new, y_new), dtype=float)
            n_rhs += 1
            _check_face(y_new, f_new, lower, upper, t_new)
        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y)
        n_steps += 1
        h = min(h * factor, max_step)
        if stop is not None and stop(t, y):
            terminated = True
            break

    coeffs = np.array(qs) if qs else np.empty((0, m, 4))
    return Trajectory(
        t=np.array(ts), y=np.array(ys), coeffs=coeffs,
        n_steps=n_steps, n_rejected=n_rejected, n_rhs=n_rhs,
        terminated=terminated, lower=lower, upper=upper)
