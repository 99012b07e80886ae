"""Independent return-map check with scipy's DOP853 at tight tolerance.

Integrates the planar system in the logit/log chart, records upward crossings
of the section x = x*, and prints the successive impact values together with
the orbit potential (which never decreases). A limit cycle would show
crossings settling to a fixed value; here they keep growing.

    python3 scripts/cycle_oracle.py [--horizon T] [--tol TOL]
"""

import argparse
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import expit

from coevo.analysis import detect_limit_cycle, interior_equilibrium
from coevo.model import REFERENCE_PARAMS


def chart_field(p):
    offset = p.alpha + p.sigma - p.kappa - 1.0

    def fun(_t, y):
        return [2.0 * expit(y[0]) + p.mu * math.exp(min(y[1], 700.0)) + offset, p.gamma * expit(-y[0]) - p.tau]

    return fun


def potential(p, u, v):
    xs = 1.0 - p.tau / p.gamma
    b = p.kappa + 1.0 - p.alpha - p.sigma - 2.0 * xs
    return p.mu * math.exp(v) - b * v + p.gamma * xs * np.logaddexp(0.0, -u) + p.tau * np.logaddexp(0.0, u)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon", type=float, default=2000.0)
    ap.add_argument("--tol", type=float, default=1e-11)
    ap.add_argument("--init", type=float, nargs=2, default=(0.5, 0.5))
    args = ap.parse_args()
    p = REFERENCE_PARAMS
    star = interior_equilibrium(p)
    u_star = math.log(star.x / (1 - star.x))

    def section(_t, y):
        return y[0] - u_star
    section.direction = 1.0

    x0, e0 = args.init
    sol = solve_ivp(chart_field(p), (0.0, args.horizon), [math.log(x0 / (1 - x0)), math.log(e0)],
                    method="DOP853", rtol=args.tol, atol=args.tol, events=section)
    times, states = sol.t_events[0], sol.y_events[0]
    print(f"scipy DOP853 rtol = atol = {args.tol:g}, status {sol.status}, t_final {sol.t[-1]:.6g}")
    print(f"{'t':>12} {'eps':>14} {'potential':>14}")
    for t, (u, v) in zip(times, states):
        print(f"{t:12.6f} {math.exp(v):14.8g} {potential(p, u, v):14.8g}")
    eps = np.exp(states[:, 1])
    if eps.size > 1:
        print("successive ratios:", " ".join(f"{r:.4f}" for r in eps[1:] / eps[:-1]))

    ours = detect_limit_cycle(p, (x0, e0), horizon=args.horizon)
    print(f"package detector: converged = {ours.converged}, crossings = {len(ours.crossings)}")
    for (t, e), t_ref, e_ref in zip(ours.crossings, times, eps):
        print(f"  t {t:.8f} vs {t_ref:.8f}   eps {e:.10g} vs {e_ref:.10g}")


if __name__ == "__main__":
    main()
