"""Impact under state-feedback campaign policies from (0.5, 0.5).

    python3 scripts/control_policies.py [--out DIR] [--horizon T]
"""

import argparse
from pathlib import Path

import numpy as np

from coevo.control import ControlPolicy, compare_policies, controlled_chart_field
from coevo.io import svg_plot, write_csv
from coevo.meanfield import integrate_planar_interior
from coevo.model import REFERENCE_PARAMS

POLICIES = [
    ControlPolicy(label="constant alpha = 0.3"),
    ControlPolicy(kind="linear", gain=0.25),
    ControlPolicy(kind="linear", gain=0.5),
    ControlPolicy(kind="linear", gain=1.0),
    ControlPolicy(kind="power", gain=0.1, exponent=2.0),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/control")
    ap.add_argument("--horizon", type=float, default=30.0)
    args = ap.parse_args()
    out = Path(args.out)
    init = (0.5, 0.5)

    comp = compare_policies(REFERENCE_PARAMS, init, POLICIES, horizon=args.horizon)
    rows = comp.rows()
    for r in rows:
        flag = "  (alpha leaves the regime near the peak)" if r["regime_left"] else ""
        print(f"{r['policy']:<28} peak eps {r['peak_eps']:8.4f} at t = {r['peak_time']:.3f}{flag}")
    write_csv(out / "policies.csv", list(rows[0]), ([r[c] for c in rows[0]] for r in rows),
              {"params": REFERENCE_PARAMS, "init": init, "horizon": args.horizon})

    grid = np.linspace(0.0, args.horizon, 1501)
    series = []
    for pol in POLICIES:
        traj = integrate_planar_interior(REFERENCE_PARAMS, init, args.horizon,
                                         field=controlled_chart_field(REFERENCE_PARAMS, pol))
        series.append((pol.name, grid, traj(grid)[:, 1]))
    (out / "epsilon.svg").write_text(svg_plot(series, "t", "epsilon"), encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
