"""Planar trajectories under the reference parameters, as time series and a phase portrait.

    python3 scripts/reference_trajectories.py [--out DIR] [--horizon T]
"""

import argparse
from pathlib import Path

import numpy as np

from coevo.analysis import interior_equilibrium
from coevo.io import svg_plot, write_csv
from coevo.meanfield import integrate_planar_interior
from coevo.model import REFERENCE_PARAMS

INITS = [(0.5, 0.5), (0.9, 1.0), (0.2, 2.5)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/ref_params")
    ap.add_argument("--horizon", type=float, default=60.0)
    args = ap.parse_args()
    out = Path(args.out)
    grid = np.linspace(0.0, args.horizon, 2001)
    star = interior_equilibrium(REFERENCE_PARAMS)
    print(f"interior equilibrium ({star.x:.6g}, {star.eps:.6g})")

    series_x, series_e, phase = [], [], []
    for x0, e0 in INITS:
        y = integrate_planar_interior(REFERENCE_PARAMS, (x0, e0), args.horizon)(grid)
        label = f"({x0}, {e0})"
        series_x.append((label, grid, y[:, 0]))
        series_e.append((label, grid, y[:, 1]))
        phase.append((label, y[:, 0], y[:, 1]))
        write_csv(out / f"trajectory_{x0}_{e0}.csv", ["t", "x", "epsilon"], zip(grid, y[:, 0], y[:, 1]),
                  {"params": REFERENCE_PARAMS, "init": (x0, e0)})
        print(f"{label}: max eps {y[:, 1].max():.4g}, min x {y[:, 0].min():.4g}")

    (out / "x.svg").write_text(svg_plot(series_x, "t", "x"), encoding="utf-8")
    (out / "epsilon.svg").write_text(svg_plot(series_e, "t", "epsilon"), encoding="utf-8")
    (out / "phase.svg").write_text(svg_plot(phase, "x", "epsilon"), encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
