"""Command-line front end.

    coevo <subcommand> [--config PATH] [--seed N] [--out DIR] [--set key=value ...]

Subcommands: simulate, equilibria, cycle, control, sweep, plot. Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, io
from .abm import PopulationState, simulate
from .analysis import (classify, detect_limit_cycle, eigenvalues_interior, equilibria,
                       interior_equilibrium)
from .config import ConfigError, RunConfig, load, parse_values, require_seed
from .control import ControlPolicy, compare_policies
from .errors import (AssumptionError, IntegrationError, ParameterError,
                     SimulationOverflow)
from .meanfield import NodeState, integrate_nodes, integrate_planar
from .model import Graph, validate_assumptions

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
MAX_NODE_COLUMNS = 50


def worker_count() -> int:
    raw = os.environ.get("COEVO_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError("COEVO_THREADS", f"not an integer: {raw!r}") from None
    return os.cpu_count() or 1


def fan_out(func, jobs):
    """Map ``func`` over ``jobs`` on a bounded process pool; order is preserved."""
    jobs = list(jobs)
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


def meta_for(cfg: RunConfig, command: str, **extra) -> dict:
    meta = {"command": command}
    meta.update({k: v for k, v in cfg.items()})
    meta.update(extra)
    return meta


def build_graph(cfg: RunConfig) -> Graph:
    if cfg.graph_kind == "complete":
        return Graph.complete(cfg.graph_n)
    if cfg.graph_kind == "random":
        return Graph.random(cfg.graph_n, cfg.graph_p, cfg.graph_seed)
    path = Path(cfg.graph_edges)
    if not path.exists():
        raise ConfigError("graph.edges", f"file not found: {path}")
    edges = []
    for line in path.read_text(encoding="utf-8").splitlines():
        text = line.split("#", 1)[0].strip()
        if text:
            i, j = text.replace(",", " ").split()[:2]
            edges.append((int(i), int(j)))
    n = max(cfg.graph_n, 1 + max(max(e) for e in edges)) if edges else cfg.graph_n
    return Graph.from_edges(n, edges)


def parse_policy(spec: str) -> ControlPolicy:
    """``target:kind[:gain[:exponent]]``, e.g. ``alpha:linear:0.5``."""
    parts = [p.strip() for p in spec.split(":")]
    if len(parts) < 2:
        raise ConfigError("control.policies", f"bad policy spec {spec!r}")
    target, kind = parts[0], parts[1]
    try:
        gain = float(parts[2]) if len(parts) > 2 else 0.0
        exponent = float(parts[3]) if len(parts) > 3 else (2.0 if kind == "power" else 1.0)
        return ControlPolicy(target=target, kind=kind, gain=gain, exponent=exponent)
    except (ValueError, ParameterError) as exc:
        raise ConfigError("control.policies", f"bad policy spec {spec!r}: {exc}") from None


# --- subcommands ----------------------------------------------------------

def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _abm_job(job):
    cfg, seed = job
    g = build_graph(cfg)
    init = PopulationState.with_fraction(g.n, cfg.init_x, cfg.init_eps)
    traj = simulate(g, cfg.params, init, cfg.horizon, seed, frozen_impact=cfg.frozen_impact)
    grid = np.linspace(0.0, cfg.horizon, cfg.samples)
    t, xbar1, eps = traj.samples(grid)
    name = "trajectory.csv" if cfg.replicas == 1 else f"trajectory_seed{seed}.csv"
    path = Path(cfg.out_dir) / name
    io.write_csv(path, ["t", "xbar1", "epsilon"], zip(t, xbar1, eps),
                 meta_for(cfg, "simulate", seed_used=seed, events=traj.n_events))
    return str(path)


def cmd_simulate(cfg: RunConfig) -> list[str]:
    report = validate_assumptions(cfg.params)
    for msg in report.messages:
        _warn(msg)
    grid = np.linspace(0.0, cfg.horizon, cfg.samples)
    out = Path(cfg.out_dir)
    if cfg.layer == "abm":
        seed = require_seed(cfg)
        return fan_out(_abm_job, [(cfg, seed + k) for k in range(cfg.replicas)])
    if cfg.layer == "planar":
        traj = integrate_planar(cfg.params, (cfg.init_x, cfg.init_eps), cfg.horizon,
                                rtol=cfg.rtol, atol=cfg.atol)
        y = traj(grid)
        path = io.write_csv(out / "trajectory.csv", ["t", "x", "epsilon"],
                            zip(grid, y[:, 0], y[:, 1]),
                            meta_for(cfg, "simulate", steps=traj.n_steps))
        return [str(path)]
    g = build_graph(cfg)
    if cfg.init_p1:
        p1 = np.array([float(v) for v in cfg.init_p1.split(",")])
        if p1.size != g.n:
            raise ConfigError("init.p1", f"has {p1.size} entries, graph has {g.n} nodes")
    else:
        p1 = np.full(g.n, cfg.init_x)
    traj = integrate_nodes(g, cfg.params, NodeState(p1, cfg.init_eps), cfg.horizon,
                           rtol=cfg.rtol, atol=cfg.atol)
    y = traj(grid)
    cols = ["t", "x", "epsilon"]
    per_node = g.n <= MAX_NODE_COLUMNS
    if per_node:
        cols += [f"p1_{i}" for i in range(g.n)]
    rows = []
    for k, t in enumerate(grid):
        row = [t, y[k, :g.n].mean(), y[k, g.n]]
        if per_node:
            row += list(y[k, :g.n])
        rows.append(row)
    path = io.write_csv(out / "trajectory.csv", cols, rows,
                        meta_for(cfg, "simulate", steps=traj.n_steps))
    return [str(path)]


def cmd_equilibria(cfg: RunConfig) -> list[str]:
    reports = equilibria(cfg.params)
    payload = {"equilibria": [
        {"x": r.location.x, "eps": r.location.eps,
         "eigenvalues": [complex(v) for v in r.eigenvalues],
         "classification": r.classification} for r in reports]}
    for r in reports:
        ev = ", ".join(f"{v.real:.6g}{v.imag:+.6g}i" for v in r.eigenvalues)
        print(f"({r.location.x:.10g}, {r.location.eps:.10g})  [{ev}]  {r.classification}")
    path = io.write_json(Path(cfg.out_dir) / "equilibria.json", payload, meta_for(cfg, "equilibria"))
    return [str(path)]


def cmd_cycle(cfg: RunConfig) -> list[str]:
    rep = detect_limit_cycle(cfg.params, (cfg.init_x, cfg.init_eps), section_x=cfg.section_x,
                             crossing_tol=cfg.crossing_tol, max_crossings=cfg.max_crossings,
                             horizon=cfg.cycle_horizon, rtol=cfg.rtol, atol=cfg.atol)
    payload = {
        "converged": rep.converged, "period": rep.period, "section_x": rep.section_x,
        "crossings": [list(c) for c in rep.crossings],
        "amplitude": {k: list(v) for k, v in rep.amplitude.items()},
        "peak_eps_transient": list(rep.peak_eps_transient),
        "t_final": rep.t_final, "potential": list(rep.potential), "notes": rep.notes,
    }
    print(f"converged={rep.converged} crossings={len(rep.crossings)} period={rep.period:.10g} "
          f"peak_eps={rep.peak_eps_transient[1]:.10g} at t={rep.peak_eps_transient[0]:.6g}")
    for note in rep.notes:
        print(f"note: {note}")
    out = Path(cfg.out_dir)
    meta = meta_for(cfg, "cycle")
    p1 = io.write_json(out / "cycle.json", payload, meta)
    p2 = io.write_csv(out / "cycle_crossings.csv", ["t", "epsilon"], rep.crossings, meta)
    return [str(p1), str(p2)]


def cmd_control(cfg: RunConfig) -> list[str]:
    policies = [parse_policy(s) for s in cfg.policies.split(",") if s.strip()]
    comp = compare_policies(cfg.params, (cfg.init_x, cfg.init_eps), policies, cfg.horizon,
                            rtol=cfg.rtol, atol=cfg.atol)
    rows = comp.rows()
    cols = list(rows[0]) if rows else ["policy"]
    for r in rows:
        print(f"{r['policy']:<32} peak_eps={r['peak_eps']:.8g} at t={r['peak_time']:.6g}")
    path = io.write_csv(Path(cfg.out_dir) / "control.csv", cols,
                        ([r[c] for c in cols] for r in rows), meta_for(cfg, "control"))
    return [str(path)]


SWEEP_COLUMNS = ["a2_holds", "eq_x", "eq_eps", "re_lambda", "im_lambda", "classification",
                 "peak_eps", "peak_time", "crossings", "converged"]


def _sweep_cell(job):
    cfg, assignment = job
    try:
        p = cfg.params.with_(**assignment)
    except ParameterError as exc:
        return [False] + [math.nan] * 5 + [math.nan, math.nan, 0, False], str(exc)
    if not validate_assumptions(p).holds:
        return [False] + [math.nan] * 9, "assumption regime violated"
    eq = interior_equilibrium(p)
    lam = eigenvalues_interior(p)
    try:
        rep = detect_limit_cycle(p, (cfg.init_x, cfg.init_eps), horizon=cfg.horizon,
                                 rtol=cfg.rtol, atol=cfg.atol, max_crossings=cfg.max_crossings)
    except (IntegrationError, ParameterError) as exc:
        return [True, eq.x, eq.eps, lam[0].real, abs(lam[0].imag), classify(lam),
                math.nan, math.nan, 0, False], str(exc)
    return [True, eq.x, eq.eps, lam[0].real, abs(lam[0].imag), classify(lam),
            rep.peak_eps_transient[1], rep.peak_eps_transient[0], len(rep.crossings),
            rep.converged], ""


def _sweep_name(key: str) -> str:
    attr = key.split(".", 1)[1] if key.startswith("model.") else key
    if attr not in ("gamma", "tau", "mu", "alpha", "kappa", "sigma"):
        raise ConfigError("sweep.param1", f"{key!r} is not a model parameter")
    return attr


def cmd_sweep(cfg: RunConfig) -> list[str]:
    axes = [(_sweep_name(cfg.sweep_param1), parse_values("sweep.values1", cfg.sweep_values1))]
    if cfg.sweep_param2:
        axes.append((_sweep_name(cfg.sweep_param2), parse_values("sweep.values2", cfg.sweep_values2)))
    names = [a[0] for a in axes]
    cells = [dict(zip(names, combo)) for combo in itertools.product(*(a[1] for a in axes))]
    results = fan_out(_sweep_cell, [(cfg, c) for c in cells])
    rows = [[c[n] for n in names] + vals + [msg] for c, (vals, msg) in zip(cells, results)]
    path = io.write_csv(Path(cfg.out_dir) / "sweep.csv", names + SWEEP_COLUMNS + ["message"],
                        rows, meta_for(cfg, "sweep"))
    print(f"{len(rows)} cells -> {path}")
    return [str(path)]


def cmd_plot(cfg: RunConfig) -> list[str]:
    src = Path(cfg.plot_input) if cfg.plot_input else Path(cfg.out_dir) / "trajectory.csv"
    if not src.exists():
        raise ConfigError("plot.input", f"file not found: {src}")
    if cfg.plot_kind not in ("line", "phase"):
        raise ConfigError("plot.kind", f"must be 'line' or 'phase', got {cfg.plot_kind!r}")
    dst = Path(cfg.out_dir) / f"{src.stem}_{cfg.plot_kind}.svg"
    io.plot_csv(src, dst, cfg.plot_kind)
    return [str(dst)]


COMMANDS = {
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "cycle": cmd_cycle,
    "control": cmd_control,
    "sweep": cmd_sweep,
    "plot": cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coevo", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"coevo {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="random seed (abm layer)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--set", dest="overrides", action="append", nargs="+", default=[],
                        metavar="KEY=VALUE", help="override a config key")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = [item for group in args.overrides for item in group]
    try:
        if args.config is not None and not args.config.exists():
            raise ConfigError("--config", f"file not found: {args.config}")
        cfg = load(args.config, overrides, seed=args.seed, out_dir=args.out)
        print(f"# coevo {__version__} {args.command}")
        for key, value in cfg.items():
            print(f"#   {key} = {'' if value is None else value}")
        written = COMMANDS[args.command](cfg)
    except (ConfigError, ParameterError, AssumptionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SimulationOverflow) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
