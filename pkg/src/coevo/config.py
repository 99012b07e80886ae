"""Run configuration: flat ``section.key = value`` files plus command-line overrides.

Example file::

    # reference setting, planar layer
    model.gamma = 10
    model.tau = 0.1
    run.layer = planar
    init.x = 0.5
    init.eps = 0.5
    run.horizon = 50
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import CoevoError
from .model import ModelParams

LAYERS = ("abm", "node-mf", "planar")
GRAPH_KINDS = ("complete", "edges", "random")


class ConfigError(CoevoError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class RunConfig:
    # model
    gamma: float = 10.0
    tau: float = 0.1
    mu: float = 0.6
    alpha: float = 0.3
    kappa: float = 3.0
    sigma: float = 0.6
    # graph
    graph_kind: str = "complete"
    graph_n: int = 1000
    graph_edges: str = ""
    graph_p: float = 0.1
    graph_seed: int = 0
    # run
    layer: str = "planar"
    horizon: float = 50.0
    samples: int = 501
    seed: int | None = None
    replicas: int = 1
    frozen_impact: bool = False
    # initial condition
    init_x: float = 0.5
    init_eps: float = 0.5
    init_p1: str = ""
    # solver
    rtol: float = 1e-9
    atol: float = 1e-12
    # cycle detection
    section_x: float | None = None
    crossing_tol: float = 1e-4
    max_crossings: int = 200
    cycle_horizon: float = 2000.0
    # control
    policies: str = "alpha:constant,alpha:linear:0.5,alpha:power:0.1:2"
    # sweep
    sweep_param1: str = "model.gamma"
    sweep_values1: str = "5,10,20"
    sweep_param2: str = ""
    sweep_values2: str = ""
    # plot
    plot_input: str = ""
    plot_kind: str = "line"
    # output
    out_dir: str = "out"

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.gamma, self.tau, self.mu, self.alpha, self.kappa, self.sigma)

    def items(self) -> list[tuple[str, object]]:
        rev = {v: k for k, v in KEYS.items()}
        return [(rev[f.name], getattr(self, f.name)) for f in fields(self)]

    def as_dict(self) -> dict:
        return asdict(self)


# dotted config key -> RunConfig attribute
KEYS = {
    "model.gamma": "gamma", "model.tau": "tau", "model.mu": "mu",
    "model.alpha": "alpha", "model.kappa": "kappa", "model.sigma": "sigma",
    "graph.kind": "graph_kind", "graph.n": "graph_n", "graph.edges": "graph_edges",
    "graph.p": "graph_p", "graph.seed": "graph_seed",
    "run.layer": "layer", "run.horizon": "horizon", "run.samples": "samples",
    "run.seed": "seed", "run.replicas": "replicas", "run.frozen_impact": "frozen_impact",
    "init.x": "init_x", "init.eps": "init_eps", "init.p1": "init_p1",
    "solver.rtol": "rtol", "solver.atol": "atol",
    "cycle.section_x": "section_x", "cycle.tol": "crossing_tol",
    "cycle.max_crossings": "max_crossings", "cycle.horizon": "cycle_horizon",
    "control.policies": "policies",
    "sweep.param1": "sweep_param1", "sweep.values1": "sweep_values1",
    "sweep.param2": "sweep_param2", "sweep.values2": "sweep_values2",
    "plot.input": "plot_input", "plot.kind": "plot_kind",
    "output.dir": "out_dir",
}

_TYPES = {"gamma": float, "tau": float, "mu": float, "alpha": float, "kappa": float,
          "sigma": float, "graph_n": int, "graph_p": float, "graph_seed": int,
          "horizon": float, "samples": int, "seed": int, "replicas": int,
          "frozen_impact": bool, "init_x": float, "init_eps": float, "rtol": float,
          "atol": float, "section_x": float, "crossing_tol": float, "max_crossings": int,
          "cycle_horizon": float}


def _convert(key: str, attr: str, raw: str):
    kind = _TYPES.get(attr, str)
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {kind.__name__}") from None
    return raw


def parse_lines(lines, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in text.split("=", 1))
        out[key] = value
    return out


def load(path: str | Path | None = None, overrides: list[str] | None = None,
         seed: int | None = None, out_dir: str | None = None) -> RunConfig:
    """Resolve defaults, then the file, then ``--set`` overrides, then dedicated flags."""
    raw: dict[str, str] = {}
    if path is not None:
        raw.update(parse_lines(Path(path).read_text(encoding="utf-8").splitlines(), str(path)))
    for item in overrides or []:
        raw.update(parse_lines([item], "--set"))
    cfg = RunConfig()
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(key, "unknown configuration key")
        attr = KEYS[key]
        setattr(cfg, attr, _convert(key, attr, value))
    if seed is not None:
        cfg.seed = seed
    if out_dir is not None:
        cfg.out_dir = out_dir
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.layer not in LAYERS:
        raise ConfigError("run.layer", f"must be one of {LAYERS}, got {cfg.layer!r}")
    if cfg.graph_kind not in GRAPH_KINDS:
        raise ConfigError("graph.kind", f"must be one of {GRAPH_KINDS}, got {cfg.graph_kind!r}")
    if cfg.graph_kind == "edges" and not cfg.graph_edges:
        raise ConfigError("graph.edges", "edge-list file required when graph.kind = edges")
    if cfg.graph_n < 1:
        raise ConfigError("graph.n", "must be >= 1")
    if cfg.horizon <= 0:
        raise ConfigError("run.horizon", "must be > 0")
    if cfg.samples < 2:
        raise ConfigError("run.samples", "must be >= 2")
    if cfg.replicas < 1:
        raise ConfigError("run.replicas", "must be >= 1")
    if not 0 <= cfg.init_x <= 1:
        raise ConfigError("init.x", "must lie in [0, 1]")
    if cfg.init_eps < 0:
        raise ConfigError("init.eps", "must be >= 0")
    if cfg.rtol <= 0:
        raise ConfigError("solver.rtol", "must be > 0")
    if cfg.atol <= 0:
        raise ConfigError("solver.atol", "must be > 0")
    for name, key in (("gamma", "model.gamma"), ("tau", "model.tau"),
                      ("mu", "model.mu"), ("kappa", "model.kappa")):
        if getattr(cfg, name) <= 0:
            raise ConfigError(key, "must be > 0")
    if cfg.alpha < 0:
        raise ConfigError("model.alpha", "must be >= 0")
    if not 0 <= cfg.sigma <= cfg.kappa:
        raise ConfigError("model.sigma", "must lie in [0, model.kappa]")
    if cfg.init_p1:
        if cfg.layer != "node-mf":
            raise ConfigError("init.p1", "only valid for run.layer = node-mf")
        try:
            values = [float(v) for v in cfg.init_p1.split(",")]
        except ValueError:
            raise ConfigError("init.p1", "must be a comma-separated list of floats") from None
        if len(values) != cfg.graph_n and cfg.graph_kind != "edges":
            raise ConfigError("init.p1", f"has {len(values)} entries, graph.n = {cfg.graph_n}")


def require_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("run.seed", "a seed is required for the abm layer (--seed N)")
    return cfg.seed


def parse_values(key: str, raw: str) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as a list of floats") from None
