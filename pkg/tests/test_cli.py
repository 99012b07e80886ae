import json
import math

import numpy as np
import pytest

from coevo import __version__
from coevo.cli import main
from coevo.io import read_csv


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_equilibria_report(tmp_path, capsys):
    assert run(tmp_path, "equilibria") == 0
    doc = json.loads((tmp_path / "equilibria.json").read_text())
    eqs = doc["equilibria"]
    assert [(e["x"], e["eps"]) for e in eqs][:2] == [(0.0, 0.0), (1.0, 0.0)]
    assert eqs[2]["x"] == pytest.approx(0.99) and eqs[2]["eps"] == pytest.approx(28 / 15, abs=1e-12)
    assert [e["classification"] for e in eqs] == ["saddle", "saddle", "unstable-spiral"]
    assert doc["meta"]["version"] == __version__ and doc["meta"]["model.gamma"] == 10.0
    assert "unstable-spiral" in capsys.readouterr().out


def test_simulate_planar_boundary_closed_form(tmp_path):
    assert run(tmp_path, "simulate", "--set", "init.x=1", "init.eps=2", "run.horizon=10") == 0
    meta, cols, data = read_csv(tmp_path / "trajectory.csv")
    assert cols == ["t", "x", "epsilon"]
    assert data[-1, 0] == 10.0 and data[-1, 1] == 1.0
    assert data[-1, 2] == pytest.approx(2 * math.exp(-1), rel=1e-8)
    assert data[-1, 2] == pytest.approx(0.735759, abs=1e-6)
    # enough metadata to re-run
    for key in ("model.tau", "solver.rtol", "init.eps", "run.layer"):
        assert key in meta
    assert (tmp_path / "trajectory.csv").read_text().startswith(f"# coevo {__version__}")


def test_simulate_abm_is_byte_identical(tmp_path):
    args = ["simulate", "--seed", "7", "--set", "run.layer=abm", "graph.n=60", "run.horizon=2",
            "run.samples=21"]
    path = tmp_path / "trajectory.csv"
    assert run(tmp_path, *args) == 0
    a = path.read_bytes()
    path.unlink()
    assert run(tmp_path, *args) == 0
    assert a == path.read_bytes()
    assert b"seed_used = 7" in a
    meta, cols, data = read_csv(path)
    assert cols == ["t", "xbar1", "epsilon"] and data.shape == (21, 3)


def test_abm_requires_a_seed(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--set", "run.layer=abm", "graph.n=10") == 2
    assert "seed" in capsys.readouterr().err


def test_replicas_get_distinct_seeds(tmp_path):
    assert run(tmp_path, "simulate", "--seed", "3", "--set", "run.layer=abm", "graph.n=30",
               "run.horizon=1", "run.replicas=2") == 0
    a = read_csv(tmp_path / "trajectory_seed3.csv")[2]
    b = read_csv(tmp_path / "trajectory_seed4.csv")[2]
    assert not np.array_equal(a, b)


def test_node_layer_columns(tmp_path):
    assert run(tmp_path, "simulate", "--set", "run.layer=node-mf", "graph.n=4", "run.horizon=2",
               "init.p1=0.1,0.2,0.3,0.4") == 0
    _, cols, data = read_csv(tmp_path / "trajectory.csv")
    assert cols == ["t", "x", "epsilon", "p1_0", "p1_1", "p1_2", "p1_3"]
    assert data[0, 1] == pytest.approx(0.25)
    np.testing.assert_allclose(data[:, 1], data[:, 3:].mean(axis=1), rtol=1e-14)
    assert run(tmp_path, "simulate", "--set", "run.layer=node-mf", "graph.n=60", "run.horizon=1") == 0
    assert read_csv(tmp_path / "trajectory.csv")[1] == ["t", "x", "epsilon"]


def test_edge_list_graph(tmp_path):
    edges = tmp_path / "ring.txt"
    edges.write_text("# ring\n0 0\n0 1\n1 1\n1 2\n2 2\n2 0\n")
    assert run(tmp_path, "simulate", "--set", "run.layer=node-mf", "graph.kind=edges",
               f"graph.edges={edges}", "graph.n=3", "run.horizon=1") == 0
    assert run(tmp_path, "simulate", "--set", "run.layer=node-mf", "graph.kind=edges",
               f"graph.edges={tmp_path / 'missing.txt'}", "graph.n=3") == 2


@pytest.mark.parametrize("kind", ["line", "phase"])
def test_plot_round_trip(tmp_path, kind):
    assert run(tmp_path, "simulate", "--set", "run.horizon=5", "run.samples=51") == 0
    assert run(tmp_path, "plot", "--set", f"plot.kind={kind}") == 0
    svg = (tmp_path / f"trajectory_{kind}.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert svg.count("<polyline") >= 1


def test_bad_key_names_the_key(tmp_path, capsys):
    assert run(tmp_path, "equilibria", "--set", "model.gama=3") == 2
    assert "model.gama" in capsys.readouterr().err
    assert run(tmp_path, "equilibria", "--set", "model.tau=abc") == 2
    assert "model.tau" in capsys.readouterr().err


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# planar run\nmodel.tau = 0.2\nrun.horizon = 3\n", encoding="utf-8")
    assert main(["simulate", "--config", str(cfg), "--set", "run.horizon=4", "--out", str(tmp_path)]) == 0
    meta, _, data = read_csv(tmp_path / "trajectory.csv")
    assert float(meta["model.tau"]) == 0.2 and data[-1, 0] == 4.0
    assert main(["simulate", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 2


def test_assumption_violation_is_error_or_warning(tmp_path, capsys):
    assert run(tmp_path, "equilibria", "--set", "model.kappa=1.5") == 2
    assert run(tmp_path, "cycle", "--set", "model.kappa=1.5") == 2
    capsys.readouterr()
    assert run(tmp_path, "simulate", "--set", "model.kappa=1.5", "run.horizon=1") == 0
    assert "warning" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path):
    # the all-irresponsible population drives eps past the overflow guard
    assert run(tmp_path, "simulate", "--seed", "1", "--set", "run.layer=abm", "graph.n=10",
               "init.x=0", "init.eps=1", "run.horizon=5") == 3


def test_cycle_and_control_outputs(tmp_path, capsys):
    assert run(tmp_path, "cycle", "--set", "cycle.horizon=300") == 0
    doc = json.loads((tmp_path / "cycle.json").read_text())
    assert doc["converged"] is False and doc["notes"]
    assert (tmp_path / "cycle_crossings.csv").exists()
    assert run(tmp_path, "control", "--set", "control.policies=alpha:constant,alpha:linear:0.5") == 0
    _, cols, data = read_csv(tmp_path / "control.csv")
    peak = data[:, cols.index("peak_eps")]
    assert len(peak) == 2 and peak[1] < peak[0]
    assert run(tmp_path, "control", "--set", "control.policies=alpha:cubic") == 2


def test_sweep_rows(tmp_path):
    assert run(tmp_path, "sweep", "--set", "sweep.param1=model.kappa", "sweep.values1=1.5,3",
               "run.horizon=20") == 0
    _, cols, data = read_csv(tmp_path / "sweep.csv")
    assert data.shape[0] == 2
    assert data[0, cols.index("a2_holds")] != data[0, cols.index("a2_holds")]  # "false" is not numeric
    assert data[1, cols.index("eq_x")] == pytest.approx(0.99)
    assert run(tmp_path, "sweep", "--set", "sweep.param1=run.horizon") == 2
