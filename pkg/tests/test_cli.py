import csv
import json

from gossip_mobility.harness.cli import main
from gossip_mobility.scenarios import toy_variant_13


def test_run_preset(tmp_path, capsys):
    assert main(["run", "--preset", "fig6", "--out", str(tmp_path), "--seed", "3"]) == 0
    assert (tmp_path / "plot.svg").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"]["sim"]["seed"] == 3
    assert "42 rows" in capsys.readouterr().out


def test_run_from_config_and_manifest(tmp_path):
    cfg = {
        "scenario": {"name": "toy", "params": {"lam": 2}, "variants": ["12"]},
        "engines": ["exact", "simulate"],
        "sweep": {"parameter": "lambda_m", "values": [0.5, 5]},
        "sim": {"horizon": 200, "replications": 2, "seed": 1},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "a"), "--no-plot", "--workers", "2"]) == 0
    assert not (tmp_path / "a" / "plot.svg").exists()
    assert main(["run", "--config", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()


def test_partial_failure_exit_code(tmp_path):
    cfg = {
        "scenario": {"name": "fc_plus_single"},
        "engines": ["bounds"],
        "sweep": {"parameter": "n", "values": [3, 8]},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert (tmp_path / "o" / "results.csv").exists()


def test_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text('{"scenario": {"name": "toy"}, "engines": ["x"], "sweep": {"parameter": "lambda_m", "values": [1]}}')
    assert main(["run", "--config", str(path)]) == 1
    assert "engines[0]" in capsys.readouterr().err
    assert main(["run"]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 1


def test_solve_and_simulate(tmp_path, capsys):
    spec = tmp_path / "net.json"
    toy_variant_13(1, 1, 1).to_json(spec)
    assert main(["solve", "--spec", str(spec), "--out", str(tmp_path / "s.csv"), "--positions", str(tmp_path / "p.csv")]) == 0
    assert "v1 = 1.75" in capsys.readouterr().out
    assert list(csv.reader(open(tmp_path / "p.csv")))[3] == ["3", "1.625"]
    assert main(["simulate", "--scenario", "toy", "--param", "variant=13", "--param", "lambda_m=1",
                 "--horizon", "300", "--replications", "2", "--out", str(tmp_path / "m.csv"),
                 "--replications-out", str(tmp_path / "r.csv")]) == 0
    assert list(csv.reader(open(tmp_path / "m.csv")))[0] == ["position", "mean", "stderr"]
    assert main(["solve", "--scenario", "fc_plus_single", "--param", "n=2"]) == 1


def test_bounds_command(tmp_path, capsys):
    assert main(["bounds", "--kind", "disconnected_sqrt_closed_form", "--n", "8", "16", "--f", "sqrt_n",
                 "--out", str(tmp_path / "b.csv")]) == 0
    rows = list(csv.reader(open(tmp_path / "b.csv")))
    assert rows[0] == ["n", "bound", "kind", "f_of_n"] and rows[2][3] == "4.0"
    assert main(["bounds", "--kind", "disconnected_recursion", "--n", "8", "--f", "2"]) == 0
