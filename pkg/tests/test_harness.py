import csv
import io
import json
import math
import re

import pytest

from gossip_mobility.errors import ConfigError, EmptyResult, UnknownPreset
from gossip_mobility.harness import (
    CSV_HEADER,
    ResultRow,
    SweepResult,
    emit_plot,
    load_config,
    parse_config,
    preset,
    run,
    write_outputs,
)
from gossip_mobility.harness.config import SimSettings, preset_dict


def _rows(result):
    return list(csv.reader(io.StringIO(result.to_csv_text())))


def _lookup(result, value, engine, target):
    (row,) = [r for r in result.rows if r.sweep_value == value and r.engine == engine and r.target == target]
    return row.value


def small_config(**over):
    d = {
        "scenario": {"name": "fc_plus_single", "params": {"lambda_e": 1, "lam": 1}},
        "engines": ["exact", "simulate", "bounds", "no_mobility_reference"],
        "sweep": {"parameter": "n", "values": [4, 6, 8]},
        "report": ["fc_node", "single_node", "mean"],
        "sim": {"horizon": 500, "replications": 2, "seed": 7},
    }
    d.update(over)
    return parse_config(d)


def test_fig6_curves():
    res = run(preset("fig6"))
    assert _rows(res)[0] == list(CSV_HEADER)
    grid = preset("fig6").sweep_values
    none = [_lookup(res, v, "exact", "none:mean") for v in grid]
    assert max(none) - min(none) < 1e-15
    for variant in ("13", "12"):
        curve = [_lookup(res, v, "exact", f"{variant}:mean") for v in grid]
        assert curve[-1] < curve[0]
    last = grid[-1]
    assert (_lookup(res, last, "exact", "13:mean") < _lookup(res, last, "exact", "12:mean")
            < _lookup(res, last, "exact", "none:mean"))
    assert not res.errors


def test_fig7_positions():
    res = run(preset("fig7"))
    v1 = _lookup(res, 1000.0, "exact", "13:v1")
    v3 = _lookup(res, 1000.0, "exact", "13:v3")
    assert v1 == pytest.approx(5 / 3, abs=1e-3) and v3 == pytest.approx(5 / 3, abs=1e-3)
    assert _lookup(res, 1000.0, "exact", "13:v2") == pytest.approx(2.0, rel=1e-12)
    assert _lookup(res, 1000.0, "bounds", "13:v2") == 2.0


def test_fig8_preset_echo():
    cfg = preset("fig8")
    assert cfg.params["lambda_m"] == 1.0
    assert cfg.params["lambda_e"] == cfg.params["lam"] == 1.0
    assert cfg.sweep_values == (8, 16, 32, 64, 128)
    assert cfg.sim.horizon == 2e5 and cfg.sim.replications == 10
    assert cfg.to_dict()["sim"]["warmup"] == 2e4


def test_fig9_preset():
    cfg = preset("fig9")
    assert cfg.params["f_of_n"] == "n" and cfg.sim.max_n == 256


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset("fig10")


def test_all_engines_small_sweep():
    res = run(small_config())
    assert not res.errors
    for n in (6, 8):
        exact = _lookup(res, n, "exact", "fc_node")
        assert _lookup(res, n, "simulate", "fc_node") == pytest.approx(exact, rel=0.1)
        assert _lookup(res, n, "bounds", "fc_single_exact_recursion") >= exact
    assert _lookup(res, 8, "no_mobility_reference", "single_node") == pytest.approx(2.0, rel=1e-12)


def test_per_point_isolation():
    # n = 3 has no bound; the failure must not touch the other points
    bad = run(small_config(engines=["exact", "bounds"], sweep={"parameter": "n", "values": [3, 6, 8]}))
    errs = bad.errors
    assert len(errs) == 1 and errs[0].sweep_value == 3 and errs[0].engine == "bounds"
    assert "BadScale" in errs[0].error
    good = run(small_config(engines=["exact", "bounds"], sweep={"parameter": "n", "values": [6, 8]}))
    for n in (6, 8):
        for eng, tgt in (("exact", "mean"), ("bounds", "fc_single_exact_recursion")):
            assert _lookup(bad, n, eng, tgt) == _lookup(good, n, eng, tgt)
    row = [r for r in _rows(bad) if r[1] == "bounds" and r[0] == "3"][0]
    assert row[3] == "nan" and row[4].startswith("error: ")


def test_concurrent_points_match_sequential():
    a = run(small_config(), workers=1)
    b = run(small_config(), workers=3)
    assert a.to_csv_text() == b.to_csv_text()


def test_seed_changes_simulation_only():
    a = run(small_config())
    b = run(small_config().with_seed(8))
    assert _lookup(a, 6, "exact", "mean") == _lookup(b, 6, "exact", "mean")
    assert _lookup(a, 6, "simulate", "mean") != _lookup(b, 6, "simulate", "mean")


def test_sim_max_n_skips():
    cfg = small_config(sim={"horizon": 100, "replications": 1, "max_n": 6})
    res = run(cfg)
    assert not [r for r in res.rows if r.engine == "simulate" and r.sweep_value == 8]
    assert res.skipped


def test_disconnected_with_slowdown():
    cfg = parse_config({
        "scenario": {"name": "disconnected_pairs", "params": {"f_of_n": "n"}},
        "engines": ["exact", "bounds", "no_mobility_reference"],
        "sweep": {"parameter": "n", "values": [8, 64]},
    })
    res = run(cfg)
    assert not res.errors
    for n in (8, 64):
        ex = _lookup(res, n, "exact", "mean")
        assert _lookup(res, n, "bounds", "disconnected_sqrt_closed_form") >= ex
        assert _lookup(res, n, "no_mobility_reference", "mean") > ex


def test_outputs_and_manifest_rerun(tmp_path):
    cfg = small_config()
    res = run(cfg)
    out = write_outputs(res, tmp_path / "a")
    assert {p.name for p in out.iterdir()} == {"results.csv", "manifest.json", "plot.svg"}
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["sim"]["seed"] == 7 and len(man["point_seeds"]) == 3
    again = run(load_config(out / "manifest.json"))
    write_outputs(again, tmp_path / "b", plot=False)
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()
    assert not (tmp_path / "b" / "plot.svg").exists()


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"engines": []}, "engines"),
        ({"engines": ["exact", "magic"]}, "engines[1]"),
        ({"sweep": {"parameter": "n", "values": [4, -1]}}, "sweep.values[1]"),
        ({"sweep": {"parameter": "n", "values": [4.5]}}, "sweep.values[0]"),
        ({"sim": {"horizon": 10, "warmup": 20}}, "sim.warmup"),
        ({"sim": {"replications": 0}}, "sim.replications"),
        ({"report": ["median"]}, "report[0]"),
        ({"xscale": "sqrt"}, "xscale"),
        ({"bounds": ["tight"]}, "bounds[0]"),
    ],
)
def test_config_field_diagnostics(patch, field):
    d = preset_dict("fig8")
    d.update(patch)
    with pytest.raises(ConfigError, match=re.escape(f"field '{field}'")):
        parse_config(d)


def test_simulate_requires_sim_block():
    d = preset_dict("fig8")
    del d["sim"]
    with pytest.raises(ConfigError, match="field 'sim'"):
        parse_config(d)


def test_unknown_scenario_and_variant():
    d = preset_dict("fig6")
    d["scenario"]["variants"] = ["23"]
    with pytest.raises(ConfigError, match="scenario.variants"):
        parse_config(d)
    d = preset_dict("fig6")
    d["scenario"]["name"] = "ring"
    with pytest.raises(ConfigError, match="scenario.name"):
        parse_config(d)


def test_json_syntax_error_has_position(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "engines": [,]\n}')
    with pytest.raises(ConfigError, match=r"c\.json:2:\d+"):
        load_config(p)


def test_plot_deterministic_and_polylines(tmp_path):
    res = run(preset("fig6"))
    a = emit_plot(res, tmp_path / "a.svg")
    b = emit_plot(run(preset("fig6")))
    assert a == b
    assert a.count("<polyline") == 3
    assert "<circle" in a
    assert (tmp_path / "a.svg").read_text() == a


def test_plot_single_series():
    cfg = parse_config({
        "scenario": {"name": "toy", "variants": ["13"]},
        "engines": ["exact"],
        "sweep": {"parameter": "lambda_m", "values": [0.1, 1, 10]},
    })
    svg = emit_plot(run(cfg))
    assert svg.count("<polyline") == 1


def test_plot_linear_scale():
    cfg = small_config(engines=["exact"], xscale="linear")
    svg = emit_plot(run(cfg))
    assert "(log scale)" not in svg and svg.count("<polyline") == 3


def test_empty_result():
    res = SweepResult(preset("fig6"))
    with pytest.raises(EmptyResult):
        emit_plot(res)
    res.rows.append(ResultRow(1.0, "exact", "x", math.nan, error="boom"))
    with pytest.raises(EmptyResult):
        emit_plot(res)
