"""Declarative experiment descriptions and the built-in figure presets.

A config is a JSON object::

    {
      "scenario": {"name": "toy", "params": {"lambda_e": 1, "lam": 1},
                   "variants": ["none", "13", "12"]},
      "engines": ["exact", "bounds"],
      "sweep": {"parameter": "lambda_m", "values": [0.1, 1, 10]},
      "report": ["mean"],
      "bounds": [],
      "sim": {"horizon": 2e5, "warmup": 2e4, "replications": 10, "seed": 0, "max_n": null},
      "output_dir": "out/fig6",
      "plot": true,
      "xscale": "log",
      "workers": 1
    }

``variants`` is only meaningful for the toy scenario. ``report`` selects the
quantities emitted per engine: ``mean``, ``positions``, ``fc_node`` or
``single_node``. ``bounds`` lists bound kinds for the scaling families.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..bounds import BOUND_KINDS
from ..errors import ConfigError, UnknownPreset
from ..scenarios import BUILDERS, TOY_VARIANTS, normalize_toy_variant

ENGINES = ("exact", "simulate", "bounds", "no_mobility_reference")
REPORTS = ("mean", "positions", "fc_node", "single_node")
LAMBDA_GRID = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class SimSettings:
    horizon: float = 2e5
    warmup: Optional[float] = None
    replications: int = 10
    seed: int = 0
    max_n: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "warmup": 0.1 * self.horizon if self.warmup is None else self.warmup,
            "replications": self.replications,
            "seed": self.seed,
            "max_n": self.max_n,
        }


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: Dict[str, Any]
    engines: Tuple[str, ...]
    sweep_parameter: str
    sweep_values: Tuple[float, ...]
    variants: Tuple[str, ...] = ()
    report: Tuple[str, ...] = ("mean",)
    bounds: Tuple[str, ...] = ()
    sim: Optional[SimSettings] = None
    output_dir: str = "results"
    plot: bool = True
    xscale: str = "log"
    workers: int = 1
    name: str = ""

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "scenario": {"name": self.scenario, "params": dict(self.params)},
            "engines": list(self.engines),
            "sweep": {"parameter": self.sweep_parameter, "values": list(self.sweep_values)},
            "report": list(self.report),
            "bounds": list(self.bounds),
            "output_dir": self.output_dir,
            "plot": self.plot,
            "xscale": self.xscale,
            "workers": self.workers,
        }
        if self.variants:
            out["scenario"]["variants"] = list(self.variants)
        if self.sim is not None:
            out["sim"] = self.sim.to_dict()
        return out

    def replace(self, **changes) -> "ScenarioConfig":
        d = self.__dict__.copy()
        d.update(changes)
        return ScenarioConfig(**d)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        sim = self.sim or SimSettings()
        return self.replace(sim=SimSettings(sim.horizon, sim.warmup, sim.replications, int(seed), sim.max_n))


def _fail(field_name, msg):
    raise ConfigError(f"field '{field_name}': {msg}")


def _get(d, key, where, kind=None, default=...):
    if key not in d:
        if default is ...:
            _fail(f"{where}{key}", "missing")
        return default
    val = d[key]
    if kind is not None and not isinstance(val, kind):
        _fail(f"{where}{key}", f"expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
    return val


def _number(val, where, positive=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        _fail(where, f"expected a finite number, got {val!r}")
    if positive and val <= 0:
        _fail(where, f"must be positive, got {val!r}")
    return val


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a decoded config object; errors name the offending field."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in data and "scenario" not in data:
        # a manifest written by a previous run
        data = data["config"]
    scen = _get(data, "scenario", "", dict)
    name = _get(scen, "name", "scenario.", str)
    if name not in BUILDERS:
        _fail("scenario.name", f"unknown scenario {name!r}; expected one of {sorted(BUILDERS)}")
    params = dict(_get(scen, "params", "scenario.", dict, {}))
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    for k, v in params.items():
        if k == "f_of_n" and isinstance(v, str):
            continue
        if k == "full_mobility":
            if not isinstance(v, bool):
                _fail(f"scenario.params.{k}", "expected a boolean")
            continue
        _number(v, f"scenario.params.{k}")
    variants = ()
    if name == "toy":
        raw = _get(scen, "variants", "scenario.", list, list(TOY_VARIANTS))
        try:
            variants = tuple(normalize_toy_variant(v) for v in raw)
        except ConfigError as exc:
            _fail("scenario.variants", str(exc))
        if not variants:
            _fail("scenario.variants", "must be nonempty")

    engines = _get(data, "engines", "", list)
    if not engines:
        _fail("engines", "must be nonempty")
    for i, e in enumerate(engines):
        if e not in ENGINES:
            _fail(f"engines[{i}]", f"unknown engine {e!r}; expected one of {ENGINES}")

    sweep = _get(data, "sweep", "", dict)
    parameter = _get(sweep, "parameter", "sweep.", str)
    values = _get(sweep, "values", "sweep.", list)
    if not values:
        _fail("sweep.values", "must be nonempty")
    for i, v in enumerate(values):
        _number(v, f"sweep.values[{i}]", positive=True)
    if parameter == "n":
        for i, v in enumerate(values):
            if int(v) != v:
                _fail(f"sweep.values[{i}]", "n must be an integer")
        values = [int(v) for v in values]

    report = _get(data, "report", "", list, ["mean"])
    for i, r in enumerate(report):
        if r not in REPORTS:
            _fail(f"report[{i}]", f"unknown quantity {r!r}; expected one of {REPORTS}")
    bounds = _get(data, "bounds", "", list, [])
    for i, b in enumerate(bounds):
        if b not in BOUND_KINDS:
            _fail(f"bounds[{i}]", f"unknown bound kind {b!r}")

    sim = None
    if "sim" in data:
        s = _get(data, "sim", "", dict)
        horizon = _number(_get(s, "horizon", "sim.", None, 2e5), "sim.horizon", positive=True)
        warmup = _get(s, "warmup", "sim.", None, None)
        if warmup is not None:
            _number(warmup, "sim.warmup")
            if not 0 <= warmup < horizon:
                _fail("sim.warmup", "must satisfy 0 <= warmup < horizon")
        reps = _get(s, "replications", "sim.", int, 10)
        if reps < 1:
            _fail("sim.replications", "must be >= 1")
        seed = _get(s, "seed", "sim.", int, 0)
        if not 0 <= seed < 2**64:
            _fail("sim.seed", "must be an unsigned 64-bit integer")
        max_n = _get(s, "max_n", "sim.", None, None)
        if max_n is not None and (not isinstance(max_n, int) or max_n < 1):
            _fail("sim.max_n", "must be a positive integer or null")
        sim = SimSettings(float(horizon), None if warmup is None else float(warmup), reps, seed, max_n)
    elif "simulate" in engines:
        _fail("sim", "the simulate engine requires a sim block")

    xscale = _get(data, "xscale", "", str, "log")
    if xscale not in ("log", "linear"):
        _fail("xscale", "expected 'log' or 'linear'")
    workers = _get(data, "workers", "", int, 1)
    if workers < 1:
        _fail("workers", "must be >= 1")
    return ScenarioConfig(
        scenario=name,
        params=params,
        engines=tuple(engines),
        sweep_parameter=parameter,
        sweep_values=tuple(values),
        variants=variants,
        report=tuple(report),
        bounds=tuple(bounds),
        sim=sim,
        output_dir=str(_get(data, "output_dir", "", str, "results")),
        plot=bool(_get(data, "plot", "", bool, True)),
        xscale=xscale,
        workers=workers,
        name=str(_get(data, "name", "", str, "")),
    )


def load_config(path) -> ScenarioConfig:
    """Read and validate a config file (a previous run's manifest also works)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_config(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


_PRESETS = {
    "fig6": {
        "name": "fig6",
        "scenario": {"name": "toy", "params": {"lambda_e": 1.0, "lam": 1.0}, "variants": ["none", "13", "12"]},
        "engines": ["exact", "bounds"],
        "sweep": {"parameter": "lambda_m", "values": list(LAMBDA_GRID)},
        "report": ["mean"],
        "output_dir": "results/fig6",
    },
    "fig7": {
        "name": "fig7",
        "scenario": {"name": "toy", "params": {"lambda_e": 1.0, "lam": 1.0}, "variants": ["none", "13", "12"]},
        "engines": ["exact", "bounds"],
        "sweep": {"parameter": "lambda_m", "values": list(LAMBDA_GRID)},
        "report": ["positions"],
        "output_dir": "results/fig7",
    },
    "fig8": {
        "name": "fig8",
        "scenario": {"name": "fc_plus_single", "params": {"lambda_e": 1.0, "lam": 1.0, "lambda_m": 1.0}},
        "engines": ["simulate", "bounds", "no_mobility_reference"],
        "sweep": {"parameter": "n", "values": [8, 16, 32, 64, 128]},
        "report": ["fc_node"],
        "bounds": ["fc_single_exact_recursion", "fc_single_log_closed_form"],
        "sim": {"horizon": 2e5, "replications": 10, "seed": 0},
        "output_dir": "results/fig8",
    },
    "fig9": {
        "name": "fig9",
        "scenario": {"name": "disconnected_pairs", "params": {"lambda_e": 1.0, "lam": 1.0, "f_of_n": "n"}},
        "engines": ["simulate", "bounds", "no_mobility_reference"],
        "sweep": {"parameter": "n", "values": [8, 16, 32, 64, 128, 256, 512, 1024]},
        "report": ["mean"],
        "bounds": ["disconnected_recursion", "disconnected_sqrt_closed_form"],
        "sim": {"horizon": 2e5, "replications": 10, "seed": 0, "max_n": 256},
        "output_dir": "results/fig9",
    },
}

PRESET_NAMES = tuple(_PRESETS)


def preset_dict(name: str) -> dict:
    try:
        return copy.deepcopy(_PRESETS[name])
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; expected one of {PRESET_NAMES}") from None


def preset(name: str) -> ScenarioConfig:
    """Configuration reproducing one of the four comparison figures at desk scale."""
    return parse_config(preset_dict(name))
