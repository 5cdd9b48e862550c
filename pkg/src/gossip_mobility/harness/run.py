"""Execute a scenario config: every engine at every sweep point."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .. import __version__
from .._backend import backend_name
from ..bounds import (
    disconnected_bound_recursion,
    disconnected_constant_bound,
    disconnected_scaling_bound,
    fc_single_bound_recursion,
    fc_single_log_bound,
    no_mobility_reference,
    toy_ages,
)
from ..errors import ConfigError, GossipError
from ..exact import solve_all
from ..scenarios import build, mobility_slowdown
from ..shapes import disconnected_pairs_ages, fc_plus_single_ages, fully_connected_ages
from ..simulate import SimConfig, simulate
from .config import ScenarioConfig

log = logging.getLogger(__name__)

CSV_HEADER = ("sweep_value", "engine", "target", "value", "stderr")
# above this size the symmetric families are solved over set shapes
GENERIC_LIMIT = 10
DEFAULT_BOUNDS = {
    "fc_plus_single": ("fc_single_exact_recursion", "fc_single_log_closed_form"),
    "disconnected_pairs": ("disconnected_recursion", "disconnected_sqrt_closed_form"),
}
_BOUND_FUNCS = {
    "fc_single_exact_recursion": fc_single_bound_recursion,
    "fc_single_log_closed_form": fc_single_log_bound,
    "disconnected_recursion": disconnected_bound_recursion,
    "disconnected_sqrt_closed_form": disconnected_scaling_bound,
    "disconnected_constant_regime": disconnected_constant_bound,
}


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    engine: str
    target: str
    value: float
    stderr: Optional[float] = None
    error: Optional[str] = None

    def cells(self) -> Tuple[str, ...]:
        sv = self.sweep_value
        sv = str(sv) if isinstance(sv, int) else repr(float(sv))
        if self.error is not None:
            return (sv, self.engine, self.target, "nan", f"error: {self.error}")
        se = "" if self.stderr is None else repr(float(self.stderr))
        return (sv, self.engine, self.target, repr(float(self.value)), se)


@dataclass
class SweepResult:
    config: ScenarioConfig
    rows: List[ResultRow] = field(default_factory=list)
    point_seeds: List[int] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def errors(self) -> List[ResultRow]:
        return [r for r in self.rows if r.error is not None]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.cells())
        return buf.getvalue()

    def series(self, engine: str, target: str):
        """``(x, y)`` arrays of one engine/target pair, error rows dropped."""
        pts = [(r.sweep_value, r.value) for r in self.rows
               if r.engine == engine and r.target == target and r.error is None]
        return np.array([p[0] for p in pts], dtype=float), np.array([p[1] for p in pts], dtype=float)


def point_seed(seed: int, point: int, variant: int = 0) -> int:
    """Simulation seed of one sweep point, split off ``seed`` by ``SeedSequence``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(point), int(variant)))
    return int(ss.generate_state(1, np.uint64)[0])


def _point_params(cfg: ScenarioConfig, value):
    params = dict(cfg.params)
    params[cfg.sweep_parameter] = value
    if "f_of_n" in params:
        f = mobility_slowdown(params.pop("f_of_n"), params.get("n", 0))
        params["lambda_m"] = params.get("lam", 1.0) / f
    return params


def _reduce(report, positions, reps=None):
    """Emit ``(target, value, stderr)`` for each requested quantity."""
    positions = np.asarray(positions, dtype=float)
    n = positions.size

    def quantity(q, row):
        if q == "mean":
            return [("mean", float(np.mean(row)))]
        if q == "positions":
            return [(f"v{i + 1}", float(row[i])) for i in range(n)]
        if q == "fc_node":
            return [("fc_node", float(np.mean(row[:-1])))]
        return [("single_node", float(row[-1]))]

    out = []
    for q in report:
        vals = quantity(q, positions)
        if reps is None or len(reps) < 2:
            out.extend((t, v, None) for t, v in vals)
            continue
        per = np.array([[v for _, v in quantity(q, r)] for r in reps])
        err = per.std(axis=0, ddof=1) / math.sqrt(len(reps))
        out.extend((t, v, float(e)) for (t, v), e in zip(vals, err))
    return out


def _shape_positions(scenario, p, lambda_m):
    n = int(p["n"])
    le, lam = p.get("lambda_e", 1.0), p.get("lam", 1.0)
    if scenario == "fully_connected":
        return np.full(n, fully_connected_ages(n, le, lam)[1])
    if scenario == "fc_plus_single":
        s = fc_plus_single_ages(n, le, lam, lambda_m)
        return np.array([s[(1, 0)]] * (n - 1) + [s[(0, 1)]])
    s = disconnected_pairs_ages(n, le, lam, lambda_m)
    return np.full(n, s[(0, 1)])


def _use_shapes(scenario, p):
    return scenario in ("fully_connected", "fc_plus_single", "disconnected_pairs") and int(p["n"]) > GENERIC_LIMIT


def _mobility_of(scenario, p):
    if scenario == "fully_connected" and not p.get("full_mobility", False):
        return 0.0
    if scenario == "fc_plus_single":
        return p.get("lambda_m", p.get("lam", 1.0))
    return p.get("lambda_m", 0.0)


def _engine_rows(cfg: ScenarioConfig, engine, p, variant, seed):
    scenario = cfg.scenario
    prefix = f"{variant}:" if variant else ""
    if scenario == "toy":
        p = dict(p, variant=variant)

    if engine == "bounds":
        if scenario == "toy":
            ages = toy_ages(variant, p.get("lambda_e", 1.0), p.get("lam", 1.0), p.get("lambda_m", 0.0))
            return [(prefix + t, v, e) for t, v, e in _reduce(cfg.report, ages.as_array())]
        kinds = cfg.bounds or DEFAULT_BOUNDS.get(scenario, ())
        if not kinds:
            raise ConfigError(f"no bounds are available for scenario {scenario!r}")
        n, le, lam = int(p["n"]), p.get("lambda_e", 1.0), p.get("lam", 1.0)
        rows = []
        for kind in kinds:
            fn = _BOUND_FUNCS[kind]
            if kind.startswith("fc_single"):
                if scenario != "fc_plus_single":
                    raise ConfigError(f"bound {kind!r} applies to fc_plus_single only")
                rows.append((kind, fn(n, le, lam), None))
            else:
                if scenario != "disconnected_pairs":
                    raise ConfigError(f"bound {kind!r} applies to disconnected_pairs only")
                mu = p.get("lambda_m", 0.0)
                if mu <= 0:
                    raise ConfigError("disconnected bounds need a positive swap rate")
                rows.append((kind, fn(n, le, lam, lam / mu), None))
        return rows

    if engine == "exact":
        if _use_shapes(scenario, p):
            pos = _shape_positions(scenario, p, _mobility_of(scenario, p))
        else:
            pos = solve_all(build(scenario, **p)).position_ages
        return [(prefix + t, v, e) for t, v, e in _reduce(cfg.report, pos)]

    if engine == "no_mobility_reference":
        if _use_shapes(scenario, p) and scenario != "disconnected_pairs":
            pos = _shape_positions(scenario, p, 0.0)
        else:
            pos = no_mobility_reference(build(scenario, **p).without_mobility()).position_ages
        return [(prefix + t, v, e) for t, v, e in _reduce(cfg.report, pos)]

    sim = cfg.sim
    est = simulate(
        build(scenario, **p),
        SimConfig(horizon=sim.horizon, warmup=sim.warmup, replications=sim.replications, seed=seed),
    )
    return [(prefix + t, v, e) for t, v, e in _reduce(cfg.report, est.per_position_mean, est.replication_means)]


def _run_point(cfg: ScenarioConfig, index, value, seeds):
    rows, skipped = [], []
    variants = cfg.variants or ("",)
    try:
        p = _point_params(cfg, value)
    except GossipError as exc:
        return [ResultRow(value, e, "", math.nan, error=f"{type(exc).__name__}: {exc}") for e in cfg.engines], skipped
    for engine in cfg.engines:
        for vi, variant in enumerate(variants):
            if engine == "simulate" and cfg.sim.max_n is not None and int(p.get("n", 0)) > cfg.sim.max_n:
                skipped.append(f"simulate at {cfg.sweep_parameter}={value}{' ' + variant if variant else ''}: n above sim.max_n")
                continue
            try:
                out = _engine_rows(cfg, engine, p, variant, seeds[vi])
            except (GossipError, ValueError, ArithmeticError) as exc:
                log.warning("%s failed at %s=%s: %s", engine, cfg.sweep_parameter, value, exc)
                target = f"{variant}:" if variant else ""
                rows.append(ResultRow(value, engine, target, math.nan, error=f"{type(exc).__name__}: {exc}"))
                continue
            rows.extend(ResultRow(value, engine, t, v, e) for t, v, e in out)
    return rows, skipped


def run(cfg: ScenarioConfig, *, workers: Optional[int] = None) -> SweepResult:
    """Evaluate every engine at every sweep point; failures become error rows."""
    workers = cfg.workers if workers is None else workers
    seed = cfg.sim.seed if cfg.sim is not None else 0
    nvar = max(1, len(cfg.variants))
    seeds = [[point_seed(seed, k, v) for v in range(nvar)] for k in range(len(cfg.sweep_values))]
    jobs = list(enumerate(cfg.sweep_values))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda kv: _run_point(cfg, kv[0], kv[1], seeds[kv[0]]), jobs))
    else:
        parts = [_run_point(cfg, k, v, seeds[k]) for k, v in jobs]
    result = SweepResult(cfg, point_seeds=[s for row in seeds for s in row])
    for rows, skipped in parts:
        result.rows.extend(rows)
        result.skipped.extend(skipped)
    return result


def manifest(result: SweepResult) -> dict:
    """Everything needed to rerun: the full config plus derived seeds and versions."""
    return {
        "tool": "gossip_mobility",
        "version": __version__,
        "backend": backend_name(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": result.config.to_dict(),
        "point_seeds": result.point_seeds,
        "skipped": result.skipped,
        "errors": [" ".join(r.cells()) for r in result.errors],
    }


def write_outputs(result: SweepResult, out_dir=None, plot: Optional[bool] = None) -> Path:
    """Write ``results.csv``, ``manifest.json`` and optionally ``plot.svg``."""
    from .plot import emit_plot

    out = Path(out_dir if out_dir is not None else result.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(result.to_csv_text())
    (out / "manifest.json").write_text(json.dumps(manifest(result), indent=2, sort_keys=True) + "\n")
    want_plot = result.config.plot if plot is None else plot
    if want_plot and any(r.error is None for r in result.rows):
        emit_plot(result, out / "plot.svg")
    return out
