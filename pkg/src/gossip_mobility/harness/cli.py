"""Command line entry point.

Subcommands
-----------
run       sweep a scenario config (or preset) and write results.csv, manifest.json, plot.svg
solve     exact set ages of one network as CSV
simulate  Monte Carlo position ages of one network as CSV
bounds    one bound curve over a list of n as CSV
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from ..bounds import BOUND_KINDS, bound_curve
from ..errors import ConfigError, GossipError, NetworkError
from ..exact import solve_all
from ..network import NetworkSpec
from ..scenarios import build, mobility_slowdown
from ..simulate import SimConfig, simulate
from .config import PRESET_NAMES, load_config, preset

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _param(text):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def _network(args):
    if args.spec:
        return NetworkSpec.from_json(args.spec)
    if not args.scenario:
        raise ConfigError("give either --spec or --scenario")
    return build(args.scenario, **dict(args.param or []))


def _add_network_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--spec", help="network JSON file")
    g.add_argument("--scenario", help="builder name, e.g. toy or fc_plus_single")
    p.add_argument("--param", action="append", type=_param, metavar="KEY=VALUE",
                   help="builder parameter (repeatable), e.g. --param n=8")


def _cmd_run(args):
    from .run import run, write_outputs

    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of --config or --preset")
    cfg = load_config(args.config) if args.config else preset(args.preset)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = cfg.replace(workers=args.workers)
    if args.out:
        cfg = cfg.replace(output_dir=args.out)
    result = run(cfg)
    out = write_outputs(result, plot=False if args.no_plot else None)
    n_err = len(result.errors)
    print(f"{len(result.rows)} rows, {n_err} failed, written to {out}")
    return EXIT_PARTIAL if n_err else EXIT_OK


def _cmd_solve(args):
    table = solve_all(_network(args))
    if args.out:
        table.to_csv(args.out)
    if args.positions:
        table.positions_to_csv(args.positions)
    for i, v in enumerate(table.position_ages):
        print(f"v{i + 1} = {v:.12g}")
    print(f"mean = {table.mean_age:.12g}")
    return EXIT_OK


def _cmd_simulate(args):
    cfg = SimConfig(horizon=args.horizon, warmup=args.warmup, replications=args.replications, seed=args.seed)
    est = simulate(_network(args), cfg, workers=args.workers)
    if args.out:
        est.to_csv(args.out)
    if args.replications_out:
        est.replications_to_csv(args.replications_out)
    for i, (m, s) in enumerate(zip(est.per_position_mean, est.per_position_stderr)):
        print(f"v{i + 1} = {m:.6g} +- {s:.2g}")
    print(f"mean = {est.mean_age:.6g} +- {est.mean_stderr:.2g}")
    return EXIT_OK


def _cmd_bounds(args):
    f = args.f
    try:
        f = float(f)
    except (TypeError, ValueError):
        pass
    f_of_n = None if f is None else (lambda n: mobility_slowdown(f, n))
    curve = bound_curve(args.kind, args.n, args.lambda_e, args.lam, f_of_n)
    if args.out:
        curve.to_csv(args.out)
    for n, b in zip(curve.n_values, curve.bound_values):
        print(f"n={n} bound={b:.10g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gossip-mobility", description="Version age in gossip networks with mobility.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sweep from a config file or a preset")
    p.add_argument("--config", help="ScenarioConfig JSON (a manifest.json also works)")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="simulation seed (overrides the config)")
    p.add_argument("--workers", type=int, help="sweep points evaluated concurrently")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("solve", help="exact ages of every set")
    _add_network_args(p)
    p.add_argument("--out", help="CSV of all set ages")
    p.add_argument("--positions", help="CSV of singleton ages")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("simulate", help="simulated position ages")
    _add_network_args(p)
    p.add_argument("--horizon", type=float, default=2e5)
    p.add_argument("--warmup", type=float, default=None)
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="aggregate CSV")
    p.add_argument("--replications-out", help="per-replication CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bounds", help="evaluate a bound curve")
    p.add_argument("--kind", required=True, choices=BOUND_KINDS)
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--f", help="slowdown factor: a number, n, sqrt_n or log_n")
    p.add_argument("--lambda-e", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bounds)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, NetworkError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GossipError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
