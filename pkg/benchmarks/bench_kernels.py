"""Compiled kernels against the pure-numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--n-dense 13] [--n-sweep 16]

Every case is run once untimed first so JIT compilation is not counted.
"""
import argparse
import time

import numpy as np

from gossip_mobility import _level_kernels as lk
from gossip_mobility import _sim_kernels as sk
from gossip_mobility._backend import NUMBA_AVAILABLE
from gossip_mobility.exact import solve_all
from gossip_mobility.scenarios import disconnected_pairs, fc_plus_single
from gossip_mobility.simulate import SimConfig, simulate


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def on_backend(use_numba, fn):
    old = lk.USE_NUMBA, sk.USE_NUMBA
    lk.USE_NUMBA = sk.USE_NUMBA = use_numba
    try:
        return fn()
    finally:
        lk.USE_NUMBA, sk.USE_NUMBA = old


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-dense", type=int, default=13)
    ap.add_argument("--n-sweep", type=int, default=14)
    ap.add_argument("--sim-n", type=int, default=64)
    ap.add_argument("--sim-horizon", type=float, default=200.0)
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    dense_spec = fc_plus_single(args.n_dense)
    sweep_spec = fc_plus_single(args.n_sweep)
    sim_spec = disconnected_pairs(args.sim_n, 1.0, 1.0, 1.0 / args.sim_n)
    sim_cfg = SimConfig(horizon=args.sim_horizon, replications=1, seed=0)
    cases = [
        (f"dense levels, fc_plus_single({args.n_dense})", lambda: solve_all(dense_spec).position_ages),
        (f"iterative levels, fc_plus_single({args.n_sweep})",
         lambda: solve_all(sweep_spec, dense_limit=64).position_ages),
        (f"event loop, disconnected_pairs({args.sim_n}) T={args.sim_horizon:g}",
         lambda: simulate(sim_spec, sim_cfg).per_position_mean),
    ]
    print(f"{'case':<52} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  agree")
    for name, fn in cases:
        t_fast, a = on_backend(True, lambda: best_of(fn, args.repeat))
        t_slow, b = on_backend(False, lambda: best_of(fn, 1))
        agree = np.allclose(a, b, rtol=1e-9)
        print(f"{name:<52} {t_fast:>10.4f} {t_slow:>10.4f} {t_slow / t_fast:>8.1f}  {agree}")
    events = simulate(sim_spec, sim_cfg).event_counts.sum()
    print(f"\nevent loop: {events} events per run")


if __name__ == "__main__":
    main()
