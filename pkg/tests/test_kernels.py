import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gossip_mobility import _level_kernels as lk
from gossip_mobility import _sim_kernels as sk
from gossip_mobility._backend import NUMBA_AVAILABLE
from gossip_mobility.exact import solve_all
from gossip_mobility.scenarios import disconnected_pairs, fc_plus_single, toy_variant_12
from gossip_mobility.shapes import disconnected_pairs_ages
from gossip_mobility.simulate import SimConfig, simulate

from conftest import random_spec

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


@pytest.mark.parametrize("n, k", [(1, 1), (5, 0), (6, 3), (10, 4), (12, 12)])
def test_level_masks_agree(n, k):
    count = math.comb(n, k)
    a = lk.level_masks_loop(n, k, count)
    b = lk.level_masks_numpy(n, k, count)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) > 0)


def _level_inputs(spec, k):
    n = spec.n
    full = solve_all(spec)
    upper = np.full(1 << n, np.nan)
    for S in range(1, 1 << n):
        upper[S] = full[S]
    masks = lk.level_masks_numpy(n, k, math.comb(n, k))
    return masks, upper, lk.binomial_table(n)


@needs_numba
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.data())
def test_assembly_and_elimination_agree(seed, n, data):
    spec = random_spec(np.random.default_rng(seed), n)
    k = data.draw(st.integers(1, n - 1))
    masks, upper, binom = _level_inputs(spec, k)
    args = (n, masks, upper, spec.source_rates, spec.gossip_rates, spec.mobility_rates, spec.lambda_e, binom, True)
    fast = lk._assemble_jit(*args)
    slow = lk.assemble_level_numpy(*args)
    for a, b in zip(fast, slow):
        assert np.allclose(a, b, rtol=1e-14, atol=1e-300)
    excess, rhs, mob, off = fast
    x1, bad1 = lk._eliminate_jit(off.copy(), excess, rhs)
    x2, bad2 = lk.eliminate_numpy(off.copy(), excess, rhs)
    assert bad1 == bad2 == -1
    A = off + np.diag(excess + mob)
    x3 = np.linalg.solve(A, rhs)
    assert np.allclose(x1, x3, rtol=1e-10) and np.allclose(x2, x3, rtol=1e-10)
    assert np.allclose(x1, [solve_all(spec)[int(S)] for S in masks], rtol=1e-10)


@needs_numba
def test_sweeps_agree():
    spec = fc_plus_single(9)
    masks, upper, binom = _level_inputs(spec, 4)
    n = spec.n
    excess, rhs, mob, _ = lk.assemble_level_numpy(
        n, masks, upper, spec.source_rates, spec.gossip_rates, spec.mobility_rates, 1.0, binom, False
    )
    diag = excess + mob
    args = (n, masks, rhs, diag, spec.mobility_rates, binom)
    gs, s1, w1 = lk._sweep_jit(*args, rhs / diag, 1e-13, 100000, 1.0)
    jac, s2, w2 = lk.sweep_level_numpy(*args, rhs / diag, 1e-13, 100000, 1.0)
    expected = [solve_all(spec)[int(S)] for S in masks]
    assert np.allclose(gs, expected, rtol=1e-10)
    assert np.allclose(jac, expected, rtol=1e-10)
    assert s1 <= s2


def test_eliminate_reports_zero_pivot():
    off = np.zeros((2, 2))
    x, bad = lk.eliminate_numpy(off, np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    assert bad == 1


@needs_numba
def test_event_samplers_agree():
    from gossip_mobility.simulate import event_sampler, replication_rng

    s = event_sampler(fc_plus_single(7))
    a = s.sample(replication_rng(4, 0), 5000, use_numba=True)
    b = s.sample(replication_rng(4, 0), 5000, use_numba=False)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_env_flag_selects_fallback():
    code = (
        "from gossip_mobility import backend_name, solve_all, simulate, SimConfig\n"
        "from gossip_mobility.scenarios import toy_variant_12\n"
        "t = solve_all(toy_variant_12(1, 1, 3))\n"
        "e = simulate(toy_variant_12(1, 1, 3), SimConfig(horizon=200, replications=2, seed=5))\n"
        "print(backend_name(), repr(t.mean_age), repr(e.mean_age))\n"
    )
    env = dict(os.environ, GOSSIP_MOBILITY_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    name, mean, sim_mean = out.split()
    assert name == "numpy"
    t = solve_all(toy_variant_12(1, 1, 3))
    assert float(mean) == pytest.approx(t.mean_age, rel=1e-14)
    e = simulate(toy_variant_12(1, 1, 3), SimConfig(horizon=200, replications=2, seed=5))
    assert float(sim_mean) == e.mean_age


def test_numpy_backend_fixture_routes_solver(numpy_backend):
    assert not lk.USE_NUMBA and not sk.USE_NUMBA
    t = solve_all(disconnected_pairs(6, 1, 1, 0.5), dense_limit=5)
    expected = disconnected_pairs_ages(6, 1, 1, 0.5)[(0, 1)]
    assert t.position_ages[0] == pytest.approx(expected, rel=1e-10)
