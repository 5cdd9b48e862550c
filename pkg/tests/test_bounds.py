import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gossip_mobility.bounds import (
    BOUND_KINDS,
    EULER_GAMMA,
    bound_curve,
    disconnected_bound_recursion,
    disconnected_coefficients,
    disconnected_constant_bound,
    disconnected_scaling_bound,
    disconnected_top_age,
    fc_single_bound_recursion,
    fc_single_coefficients,
    fc_single_log_bound,
    fc_single_top_age,
    no_mobility_reference,
    toy_ages,
)
from gossip_mobility.errors import BadScale, NegativeRate
from gossip_mobility.exact import solve_all
from gossip_mobility.scenarios import disconnected_pairs, fc_plus_single, toy_network
from gossip_mobility.shapes import disconnected_pairs_ages, fc_plus_single_ages

from conftest import random_spec

LAMBDA_GRID = (0.0, 0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)


# -- toy closed forms -----------------------------------------------------


def test_toy_no_mobility():
    a = toy_ages("exchange_13", 1, 1, 0)
    assert (a.v1, a.v2, a.v3) == (2, 2, 1.5)
    assert toy_ages("none", 2, 1).as_array().tolist() == [4, 4, 3]


def test_toy_13_limit():
    a = toy_ages("exchange_13", 1, 1, 1e12)
    assert np.allclose(a.as_array(), [5 / 3, 2, 5 / 3], rtol=0, atol=1e-9)


def test_toy_12_limit():
    a = toy_ages("exchange_12", 1, 1, 1e12)
    assert np.allclose(a.as_array(), [29 / 15, 29 / 15, 8 / 5], rtol=0, atol=1e-9)


def test_toy_negative_rate():
    with pytest.raises(NegativeRate):
        toy_ages("13", 1, 1, -1)
    with pytest.raises(NegativeRate):
        toy_ages("12", 0, 1, 1)


@pytest.mark.parametrize("variant", ["none", "13", "12"])
@pytest.mark.parametrize("lm", LAMBDA_GRID)
def test_toy_closed_forms_match_solver(variant, lm):
    closed = toy_ages(variant, 1.0, 1.0, lm).as_array()
    exact = solve_all(toy_network(variant, 1.0, 1.0, lm)).position_ages
    assert np.allclose(closed, exact, rtol=1e-9, atol=0)


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0, 1e4))
def test_toy_closed_forms_any_rates(le, lam, lm):
    for variant in ("13", "12"):
        closed = toy_ages(variant, le, lam, lm).as_array()
        exact = solve_all(toy_network(variant, le, lam, lm)).position_ages
        assert np.allclose(closed, exact, rtol=1e-9, atol=0)


def test_variant_13_properties():
    prev_gap = math.inf
    for lm in LAMBDA_GRID:
        a = toy_ages("13", 1, 1, lm)
        assert a.v2 == 2.0
        gap = abs(a.v1 - a.v3)
        assert gap <= prev_gap
        prev_gap = gap
    assert prev_gap < 1e-3
    # position 3 gets worse with fast swaps
    assert toy_ages("13", 1, 1, 1000).v3 > toy_ages("13", 1, 1, 0).v3


def test_average_ordering_fast_mobility():
    m13 = toy_ages("13", 1, 1, 1e12).mean
    m12 = toy_ages("12", 1, 1, 1e12).mean
    m0 = toy_ages("none", 1, 1, 1e12).mean
    assert m13 < m12 < m0
    assert m13 == pytest.approx(16 / 9, abs=1e-9)
    assert m12 == pytest.approx(82 / 45, abs=1e-9)
    assert m0 == pytest.approx(11 / 6, abs=1e-15)


# -- fc plus single -------------------------------------------------------


@pytest.mark.parametrize("n", [4, 8, 50, 512])
def test_fc_prefix_products_at_most_one(n):
    co = fc_single_coefficients(n)
    assert np.all(np.cumprod(co["y"] / co["z"]) <= 1.0)
    assert np.all(co["z"] > 0)


@pytest.mark.parametrize("n", [6, 8, 10, 12])
def test_fc_bound_dominates_exact(n):
    exact = solve_all(fc_plus_single(n)).position_ages[:-1].mean()
    assert fc_single_bound_recursion(n) >= exact


@pytest.mark.parametrize("n", [16, 64, 256, 1024])
def test_fc_bound_dominates_shape_solution(n):
    assert fc_single_bound_recursion(n) >= fc_plus_single_ages(n)[(1, 0)]


def test_fc_top_age_matches_solver():
    t = solve_all(fc_plus_single(7, 1.5, 0.5))
    assert fc_single_top_age(7, 1.5, 0.5) == pytest.approx(t[(1 << 6) - 1], rel=1e-12)


def test_fc_log_bound_formula():
    n = 100
    expected = 2.5 * math.log(n) + fc_single_top_age(n) + 2.5 * EULER_GAMMA + 1.25
    assert fc_single_log_bound(n) == pytest.approx(expected, rel=1e-15)


def test_fc_log_bound_dominates_recursion():
    for n in (8, 16, 32, 64, 128, 256, 512):
        assert fc_single_log_bound(n) >= fc_single_bound_recursion(n)


def test_fc_log_bound_doubling_growth():
    for n in (4, 16, 100, 1000):
        growth = fc_single_log_bound(2 * n) - fc_single_log_bound(n)
        assert growth <= 2.5 * math.log(2) + 1e-3


def test_fc_log_bound_ratio_tends_to_slope():
    r = [fc_single_log_bound(n) / math.log(n) for n in (64, 256, 1024, 4096, 10000)]
    assert all(a > b for a, b in zip(r, r[1:]))
    assert r[-1] < 3.0


def test_fc_bounds_scale_with_lambda_e():
    assert fc_single_bound_recursion(20, 3.0, 1.0) == pytest.approx(3 * fc_single_bound_recursion(20), rel=1e-12)
    assert fc_single_log_bound(20, 3.0, 2.0) == pytest.approx(1.5 * fc_single_log_bound(20), rel=1e-12)


def test_fc_bad_scale():
    with pytest.raises(BadScale):
        fc_single_bound_recursion(3)
    with pytest.raises(BadScale):
        fc_single_log_bound(2)


# -- disconnected pairs ---------------------------------------------------


@pytest.mark.parametrize("n, f", [(6, 1.0), (16, 4.0), (64, 64.0), (200, math.sqrt(200))])
def test_disconnected_coefficients(n, f):
    co = disconnected_coefficients(n, 1.0, f)
    assert len(co["a"]) == n // 2 - 2
    assert np.all(co["y"] <= 1.0)
    assert np.all(co["f"] > 0) and np.all(co["g"] > 0)


def test_disconnected_top_age_matches_solver():
    t = solve_all(disconnected_pairs(8, 1.0, 1.0, 0.25))
    assert disconnected_top_age(8, 1.0, 1.0, 0.25) == pytest.approx(t[(1 << 6) - 1], rel=1e-12)


@pytest.mark.parametrize("n", [8, 16, 32, 64, 128, 256])
def test_disconnected_bounds_dominate_exact_f_n(n):
    exact = disconnected_pairs_ages(n, 1.0, 1.0, 1.0 / n)[(0, 1)]
    assert disconnected_bound_recursion(n, 1, 1, n) >= exact
    assert disconnected_scaling_bound(n, 1, 1, n) >= exact


def test_scaling_bound_formula():
    n = 100
    C = disconnected_top_age(n, 1, 1, 1 / n)
    expected = 1 + 1.5 * (math.sqrt(math.pi) / 2) * math.sqrt(n) + C
    assert disconnected_scaling_bound(n, 1, 1, n) == pytest.approx(expected, rel=1e-15)
    C = disconnected_top_age(n, 1, 1, 1 / 3)
    assert disconnected_scaling_bound(n, 1, 1, 3) == pytest.approx(1 + 4.5 + C, rel=1e-15)


def test_scaling_bound_sqrt_regime():
    # for f = sqrt(n) the scaling term is (3/2)(sqrt(pi)/2) sqrt(n) up to lower order terms
    for n in (1024, 4096, 16384):
        f = math.sqrt(n)
        term = disconnected_scaling_bound(n, 1, 1, f) - 1 - disconnected_top_age(n, 1, 1, 1 / f)
        assert term == pytest.approx(1.5 * min(f, math.sqrt(math.pi * n) / 2), rel=1e-12)


def test_scaling_bound_log_regime_grows_logarithmically():
    ns = np.array([64, 256, 1024, 4096])
    b = np.array([disconnected_scaling_bound(int(n), 1, 1, math.log(n)) for n in ns])
    slope = np.polyfit(np.log(ns), b, 1)[0]
    assert 1.0 < slope < 2.5


def test_constant_bound_formula():
    C = disconnected_top_age(20, 1, 1, 1 / 4)
    assert disconnected_constant_bound(20, 1, 1, 4) == pytest.approx(1 + 6 + C + 1.5, rel=1e-15)


def test_smallest_disconnected_input():
    v = disconnected_scaling_bound(6, 1, 1, 1)
    assert math.isfinite(v) and v > 0


def test_disconnected_bad_scale():
    for n in (4, 7):
        with pytest.raises(BadScale):
            disconnected_bound_recursion(n, 1, 1, 1)
    with pytest.raises(BadScale):
        disconnected_scaling_bound(8, 1, 1, 0)


# -- curves ---------------------------------------------------------------


def test_bound_curve_csv(tmp_path):
    c = bound_curve("disconnected_recursion", [8, 16], f_of_n=lambda n: n)
    assert c.f_values == (8.0, 16.0)
    assert all(v > 0 and math.isfinite(v) for v in c.bound_values)
    c.to_csv(tmp_path / "b.csv")
    rows = list(csv.reader(open(tmp_path / "b.csv")))
    assert rows[0] == ["n", "bound", "kind", "f_of_n"]
    assert rows[1][0] == "8" and rows[1][2] == "disconnected_recursion" and rows[1][3] == "8.0"
    c = bound_curve("fc_single_log_closed_form", [8])
    c.to_csv(tmp_path / "c.csv")
    assert list(csv.reader(open(tmp_path / "c.csv")))[1][3] == ""
    with pytest.raises(ValueError):
        bound_curve("other", [8])
    assert len(BOUND_KINDS) == 5


# -- mobility-free reference ----------------------------------------------


def test_no_mobility_reference_toy():
    t = no_mobility_reference(toy_network("13", 2.0, 1.0, 5.0))
    assert np.allclose(t.position_ages, [4, 4, 3], rtol=1e-15)


@pytest.mark.parametrize("n", [4, 32, 500])
def test_no_mobility_reference_pairs_linear(n):
    t = no_mobility_reference(disconnected_pairs(n, 1.0, 1.0, 0.3))
    expected = (1 + 1 * (n / 2)) / (1 / n + 1)
    assert t.position_ages[0] == pytest.approx(expected, rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_no_mobility_reference_matches_solver(seed, n):
    spec = random_spec(np.random.default_rng(seed), n, mobility=False)
    ref = no_mobility_reference(spec)
    t = solve_all(spec)
    for S in ref.level_ages:
        assert ref[S] == pytest.approx(t[S], rel=1e-12)
