"""Closed forms for the toy networks and upper bounds for the two scaling families.

The bound recursions are evaluated exactly as derived (coefficients included);
the boundary constants they need are computed exactly from the top
cardinality levels of the corresponding network.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BadScale, NegativeRate, SingularLevelSystem
from .exact import AgeTable, SetAges
from .network import NetworkSpec, set_members, validate
from .scenarios import normalize_toy_variant
from .shapes import disconnected_pairs_ages, fc_plus_single_ages

EULER_GAMMA = 0.5772156649015329

BOUND_KINDS = (
    "fc_single_exact_recursion",
    "fc_single_log_closed_form",
    "disconnected_recursion",
    "disconnected_sqrt_closed_form",
    "disconnected_constant_regime",
)


# -- toy network ----------------------------------------------------------


@dataclass(frozen=True)
class ToyAges:
    v1: float
    v2: float
    v3: float
    variant: str

    @property
    def mean(self) -> float:
        return (self.v1 + self.v2 + self.v3) / 3

    def as_array(self) -> np.ndarray:
        return np.array([self.v1, self.v2, self.v3])


def toy_ages(variant, lambda_e=1.0, lam=1.0, lambda_m=0.0) -> ToyAges:
    """Closed-form position ages of the three-position toy network.

    ``variant`` is ``"none"``, ``"13"`` (nodes at 1 and 3 swap) or ``"12"``
    (nodes at 1 and 2 swap); ``"exchange_13"`` style names are accepted too.
    """
    variant = normalize_toy_variant(variant)
    if lambda_e <= 0 or lam <= 0 or lambda_m < 0:
        raise NegativeRate("toy ages need lambda_e, lam > 0 and lambda_m >= 0")
    r = lambda_e / lam
    m = lambda_m
    if variant == "none":
        return ToyAges(2 * r, 2 * r, 1.5 * r, variant)
    if variant == "13":
        den = lam / 2 + 1.5 * m
        return ToyAges(
            r * (lam + 2.5 * m) / den,
            2 * r,
            r * (0.75 * lam + 2.5 * m) / den,
            variant,
        )
    bracket = (
        5.0 / 3.0
        + (2 * lam + 3 * m) / (1.5 * lam + 2.5 * m)
        + m / (lam / 2 + m)
    )
    v2 = r * (lam / 2 + m) / (0.75 * lam + 2 * m) * bracket
    v1 = lambda_e / (lam / 2 + m) + r * m / (0.75 * lam + 2 * m) * bracket
    v3 = r * (4.5 * lam + 8 * m) / (3 * lam + 5 * m)
    return ToyAges(v1, v2, v3, variant)


# -- fully connected block plus one isolated position ---------------------


def _check_fc(n):
    if n < 4:
        raise BadScale(f"the fc-plus-single bound needs n >= 4, got {n}")


def fc_single_coefficients(n: int, lam: float = 1.0) -> dict:
    """Arrays ``c, d, x, y, z`` indexed by ``a - 1`` for ``a = 1 .. n-2``."""
    _check_fc(n)
    a = np.arange(1, n - 1, dtype=np.float64)
    c = (a - 1) * lam / (2 * (n - 1)) + lam / 2 + (a - 1) * (n - a - 2) * lam / (n - 2) + (n - a - 2) * lam
    d = a * lam / (2 * (n - 1)) + a * (n - a - 1) * lam / (n - 2) + a * lam
    x = c + a * lam
    y = a * (n - a - 1) * lam * c / (n - 2) + a * (a - 1) * (n - a - 2) * lam**2 / (n - 2)
    z = c * d - (n - a - 2) * a * lam**2
    return {"a": a, "c": c, "d": d, "x": x, "y": y, "z": z}


def fc_single_top_age(n: int, lambda_e: float = 1.0, lam: float = 1.0, lambda_m: Optional[float] = None) -> float:
    """Exact age of the whole fully connected block (the recursion's boundary)."""
    ages = fc_plus_single_ages(n, lambda_e, lam, lambda_m, min_size=n - 1)
    return ages[(n - 1, 0)]


def fc_single_bound_recursion(n: int, lambda_e: float = 1.0, lam: float = 1.0) -> float:
    """Upper bound on the age of one block position, chained from the full block down."""
    co = fc_single_coefficients(n, lam)
    ratio = co["y"] / co["z"]
    prefix = np.concatenate(([1.0], np.cumprod(ratio)[:-1]))
    total = lambda_e * math.fsum(co["x"] / co["z"] * prefix)
    return total + float(np.prod(ratio)) * fc_single_top_age(n, lambda_e, lam)


def fc_single_log_bound(n: int, lambda_e: float = 1.0, lam: float = 1.0) -> float:
    """Logarithmic relaxation ``(5/2) r log n + C'`` of the recursion, ``r = lambda_e / lam``."""
    _check_fc(n)
    r = lambda_e / lam
    const = fc_single_top_age(n, lambda_e, lam) + 2.5 * EULER_GAMMA * r + 1.25 * r
    return 2.5 * r * math.log(n) + const


# -- disconnected pairs with full mobility --------------------------------


def _check_pairs(n, f_of_n):
    if n < 6 or n % 2:
        raise BadScale(f"the disconnected bound needs an even n >= 6, got {n}")
    if not f_of_n > 0:
        raise BadScale(f"slowdown factor must be positive, got {f_of_n}")


def disconnected_coefficients(n: int, lam: float, f_of_n: float) -> dict:
    """Arrays ``b, c, d, f, g, x, y`` indexed by ``a - 1`` for ``a = 1 .. n/2 - 2``.

    ``f`` and ``g`` are the correction factors ``1 - (...)/c`` and
    ``1 - (...)/d``; swap rate is ``lam / f_of_n``.
    """
    _check_pairs(n, f_of_n)
    mu = lam / f_of_n
    a = np.arange(1, n // 2 - 1, dtype=np.float64)
    swaps_out = 2 * a * (n - 2 * a) * mu
    b = 2 * a * lam / n + swaps_out
    c = (2 * a + 1) * lam / n + lam + 2 * a * (n - 2 * (a + 1)) * mu
    d = 2 * a * lam / n + 2 * lam + 2 * mu + 2 * (a - 1) * (n - 2 * (a + 1)) * mu
    f_corr = 1 - 2 * a * (n - 2 * (a + 1)) * mu / c
    g_corr = 1 - 2 * (a - 1) * (n - 2 * (a + 1)) * mu / d
    x = 1 / b + swaps_out / (b * d * g_corr) + 2 * swaps_out * lam / (b * c * d * f_corr * g_corr)
    y = 2 * swaps_out * lam**2 / (b * c * d * f_corr * g_corr)
    return {"a": a, "b": b, "c": c, "d": d, "f": f_corr, "g": g_corr, "x": x, "y": y}


def disconnected_top_age(n: int, lambda_e: float, lam: float, lambda_m: float) -> float:
    """Exact age of the set of all pairs but one (the recursion's boundary)."""
    ages = disconnected_pairs_ages(n, lambda_e, lam, lambda_m, min_size=n - 2)
    return ages[(n // 2 - 1, 0)]


def disconnected_bound_recursion(n: int, lambda_e: float = 1.0, lam: float = 1.0, f_of_n: float = 1.0) -> float:
    """Upper bound on one position's age with swap rate ``lam / f_of_n``."""
    co = disconnected_coefficients(n, lam, f_of_n)
    alpha = np.concatenate(([1.0], np.cumprod(co["y"])[:-1]))
    C = disconnected_top_age(n, lambda_e, lam, lam / f_of_n)
    return lambda_e / lam + lambda_e * math.fsum(co["x"] * alpha) + C


def disconnected_scaling_bound(n: int, lambda_e: float = 1.0, lam: float = 1.0, f_of_n: float = 1.0) -> float:
    """``r (1 + 1.5 min(f, sqrt(pi n)/2)) + C`` with ``r = lambda_e / lam``."""
    _check_pairs(n, f_of_n)
    r = lambda_e / lam
    C = disconnected_top_age(n, lambda_e, lam, lam / f_of_n)
    return r * (1 + 1.5 * min(f_of_n, math.sqrt(math.pi) / 2 * math.sqrt(n))) + C


def disconnected_constant_bound(n: int, lambda_e: float = 1.0, lam: float = 1.0, k: float = 1.0) -> float:
    """Bound ``r + 1.5 r k + C'`` for a constant slowdown ``k``, with ``C' = C + 1.5 r``."""
    _check_pairs(n, k)
    r = lambda_e / lam
    C = disconnected_top_age(n, lambda_e, lam, lam / k)
    return r + 1.5 * r * k + C + 1.5 * r


# -- curves ---------------------------------------------------------------


@dataclass(frozen=True)
class BoundCurve:
    n_values: tuple
    bound_values: tuple
    kind: str
    f_values: tuple = ()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "bound", "kind", "f_of_n"])
            fs = self.f_values or ("",) * len(self.n_values)
            for n, b, f in zip(self.n_values, self.bound_values, fs):
                w.writerow([n, repr(float(b)), self.kind, "" if f == "" else repr(float(f))])


def bound_curve(kind: str, n_values: Sequence[int], lambda_e=1.0, lam=1.0, f_of_n=None) -> BoundCurve:
    """Evaluate one bound kind over ``n_values``.

    ``f_of_n`` is a callable ``n -> f`` (or a constant) for the disconnected kinds.
    """
    if kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    values, fs = [], []
    for n in n_values:
        if kind.startswith("fc_single"):
            fn = fc_single_bound_recursion if kind == "fc_single_exact_recursion" else fc_single_log_bound
            values.append(fn(n, lambda_e, lam))
            continue
        f = f_of_n(n) if callable(f_of_n) else float(f_of_n)
        fs.append(f)
        fn = {
            "disconnected_recursion": disconnected_bound_recursion,
            "disconnected_sqrt_closed_form": disconnected_scaling_bound,
            "disconnected_constant_regime": disconnected_constant_bound,
        }[kind]
        values.append(fn(n, lambda_e, lam, f))
    return BoundCurve(tuple(int(n) for n in n_values), tuple(values), kind, tuple(fs))


# -- mobility-free reference ----------------------------------------------


def no_mobility_reference(spec: NetworkSpec) -> AgeTable:
    """Set ages with mobility removed, by direct memoized recursion.

    Without swaps a set depends only on itself plus one gossiping neighbour,
    so no linear systems are needed and only sets reachable from singletons
    are visited. Independent of :mod:`gossip_mobility.exact`; used as its
    oracle at zero swap rate.
    """
    spec = validate(spec)
    G = spec.gossip_rates
    src = spec.source_rates
    le = spec.lambda_e
    memo = {}
    inflow_cache = {}

    def inflow(S):
        if S not in inflow_cache:
            idx = list(set_members(S))
            rates = G[:, idx].sum(axis=1)
            rates[idx] = 0.0
            nbrs = [int(i) for i in np.flatnonzero(rates > 0)]
            inflow_cache[S] = (math.fsum(src[idx]), [(i, float(rates[i])) for i in nbrs])
        return inflow_cache[S]

    for i in range(spec.n):
        stack = [1 << i]
        while stack:
            S = stack[-1]
            if S in memo:
                stack.pop()
                continue
            src_in, nbrs = inflow(S)
            pending = [S | (1 << j) for j, _ in nbrs if (S | (1 << j)) not in memo]
            if pending:
                stack.extend(pending)
                continue
            num = le
            den = src_in
            for j, rate in nbrs:
                num += rate * memo[S | (1 << j)]
                den += rate
            if den <= 0:
                raise SingularLevelSystem(f"set {S:#x} receives no information without mobility")
            memo[S] = num / den
            del inflow_cache[S]
            stack.pop()
    positions = np.array([memo[1 << i] for i in range(spec.n)])
    return AgeTable(spec.n, le, SetAges(memo, spec.n), positions)
