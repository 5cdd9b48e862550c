"""Exact set ages for the symmetric builder families, solved over set shapes.

In the fully connected, fc-plus-single and disconnected-pairs families every
set of a given *shape* has the same age, so the level systems collapse to a
handful of unknowns. Within a level the shapes form a chain (swaps only move
to adjacent shapes), which is solved by excess-preserving elimination.
Results equal :func:`gossip_mobility.exact.solve_all` on the same network
but scale to thousands of positions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import BadScale, SingularLevelSystem

Shape = Tuple[int, int]


def chain_solve(lower: Sequence[float], upper: Sequence[float], excess, rhs) -> np.ndarray:
    """Solve ``(e_r + l_r + u_r) x_r - l_r x_{r-1} - u_r x_{r+1} = b_r``.

    ``lower[0]`` and ``upper[-1]`` must be zero.
    """
    m = len(rhs)
    e = [float(v) for v in excess]
    b = [float(v) for v in rhs]
    piv = [0.0] * m
    for k in range(m):
        d = e[k] + upper[k]
        if not d > 0:
            raise SingularLevelSystem(f"shape chain has a zero pivot at position {k}")
        piv[k] = d
        if k + 1 < m and lower[k + 1] > 0:
            f = lower[k + 1] / d
            e[k + 1] += f * e[k]
            b[k + 1] += f * b[k]
    x = np.zeros(m)
    for k in range(m - 1, -1, -1):
        nxt = x[k + 1] if k + 1 < m else 0.0
        x[k] = (b[k] + upper[k] * nxt) / piv[k]
    return x


@dataclass(frozen=True)
class ShapeAges:
    """Ages indexed by set shape ``(alpha, beta)``; meaning of the counts is family specific."""

    n: int
    family: str
    ages: Dict[Shape, float]

    def __getitem__(self, shape: Shape) -> float:
        return self.ages[shape]


def fully_connected_ages(n, lambda_e=1.0, lam=1.0) -> np.ndarray:
    """``v[k]`` is the age of any ``k``-set (index 0 unused).

    Swaps between equally treated positions never change a set's shape, so
    the result holds for every swap rate.
    """
    if n < 2:
        raise BadScale(f"n must be >= 2, got {n}")
    v = np.full(n + 1, np.nan)
    v[n] = lambda_e / lam
    for k in range(n - 1, 0, -1):
        g = k * (n - k) * lam / (n - 1)
        v[k] = (lambda_e + g * v[k + 1]) / (k * lam / n + g)
    return v


def fc_plus_single_ages(n, lambda_e=1.0, lam=1.0, lambda_m=None, min_size=1) -> ShapeAges:
    """Shape ages of :func:`~gossip_mobility.scenarios.fc_plus_single`.

    Shape ``(alpha, beta)``: ``alpha`` block positions, ``beta`` in {0, 1}
    marks the isolated position.
    """
    if n < 3:
        raise BadScale(f"n must be >= 3, got {n}")
    mu = lam if lambda_m is None else lambda_m
    src_block = lam / (2 * (n - 1))
    v: Dict[Shape, float] = {(n - 1, 1): lambda_e / lam}

    def gossip_in(a):
        return a * (n - 1 - a) * lam / (n - 2)

    for k in range(n - 1, max(min_size, 1) - 1, -1):
        # unknowns in chain order: (k, 0) then (k-1, 1)
        g0 = gossip_in(k)
        g1 = gossip_in(k - 1)
        ex0 = k * src_block + g0
        ex1 = (k - 1) * src_block + lam / 2 + g1
        b0 = lambda_e + (g0 * v[(k + 1, 0)] if g0 > 0 else 0.0)
        b1 = lambda_e + (g1 * v[(k, 1)] if g1 > 0 else 0.0)
        x = chain_solve([0.0, (n - k) * mu], [k * mu, 0.0], [ex0, ex1], [b0, b1])
        v[(k, 0)], v[(k - 1, 1)] = float(x[0]), float(x[1])
    return ShapeAges(n, "fc_plus_single", v)


def disconnected_pairs_ages(n, lambda_e=1.0, lam=1.0, lambda_m=0.0, min_size=1) -> ShapeAges:
    """Shape ages of :func:`~gossip_mobility.scenarios.disconnected_pairs`.

    Shape ``(alpha, beta)``: ``alpha`` complete pairs and ``beta`` positions
    whose partner is outside the set.
    """
    if n < 2 or n % 2:
        raise BadScale(f"n must be even and >= 2, got {n}")
    half = n // 2
    mu = lambda_m
    v: Dict[Shape, float] = {(half, 0): lambda_e / lam}
    for k in range(n - 1, max(min_size, 1) - 1, -1):
        shapes = [(a, k - 2 * a) for a in range(max(0, k - half), k // 2 + 1)]
        lower, upper, excess, rhs = [], [], [], []
        for a, b in shapes:
            empty = n - 2 * a - 2 * b
            excess.append(k * lam / n + b * lam)
            rhs.append(lambda_e + (b * lam * v[(a + 1, b - 1)] if b else 0.0))
            lower.append(2 * a * empty * mu)
            upper.append(b * (b - 1) * mu)
        x = chain_solve(lower, upper, excess, rhs)
        for shape, val in zip(shapes, x):
            v[shape] = float(val)
    return ShapeAges(n, "disconnected_pairs", v)
