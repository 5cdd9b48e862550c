"""Builders for the named network families.

Every builder returns a validated network whose source rates add up to the
family's total source rate ``lam``. Gossip totals are split evenly over a
position's out-neighbours.
"""
from __future__ import annotations

import math
from typing import Callable, Dict, Optional

import numpy as np

from .errors import BadScale, ConfigError
from .network import NetworkSpec, ValidatedNetwork, validate

TOY_VARIANTS = ("none", "13", "12")


def _toy(lambda_e, lam, lambda_m, swap):
    # source feeds 1 and 3; 1 gossips to 2 and 3, 3 gossips to 2
    source = np.array([lam / 2, 0.0, lam / 2])
    gossip = np.zeros((3, 3))
    gossip[0, 1] = lam / 2
    gossip[0, 2] = lam / 2
    gossip[2, 1] = lam
    mobility = np.zeros((3, 3))
    if swap is not None:
        a, b = swap
        mobility[a, b] = mobility[b, a] = lambda_m
    return validate(NetworkSpec(3, lambda_e, source, gossip, mobility))


def toy_variant_13(lambda_e=1.0, lam=1.0, lambda_m=1.0) -> ValidatedNetwork:
    """Three-position toy network where the nodes at positions 1 and 3 swap."""
    return _toy(lambda_e, lam, lambda_m, (0, 2))


def toy_variant_12(lambda_e=1.0, lam=1.0, lambda_m=1.0) -> ValidatedNetwork:
    """Three-position toy network where the nodes at positions 1 and 2 swap."""
    return _toy(lambda_e, lam, lambda_m, (0, 1))


def toy_network(variant="none", lambda_e=1.0, lam=1.0, lambda_m=0.0) -> ValidatedNetwork:
    variant = normalize_toy_variant(variant)
    if variant == "13":
        return toy_variant_13(lambda_e, lam, lambda_m)
    if variant == "12":
        return toy_variant_12(lambda_e, lam, lambda_m)
    return _toy(lambda_e, lam, 0.0, None)


def normalize_toy_variant(variant) -> str:
    v = str(variant).lower().replace("exchange_", "")
    if v not in TOY_VARIANTS:
        raise ConfigError(f"unknown toy variant {variant!r}; expected one of {TOY_VARIANTS}")
    return v


def fully_connected(n, lambda_e=1.0, lam=1.0, full_mobility=False, lambda_m=0.0) -> ValidatedNetwork:
    """Every position gossips to every other at ``lam/(n-1)``; source feeds each at ``lam/n``."""
    n = int(n)
    if n < 2:
        raise BadScale(f"fully_connected needs n >= 2, got {n}")
    gossip = np.full((n, n), lam / (n - 1))
    np.fill_diagonal(gossip, 0.0)
    mobility = np.zeros((n, n))
    if full_mobility:
        mobility[:] = lambda_m
        np.fill_diagonal(mobility, 0.0)
    return validate(NetworkSpec(n, lambda_e, np.full(n, lam / n), gossip, mobility))


def fc_plus_single(n, lambda_e=1.0, lam=1.0, lambda_m: Optional[float] = None) -> ValidatedNetwork:
    """Fully connected block of ``n-1`` positions plus one isolated position ``n``.

    The source splits ``lam`` evenly between the block and the isolated
    position. The isolated position swaps with every block position at
    ``lambda_m`` (defaults to ``lam``).
    """
    n = int(n)
    if n < 3:
        raise BadScale(f"fc_plus_single needs n >= 3, got {n}")
    if lambda_m is None:
        lambda_m = lam
    source = np.full(n, lam / (2 * (n - 1)))
    source[-1] = lam / 2
    gossip = np.zeros((n, n))
    gossip[: n - 1, : n - 1] = lam / (n - 2)
    np.fill_diagonal(gossip, 0.0)
    mobility = np.zeros((n, n))
    mobility[: n - 1, n - 1] = lambda_m
    mobility[n - 1, : n - 1] = lambda_m
    return validate(NetworkSpec(n, lambda_e, source, gossip, mobility))


def disconnected_pairs(n, lambda_e=1.0, lam=1.0, lambda_m=0.0) -> ValidatedNetwork:
    """1-regular gossip graph: positions (1,2), (3,4), ... gossip only within their pair.

    Every pair of positions swaps at ``lambda_m`` (full mobility).
    """
    n = int(n)
    if n < 2 or n % 2:
        raise BadScale(f"disconnected_pairs needs an even n >= 2, got {n}")
    gossip = np.zeros((n, n))
    idx = np.arange(0, n, 2)
    gossip[idx, idx + 1] = lam
    gossip[idx + 1, idx] = lam
    mobility = np.full((n, n), float(lambda_m))
    np.fill_diagonal(mobility, 0.0)
    return validate(NetworkSpec(n, lambda_e, np.full(n, lam / n), gossip, mobility))


def mobility_slowdown(f_of_n, n) -> float:
    """Evaluate a slowdown factor given as a number or one of ``n``, ``sqrt_n``, ``log_n``."""
    if isinstance(f_of_n, (int, float)):
        return float(f_of_n)
    table = {"n": float(n), "sqrt_n": math.sqrt(n), "log_n": math.log(n)}
    try:
        return table[str(f_of_n)]
    except KeyError:
        raise ConfigError(f"unknown slowdown factor {f_of_n!r}; use a number or one of {sorted(table)}")


BUILDERS: Dict[str, Callable[..., ValidatedNetwork]] = {
    "toy": toy_network,
    "toy_variant_13": toy_variant_13,
    "toy_variant_12": toy_variant_12,
    "fully_connected": fully_connected,
    "fc_plus_single": fc_plus_single,
    "disconnected_pairs": disconnected_pairs,
}


def build(name: str, **params) -> ValidatedNetwork:
    """Build a named scenario; ``lambda`` is accepted as an alias of ``lam``."""
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {sorted(BUILDERS)}")
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for scenario {name!r}: {exc}") from None
