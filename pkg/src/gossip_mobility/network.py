"""Network data model, validation and the rate queries every engine relies on.

Positions are 0-based inside the package and 1-based in files and on the
command line. A set of positions is an ``int`` bitmask: bit ``i`` set means
position ``i`` belongs to the set.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Tuple

import numpy as np

from .errors import (
    AsymmetricMobility,
    NegativeRate,
    NetworkError,
    NonzeroDiagonal,
    ZeroSourceTotal,
)

# exact solving keeps one float per subset, so 2**24 entries at most
EXACT_SOLVER_CAP = 24


def safe_fsum(values) -> float:
    """``math.fsum`` that returns ``inf`` instead of raising on overflow."""
    try:
        return math.fsum(values)
    except OverflowError:
        return math.inf


def _frozen(a, shape, name):
    arr = np.array(a, dtype=np.float64)
    if arr.shape != shape:
        raise NetworkError(f"{name} has shape {arr.shape}, expected {shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Full parameterization of one gossip network.

    Attributes
    ----------
    n : int
        Number of gossiping positions.
    lambda_e : float
        Rate at which the source generates new versions.
    source_rates : (n,) ndarray
        Delivery rate from the source to each position.
    gossip_rates : (n, n) ndarray
        ``gossip_rates[i, j]`` is the rate at which position ``i`` pushes its
        version to position ``j``.
    mobility_rates : (n, n) ndarray
        Symmetric; ``mobility_rates[i, j]`` is the rate of the single Poisson
        process that swaps the nodes at positions ``i`` and ``j``.
    """

    n: int
    lambda_e: float
    source_rates: np.ndarray
    gossip_rates: np.ndarray
    mobility_rates: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise NetworkError(f"n must be positive, got {self.n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lambda_e", float(self.lambda_e))
        object.__setattr__(self, "source_rates", _frozen(self.source_rates, (n,), "source_rates"))
        object.__setattr__(self, "gossip_rates", _frozen(self.gossip_rates, (n, n), "gossip_rates"))
        object.__setattr__(
            self, "mobility_rates", _frozen(self.mobility_rates, (n, n), "mobility_rates")
        )

    @property
    def total_source_rate(self) -> float:
        return safe_fsum(self.source_rates)

    def mobility_partners(self, i: int) -> List[int]:
        """Positions a node at ``i`` can swap with (the set M_i)."""
        return [int(j) for j in np.flatnonzero(self.mobility_rates[i] > 0)]

    def with_rates(self, **changes) -> "NetworkSpec":
        """Copy with some fields replaced; the result is unvalidated."""
        fields = dict(
            n=self.n,
            lambda_e=self.lambda_e,
            source_rates=self.source_rates,
            gossip_rates=self.gossip_rates,
            mobility_rates=self.mobility_rates,
        )
        fields.update(changes)
        return NetworkSpec(**fields)

    def without_mobility(self) -> "NetworkSpec":
        return self.with_rates(mobility_rates=np.zeros((self.n, self.n)))

    def permuted(self, perm) -> "NetworkSpec":
        """Relabel positions so that old position ``i`` becomes ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return NetworkSpec(
            n=self.n,
            lambda_e=self.lambda_e,
            source_rates=self.source_rates[inv],
            gossip_rates=self.gossip_rates[np.ix_(inv, inv)],
            mobility_rates=self.mobility_rates[np.ix_(inv, inv)],
        )

    def __eq__(self, other):
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        return (
            self.n == other.n
            and self.lambda_e == other.lambda_e
            and np.array_equal(self.source_rates, other.source_rates)
            and np.array_equal(self.gossip_rates, other.gossip_rates)
            and np.array_equal(self.mobility_rates, other.mobility_rates)
        )

    __hash__ = None

    # -- JSON -------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda_e": self.lambda_e,
            "source_rates": self.source_rates.tolist(),
            "gossip_rates": self.gossip_rates.tolist(),
            "mobility_rates": self.mobility_rates.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        missing = {"n", "lambda_e", "source_rates", "gossip_rates", "mobility_rates"} - set(data)
        if missing:
            raise NetworkError(f"network document lacks fields: {sorted(missing)}")
        return cls(
            n=data["n"],
            lambda_e=data["lambda_e"],
            source_rates=data["source_rates"],
            gossip_rates=data["gossip_rates"],
            mobility_rates=data["mobility_rates"],
        )

    def to_json(self, path=None, indent=None) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, text_or_path) -> "NetworkSpec":
        if isinstance(text_or_path, Path) or (
            isinstance(text_or_path, str) and not text_or_path.lstrip().startswith("{")
        ):
            text_or_path = Path(text_or_path).read_text()
        return cls.from_dict(json.loads(text_or_path))


class ValidatedNetwork(NetworkSpec):
    """A :class:`NetworkSpec` that passed :func:`validate`."""


def validate(spec: NetworkSpec) -> ValidatedNetwork:
    """Check the data-model invariants and tag the spec as valid.

    Reachability from the source is not checked here; the exact solver
    reports unreachable structure as :class:`SingularLevelSystem`.
    """
    if isinstance(spec, ValidatedNetwork):
        return spec
    rates = (spec.source_rates, spec.gossip_rates, spec.mobility_rates)
    if not math.isfinite(spec.lambda_e) or spec.lambda_e <= 0:
        raise NegativeRate(f"lambda_e must be finite and positive, got {spec.lambda_e}")
    for name, arr in zip(("source_rates", "gossip_rates", "mobility_rates"), rates):
        if not np.all(np.isfinite(arr)):
            raise NegativeRate(f"{name} contains non-finite entries")
        if np.any(arr < 0):
            raise NegativeRate(f"{name} contains negative entries")
    if np.any(np.diag(spec.gossip_rates) != 0):
        raise NonzeroDiagonal("gossip_rates must have a zero diagonal")
    if np.any(np.diag(spec.mobility_rates) != 0):
        raise NonzeroDiagonal("mobility_rates must have a zero diagonal")
    if not np.array_equal(spec.mobility_rates, spec.mobility_rates.T):
        i, j = np.argwhere(spec.mobility_rates != spec.mobility_rates.T)[0]
        raise AsymmetricMobility(
            f"mobility rate {i + 1}->{j + 1} differs from {j + 1}->{i + 1}"
        )
    if spec.total_source_rate <= 0:
        raise ZeroSourceTotal("no position receives updates from the source")
    return ValidatedNetwork(
        n=spec.n,
        lambda_e=spec.lambda_e,
        source_rates=spec.source_rates,
        gossip_rates=spec.gossip_rates,
        mobility_rates=spec.mobility_rates,
    )


# -- position sets --------------------------------------------------------


def set_mask(positions: Iterable[int], one_based: bool = False) -> int:
    """Bitmask of ``positions``."""
    off = 1 if one_based else 0
    mask = 0
    for p in positions:
        if p - off < 0:
            raise ValueError(f"invalid position {p}")
        mask |= 1 << (p - off)
    return mask


def set_members(mask: int) -> Iterator[int]:
    """0-based members of ``mask`` in increasing order, O(popcount)."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def set_size(mask: int) -> int:
    return bin(mask).count("1")


def full_set(n: int) -> int:
    return (1 << n) - 1


def format_set(mask: int) -> str:
    """1-based, space separated, e.g. ``"1 3"``."""
    return " ".join(str(i + 1) for i in set_members(mask))


def _member_index(spec: NetworkSpec, S: int) -> np.ndarray:
    if S <= 0 or S >> spec.n:
        raise ValueError(f"set {S:#x} is empty or exceeds n={spec.n}")
    return np.fromiter(set_members(S), dtype=np.int64)


# -- rate queries ---------------------------------------------------------


def source_rate_into(spec: NetworkSpec, S: int) -> float:
    """Total source delivery rate into set ``S``."""
    return math.fsum(spec.source_rates[_member_index(spec, S)])


def gossip_rate_into(spec: NetworkSpec, i: int, S: int) -> float:
    """Total gossip rate from position ``i`` into ``S``; zero when ``i`` is in ``S``."""
    idx = _member_index(spec, S)
    if S >> i & 1:
        return 0.0
    return math.fsum(spec.gossip_rates[i, idx])


def neighbors_of(spec: NetworkSpec, S: int) -> int:
    """Bitmask of positions outside ``S`` that gossip into ``S``."""
    idx = _member_index(spec, S)
    inflow = spec.gossip_rates[:, idx].sum(axis=1)
    mask = 0
    for i in np.flatnonzero(inflow > 0):
        if not S >> int(i) & 1:
            mask |= 1 << int(i)
    return mask


def mobility_exits(spec: NetworkSpec, S: int) -> List[Tuple[int, int, float]]:
    """Every swap ``(i, j, rate)`` with ``i`` in ``S`` and ``j`` outside it.

    The swap turns ``S`` into ``S - {i} + {j}``.
    """
    _member_index(spec, S)
    exits = []
    for i in set_members(S):
        for j in np.flatnonzero(spec.mobility_rates[i] > 0):
            j = int(j)
            if not S >> j & 1:
                exits.append((i, j, float(spec.mobility_rates[i, j])))
    return exits


def reachable_from_source(spec: NetworkSpec) -> np.ndarray:
    """Boolean mask of positions the source can influence.

    Follows gossip edges forward and mobility edges in both directions.
    """
    n = spec.n
    adj = (spec.gossip_rates > 0) | (spec.mobility_rates > 0) | (spec.mobility_rates.T > 0)
    seen = spec.source_rates > 0
    frontier = list(np.flatnonzero(seen))
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(adj[i] & ~seen):
            seen[j] = True
            frontier.append(int(j))
    return seen[:n]
