"""Exact limiting version ages of every set of positions.

Sets are solved one cardinality level at a time, from the full set down to
singletons. Gossip links a set to sets one larger (already solved); swaps
link it to sets of the same size, so each level is one linear system.
"""
from __future__ import annotations

import csv
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, Optional

import numpy as np

from . import _level_kernels as lk
from .errors import CapExceeded, NoConvergence, SingularLevelSystem
from .network import (
    EXACT_SOLVER_CAP,
    NetworkSpec,
    format_set,
    full_set,
    reachable_from_source,
    set_size,
    validate,
)

log = logging.getLogger(__name__)

DENSE_LIMIT = 4096
SWEEP_TOL = 1e-12
MAX_SWEEPS = 10**6


class SetAges(Mapping):
    """Read-only ``{bitmask: v_S}`` view; accepts dense arrays or dicts."""

    def __init__(self, values, n):
        self._values = values
        self._n = n
        self._dense = isinstance(values, np.ndarray)

    def __getitem__(self, S):
        if self._dense:
            if not 0 < S < len(self._values):
                raise KeyError(S)
            return float(self._values[S])
        return self._values[S]

    def __iter__(self) -> Iterator[int]:
        if self._dense:
            return iter(range(1, len(self._values)))
        return iter(sorted(self._values))

    def __len__(self):
        return len(self._values) - 1 if self._dense else len(self._values)


@dataclass(frozen=True)
class AgeTable:
    """Solved set ages of one network.

    ``level_ages`` maps a set bitmask to its limiting average version age,
    ``position_ages[i]`` is the age of the singleton ``{i}``.
    """

    n: int
    lambda_e: float
    level_ages: Mapping
    position_ages: np.ndarray

    @property
    def mean_age(self) -> float:
        return float(np.mean(self.position_ages))

    def __getitem__(self, S: int) -> float:
        return self.level_ages[S]

    def to_csv(self, path) -> None:
        """Write ``set_bitmask,set_members,cardinality,v_S`` rows, one per set."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["set_bitmask", "set_members", "cardinality", "v_S"])
            for S in self.level_ages:
                w.writerow([S, format_set(S), set_size(S), repr(self.level_ages[S])])

    def positions_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["position", "v_i"])
            for i, v in enumerate(self.position_ages):
                w.writerow([i + 1, repr(float(v))])


def mean_node_age(table: AgeTable) -> float:
    """Average singleton age; equals the long-run age of a node, wherever it moves."""
    return table.mean_age


def _check_reachable(spec):
    ok = reachable_from_source(spec)
    if not ok.all():
        bad = ", ".join(str(i + 1) for i in np.flatnonzero(~ok))
        raise SingularLevelSystem(f"positions {bad} never receive source information")


def _solve_level_arrays(spec, k, ages, binom, dense_limit, tol, max_sweeps, omega):
    n = spec.n
    masks = lk.level_masks(n, k)
    dense = masks.size <= dense_limit
    excess, rhs, mob, off = lk.assemble_level(
        n, masks, ages, spec.source_rates, spec.gossip_rates, spec.mobility_rates,
        spec.lambda_e, binom, dense,
    )
    if np.any(excess < 0):
        raise AssertionError("negative row excess; level system is not diagonally dominant")
    if not mob.any():
        # no swaps at this level: the system is diagonal
        if np.any(excess <= 0):
            S = int(masks[np.flatnonzero(excess <= 0)[0]])
            raise SingularLevelSystem(f"set {{{format_set(S)}}} has no inflow of any kind")
        return masks, rhs / excess
    if dense:
        x, bad = lk.eliminate(off, excess, rhs)
        if bad >= 0:
            raise SingularLevelSystem(
                f"level {k}: zero pivot at set {{{format_set(int(masks[bad]))}}}"
            )
        return masks, x
    diag = excess + mob
    if np.any(diag <= 0):
        raise SingularLevelSystem(f"level {k} has a row with zero diagonal")
    x0 = np.where(excess > 0, rhs / np.where(excess > 0, excess, 1.0), rhs / diag)
    x, sweeps, worst = lk.sweep_level(
        n, masks, rhs, diag, spec.mobility_rates, binom, x0, tol, max_sweeps, omega
    )
    if not worst <= tol * float(np.max(x)):
        raise NoConvergence(
            f"level {k}: residual {worst:.3e} after {sweeps} sweeps", residual=worst, sweeps=sweeps
        )
    log.debug("level %d solved iteratively in %d sweeps", k, sweeps)
    return masks, x


def solve_all(
    spec: NetworkSpec,
    *,
    dense_limit: int = DENSE_LIMIT,
    tol: float = SWEEP_TOL,
    max_sweeps: int = MAX_SWEEPS,
    omega: float = 1.0,
) -> AgeTable:
    """Solve every set age of ``spec``.

    Parameters
    ----------
    spec : NetworkSpec
        Validated on entry.
    dense_limit : int
        Levels with at most this many sets are solved by direct elimination,
        larger ones by damped sweeps.
    tol, max_sweeps, omega : float, int, float
        Stopping rule and relaxation factor of the iterative path.

    Raises
    ------
    CapExceeded
        ``spec.n`` exceeds :data:`EXACT_SOLVER_CAP`.
    SingularLevelSystem
        Some set can never receive source information.
    NoConvergence
        An iterative level hit ``max_sweeps``.
    """
    spec = validate(spec)
    n = spec.n
    if n > EXACT_SOLVER_CAP:
        raise CapExceeded(f"n={n} exceeds the exact solver cap of {EXACT_SOLVER_CAP}")
    _check_reachable(spec)
    binom = lk.binomial_table(n)
    ages = np.full(1 << n, np.nan)
    for k in range(n, 0, -1):
        masks, x = _solve_level_arrays(spec, k, ages, binom, dense_limit, tol, max_sweeps, omega)
        ages[masks] = x
    ages.setflags(write=False)
    singletons = ages[1 << np.arange(n)].copy()
    return AgeTable(n, spec.lambda_e, SetAges(ages, n), singletons)


def solve_level(
    spec: NetworkSpec,
    k: int,
    upper_ages: Mapping,
    *,
    dense_limit: int = DENSE_LIMIT,
    tol: float = SWEEP_TOL,
    max_sweeps: int = MAX_SWEEPS,
    omega: float = 1.0,
) -> Dict[int, float]:
    """Solve the sets of size ``k`` given the ages of every set of size ``k + 1``."""
    spec = validate(spec)
    n = spec.n
    if not 1 <= k <= n:
        raise ValueError(f"level {k} outside 1..{n}")
    if n > EXACT_SOLVER_CAP:
        raise CapExceeded(f"n={n} exceeds the exact solver cap of {EXACT_SOLVER_CAP}")
    ages = np.full(1 << n, np.nan)
    if k < n:
        for S in lk.level_masks(n, k + 1):
            try:
                ages[S] = upper_ages[int(S)]
            except KeyError:
                raise ValueError(f"upper_ages lacks set {{{format_set(int(S))}}}") from None
    masks, x = _solve_level_arrays(
        spec, k, ages, lk.binomial_table(n), dense_limit, tol, max_sweeps, omega
    )
    return {int(S): float(v) for S, v in zip(masks, x)}


def full_set_age(spec: NetworkSpec) -> float:
    return spec.lambda_e / spec.total_source_rate
