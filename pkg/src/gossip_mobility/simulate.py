"""Monte Carlo estimates of position ages by event-driven simulation.

All processes have constant rates, so the superposition is sampled directly:
one exponential waiting time at the total rate, then the event category by
weight, then the event inside the category. Ages are stored as version lags
and integrated lazily, so an event costs O(1) except the source self-update,
which touches every position.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _sim_kernels as sk
from .errors import DegenerateHorizon, RateOverflow
from .network import NetworkSpec, safe_fsum, set_members, validate

SELF, SOURCE, GOSSIP, SWAP = sk.SELF, sk.SOURCE, sk.GOSSIP, sk.SWAP
KIND_NAMES = ("self", "source", "gossip", "swap")


class Event(NamedTuple):
    """One transition; ``i`` and ``j`` are 0-based positions, -1 when unused.

    ``SOURCE`` delivers to ``j``, ``GOSSIP`` pushes from ``i`` to ``j``,
    ``SWAP`` exchanges the nodes at ``i`` and ``j``.
    """

    kind: int
    i: int = -1
    j: int = -1


def apply_event(ages, event: Event) -> np.ndarray:
    """Return the age vector after ``event``; the input is not modified."""
    out = np.array(ages, dtype=np.int64, copy=True)
    kind, i, j = event
    if kind == SELF:
        out += 1
    elif kind == SOURCE:
        out[j] = 0
    elif kind == GOSSIP:
        out[j] = min(out[i], out[j])
    elif kind == SWAP:
        out[i], out[j] = out[j], out[i]
    else:
        raise ValueError(f"unknown event kind {kind}")
    return out


def alias_table(weights):
    """Vose alias table: ``(prob, alias)`` for sampling index ``k`` with probability ``w_k / sum(w)``."""
    w = np.asarray(weights, dtype=np.float64)
    K = w.size
    prob = np.ones(K)
    alias = np.arange(K, dtype=np.int64)
    total = math.fsum(w)
    if K == 0 or total <= 0:
        return prob, alias
    scaled = w * (K / total)
    small = [k for k in range(K) if scaled[k] < 1.0]
    large = [k for k in range(K) if scaled[k] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    for k in large + small:
        prob[k] = 1.0
    return prob, alias


@dataclass(frozen=True, eq=False)
class EventSampler:
    """Draws events of a network in O(1) after O(n^2) setup.

    ``weights`` are the category totals ``(lambda_e, source, gossip, swap)``;
    ``total`` is their compensated sum. Full mobility with one common rate is
    sampled as a uniform pair without building a pair table.
    """

    n: int
    weights: tuple
    total: float
    cat_kind: np.ndarray
    cat_cum: np.ndarray
    src_prob: np.ndarray
    src_alias: np.ndarray
    g_from: np.ndarray
    g_to: np.ndarray
    g_prob: np.ndarray
    g_alias: np.ndarray
    sw_i: np.ndarray
    sw_j: np.ndarray
    sw_prob: np.ndarray
    sw_alias: np.ndarray
    swap_uniform: bool

    @classmethod
    def from_spec(cls, spec: NetworkSpec) -> "EventSampler":
        n = spec.n
        M = spec.mobility_rates
        off = ~np.eye(n, dtype=bool)
        uniform = n >= 2 and bool(np.all(M[off] == M[0, 1])) and M[0, 1] > 0
        if uniform:
            w_swap = M[0, 1] * (n * (n - 1) // 2)
            sw_i = sw_j = np.zeros(0, dtype=np.int64)
            sw_rates = np.zeros(0)
        else:
            sw_i, sw_j = np.nonzero(np.triu(M, 1) > 0)
            sw_rates = M[sw_i, sw_j]
            w_swap = safe_fsum(sw_rates)
        g_from, g_to = np.nonzero(spec.gossip_rates > 0)
        g_rates = spec.gossip_rates[g_from, g_to]
        weights = (
            spec.lambda_e,
            safe_fsum(spec.source_rates),
            safe_fsum(g_rates),
            w_swap,
        )
        total = safe_fsum(weights)
        if not math.isfinite(total) or total <= 0:
            raise RateOverflow(f"total event rate {total} is not finite and positive")
        kinds = [k for k in range(4) if weights[k] > 0]
        cum = np.cumsum([weights[k] for k in kinds])
        cum[-1] = total
        src_prob, src_alias = alias_table(spec.source_rates)
        g_prob, g_alias = alias_table(g_rates)
        sw_prob, sw_alias = alias_table(sw_rates)
        return cls(
            n=n,
            weights=weights,
            total=total,
            cat_kind=np.array(kinds, dtype=np.int64),
            cat_cum=cum,
            src_prob=src_prob,
            src_alias=src_alias,
            g_from=g_from.astype(np.int64),
            g_to=g_to.astype(np.int64),
            g_prob=g_prob,
            g_alias=g_alias,
            sw_i=sw_i.astype(np.int64),
            sw_j=sw_j.astype(np.int64),
            sw_prob=sw_prob,
            sw_alias=sw_alias,
            swap_uniform=uniform,
        )

    def tables(self):
        return (
            self.src_prob, self.src_alias,
            self.g_from, self.g_to, self.g_prob, self.g_alias,
            self.sw_i, self.sw_j, self.sw_prob, self.sw_alias, self.swap_uniform,
        )

    def sample(self, rng, count: int, use_numba=None):
        """``count`` events as arrays ``(kind, i, j)``."""
        return sk.sample_events(
            rng, int(count), self.n, self.total, self.cat_kind, self.cat_cum,
            *self.tables(), use_numba=use_numba,
        )

    def draw(self, rng) -> Event:
        kind, i, j = self.sample(rng, 1, use_numba=False)
        return Event(int(kind[0]), int(i[0]), int(j[0]))


def event_sampler(spec: NetworkSpec) -> EventSampler:
    return EventSampler.from_spec(validate(spec))


@dataclass(frozen=True)
class SimConfig:
    """Horizon, warmup and replication settings of a simulation run.

    ``warmup`` defaults to 10% of ``horizon``. ``tracked_sets`` are bitmasks
    whose minimum age is integrated alongside the positions.
    """

    horizon: float = 2e5
    warmup: Optional[float] = None
    replications: int = 10
    seed: int = 0
    tracked_sets: Sequence[int] = ()
    debug: bool = False

    @property
    def effective_warmup(self) -> float:
        return 0.1 * self.horizon if self.warmup is None else float(self.warmup)

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "warmup": self.effective_warmup,
            "replications": self.replications,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SimEstimate:
    per_position_mean: np.ndarray
    per_position_stderr: np.ndarray
    mean_age: float
    mean_stderr: float
    replication_means: np.ndarray
    tracked_set_means: dict = field(default_factory=dict)
    tracked_set_stderr: dict = field(default_factory=dict)
    event_counts: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=np.int64))

    def to_csv(self, path) -> None:
        """Aggregate ``position,mean,stderr`` rows."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["position", "mean", "stderr"])
            for i, (m, s) in enumerate(zip(self.per_position_mean, self.per_position_stderr)):
                w.writerow([i + 1, repr(float(m)), repr(float(s))])

    def replications_to_csv(self, path) -> None:
        """Per-replication ``replication,position,mean_age`` rows."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replication", "position", "mean_age"])
            for r, row in enumerate(self.replication_means):
                for i, v in enumerate(row):
                    w.writerow([r, i + 1, repr(float(v))])


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Independent stream for one replication: PCG64 seeded by ``SeedSequence(seed, spawn_key=(replication,))``."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(replication),)))
    )


def _stderr(samples, axis=0):
    samples = np.asarray(samples, dtype=np.float64)
    r = samples.shape[axis]
    if r < 2:
        return np.zeros(np.delete(samples.shape, axis)) if samples.ndim > 1 else 0.0
    return samples.std(axis=axis, ddof=1) / math.sqrt(r)


def simulate(
    spec: NetworkSpec,
    config: SimConfig = SimConfig(),
    *,
    workers: int = 1,
    use_numba=None,
) -> SimEstimate:
    """Time-averaged ages of every position over ``config.replications`` runs.

    Replications run on up to ``workers`` threads (the compiled kernel
    releases the GIL); the reduction is always in replication order.
    """
    spec = validate(spec)
    horizon = float(config.horizon)
    warmup = config.effective_warmup
    if not (math.isfinite(horizon) and 0 <= warmup < horizon):
        raise DegenerateHorizon(f"need 0 <= warmup < horizon, got warmup={warmup}, horizon={horizon}")
    if config.replications < 1:
        raise ValueError("replications must be >= 1")
    sampler = EventSampler.from_spec(spec)
    tracked = np.zeros((len(config.tracked_sets), spec.n), dtype=np.int64)
    for q, S in enumerate(config.tracked_sets):
        members = list(set_members(int(S)))
        if not members or max(members) >= spec.n:
            raise ValueError(f"tracked set {S:#x} is empty or out of range")
        tracked[q, members] = 1
    span = horizon - warmup

    def one(r):
        integ, tinteg, counts, bad = sk.run_replication(
            replication_rng(config.seed, r), spec.n, horizon, warmup, sampler.total,
            sampler.cat_kind, sampler.cat_cum, *sampler.tables(), tracked, bool(config.debug),
            use_numba=use_numba,
        )
        if bad:
            raise AssertionError(f"replication {r}: {bad} debug invariant violations")
        return integ / span, tinteg / span, counts

    reps = range(config.replications)
    if workers > 1 and config.replications > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, reps))
    else:
        results = [one(r) for r in reps]
    per_rep = np.array([res[0] for res in results])
    set_rep = np.array([res[1] for res in results])
    counts = np.sum([res[2] for res in results], axis=0)
    rep_mean_age = per_rep.mean(axis=1)
    tracked_means = {int(S): float(set_rep[:, q].mean()) for q, S in enumerate(config.tracked_sets)}
    tracked_err = {
        int(S): float(_stderr(set_rep[:, q])) for q, S in enumerate(config.tracked_sets)
    }
    return SimEstimate(
        per_position_mean=per_rep.mean(axis=0),
        per_position_stderr=np.atleast_1d(_stderr(per_rep)),
        mean_age=float(per_rep.mean()),
        mean_stderr=float(_stderr(rep_mean_age)),
        replication_means=per_rep,
        tracked_set_means=tracked_means,
        tracked_set_stderr=tracked_err,
        event_counts=counts,
    )
