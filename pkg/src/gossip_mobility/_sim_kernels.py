"""Event loop of the gossip/mobility process.

The loop is the same Python source on both backends; numba compiles it and
the fallback runs it as is. Both draw from the same ``numpy.random.Generator``
so the two paths produce bit-identical estimates.

Each event consumes three uniforms: waiting time, category, and the draw
inside the category (alias index plus coin, or a uniform ordered pair).
"""
import math

import numpy as np

from ._backend import USE_NUMBA, jit

SELF, SOURCE, GOSSIP, SWAP = 0, 1, 2, 3


def run_replication_loop(
    rng, n, horizon, warmup, total,
    cat_kind, cat_cum,
    src_prob, src_alias,
    g_from, g_to, g_prob, g_alias,
    sw_i, sw_j, sw_prob, sw_alias, swap_uniform,
    tracked, debug,
):
    """Simulate one replication from all-zero ages.

    Returns ``(integrals, tracked_integrals, counts, violations)``: time
    integrals of each position age and each tracked-set minimum over
    ``[warmup, horizon]``, per-category event counts, and the number of
    failed debug checks.
    """
    ages = np.zeros(n, dtype=np.int64)
    last = np.zeros(n)
    integ = np.zeros(n)
    comp = np.zeros(n)
    m = tracked.shape[0]
    tmin = np.zeros(m, dtype=np.int64)
    tlast = np.zeros(m)
    tinteg = np.zeros(m)
    tcomp = np.zeros(m)
    touched = np.zeros(m, dtype=np.bool_)
    counts = np.zeros(4, dtype=np.int64)
    violations = 0
    ncat = cat_kind.shape[0]
    n_src = src_prob.shape[0]
    n_g = g_prob.shape[0]
    n_sw = sw_prob.shape[0]
    before = np.zeros(n, dtype=np.int64)
    w = 0.0
    t = 0.0
    finished = False
    while not finished:
        u = rng.random()
        t_next = t - math.log1p(-u) / total
        if t_next >= horizon:
            t = horizon
            finished = True
            kind = -1
        else:
            t = t_next
            x = rng.random() * total
            kind = cat_kind[ncat - 1]
            for c in range(ncat):
                if x < cat_cum[c]:
                    kind = cat_kind[c]
                    break
            w = rng.random()
        if kind == SELF or kind == -1:
            # every age changes (or the run ends): flush everything
            for p in range(n):
                lo = last[p] if last[p] > warmup else warmup
                if t > lo:
                    y = ages[p] * (t - lo) - comp[p]
                    s = integ[p] + y
                    comp[p] = (s - integ[p]) - y
                    integ[p] = s
                last[p] = t
            for q in range(m):
                lo = tlast[q] if tlast[q] > warmup else warmup
                if t > lo:
                    y = tmin[q] * (t - lo) - tcomp[q]
                    s = tinteg[q] + y
                    tcomp[q] = (s - tinteg[q]) - y
                    tinteg[q] = s
                tlast[q] = t
            if kind == SELF:
                counts[SELF] += 1
                for p in range(n):
                    ages[p] += 1
                for q in range(m):
                    tmin[q] += 1
            continue
        a = -1
        b = -1
        va = 0
        vb = 0
        if kind == SOURCE:
            y = w * n_src
            k = int(y)
            if k >= n_src:
                k = n_src - 1
            a = k if y - k < src_prob[k] else src_alias[k]
            va = 0
        elif kind == GOSSIP:
            y = w * n_g
            k = int(y)
            if k >= n_g:
                k = n_g - 1
            e = k if y - k < g_prob[k] else g_alias[k]
            a = g_to[e]
            va = min(ages[g_from[e]], ages[a])
        else:
            if swap_uniform:
                pairs = n * (n - 1)
                k = int(w * pairs)
                if k >= pairs:
                    k = pairs - 1
                a = k // (n - 1)
                r = k % (n - 1)
                b = r if r < a else r + 1
            else:
                y = w * n_sw
                k = int(y)
                if k >= n_sw:
                    k = n_sw - 1
                e = k if y - k < sw_prob[k] else sw_alias[k]
                a = sw_i[e]
                b = sw_j[e]
            va = ages[b]
            vb = ages[a]
        counts[kind] += 1
        if debug:
            if kind == SWAP:
                before = np.sort(ages)
            elif va > ages[a]:
                violations += 1
        if va == ages[a] and (b < 0 or vb == ages[b]):
            continue
        for h in range(2):
            p = a if h == 0 else b
            if p < 0:
                continue
            lo = last[p] if last[p] > warmup else warmup
            if t > lo:
                y = ages[p] * (t - lo) - comp[p]
                s = integ[p] + y
                comp[p] = (s - integ[p]) - y
                integ[p] = s
            last[p] = t
        for q in range(m):
            hit = tracked[q, a] != 0
            if b >= 0 and tracked[q, b] != 0:
                hit = not hit if kind == SWAP else True
            touched[q] = hit
            if hit:
                lo = tlast[q] if tlast[q] > warmup else warmup
                if t > lo:
                    y = tmin[q] * (t - lo) - tcomp[q]
                    s = tinteg[q] + y
                    tcomp[q] = (s - tinteg[q]) - y
                    tinteg[q] = s
                tlast[q] = t
        ages[a] = va
        if b >= 0:
            ages[b] = vb
        for q in range(m):
            if touched[q]:
                best = -1
                for p in range(n):
                    if tracked[q, p] != 0 and (best < 0 or ages[p] < best):
                        best = ages[p]
                tmin[q] = best
        if debug and kind == SWAP:
            after = np.sort(ages)
            for p in range(n):
                if after[p] != before[p]:
                    violations += 1
                    break
    return integ, tinteg, counts, violations


def sample_events_loop(
    rng, count, n, total, cat_kind, cat_cum,
    src_prob, src_alias, g_from, g_to, g_prob, g_alias,
    sw_i, sw_j, sw_prob, sw_alias, swap_uniform,
):
    """Draw ``count`` events with the simulator's sampler; returns (kind, i, j) arrays."""
    kinds = np.empty(count, dtype=np.int64)
    src = np.full(count, -1, dtype=np.int64)
    dst = np.full(count, -1, dtype=np.int64)
    ncat = cat_kind.shape[0]
    n_src = src_prob.shape[0]
    n_g = g_prob.shape[0]
    n_sw = sw_prob.shape[0]
    for ev in range(count):
        x = rng.random() * total
        kind = cat_kind[ncat - 1]
        for c in range(ncat):
            if x < cat_cum[c]:
                kind = cat_kind[c]
                break
        w = rng.random()
        kinds[ev] = kind
        if kind == SOURCE:
            y = w * n_src
            k = min(int(y), n_src - 1)
            dst[ev] = k if y - k < src_prob[k] else src_alias[k]
        elif kind == GOSSIP:
            y = w * n_g
            k = min(int(y), n_g - 1)
            e = k if y - k < g_prob[k] else g_alias[k]
            src[ev] = g_from[e]
            dst[ev] = g_to[e]
        elif kind == SWAP:
            if swap_uniform:
                pairs = n * (n - 1)
                k = min(int(w * pairs), pairs - 1)
                a = k // (n - 1)
                r = k % (n - 1)
                src[ev] = a
                dst[ev] = r if r < a else r + 1
            else:
                y = w * n_sw
                k = min(int(y), n_sw - 1)
                e = k if y - k < sw_prob[k] else sw_alias[k]
                src[ev] = sw_i[e]
                dst[ev] = sw_j[e]
    return kinds, src, dst


_run_jit = jit(run_replication_loop)
_sample_jit = jit(sample_events_loop)


def run_replication(*args, use_numba=None):
    use = USE_NUMBA if use_numba is None else use_numba
    return (_run_jit if use else run_replication_loop)(*args)


def sample_events(*args, use_numba=None):
    use = USE_NUMBA if use_numba is None else use_numba
    return (_sample_jit if use else sample_events_loop)(*args)
