"""Kernels for one cardinality level of the set-age recursion.

A level system has, for every set S of size k, the row

    (excess_S + mob_S) v_S - sum_T rate_ST v_T = rhs_S

where ``excess_S`` is source inflow plus gossip inflow, ``mob_S`` is the total
swap rate out of S and T ranges over the swap targets (same size). Keeping
``excess`` separate from the diagonal lets the elimination avoid the
cancellation that plain LU suffers when swap rates dwarf the other rates.

The ``*_loop`` functions are written for numba; ``*_numpy`` are the
vectorized fallbacks used when numba is disabled.
"""
import math

import numpy as np

from ._backend import USE_NUMBA, jit


def binomial_table(n):
    """``table[p, c] == C(p, c)`` for ``0 <= p <= n``, ``0 <= c <= n + 1``."""
    table = np.zeros((n + 1, n + 2), dtype=np.int64)
    for p in range(n + 1):
        for c in range(p + 1):
            table[p, c] = math.comb(p, c)
    return table


# -- enumeration ----------------------------------------------------------


def level_masks_loop(n, k, count):
    """All ``count == C(n, k)`` bitmasks of popcount ``k`` in increasing order (Gosper)."""
    out = np.empty(count, dtype=np.int64)
    if k == 0:
        out[0] = 0
        return out
    x = (np.int64(1) << k) - 1
    for r in range(count):
        out[r] = x
        c = x & -x
        y = x + c
        x = (((x ^ y) >> 2) // c) | y
    return out


def level_masks_numpy(n, k, count):
    masks = np.arange(1 << n, dtype=np.int64)
    return masks[np.bitwise_count(masks) == k]


# -- assembly -------------------------------------------------------------


def assemble_level_loop(n, masks, upper, source, gossip, mobility, lambda_e, binom, dense):
    """Row data of a level; ``off`` is filled only when ``dense`` is true."""
    m = masks.shape[0]
    excess = np.zeros(m)
    rhs = np.full(m, lambda_e)
    mob = np.zeros(m)
    if dense:
        off = np.zeros((m, m))
    else:
        off = np.zeros((0, 0))
    for r in range(m):
        S = masks[r]
        e = 0.0
        for j in range(n):
            if (S >> j) & 1:
                e += source[j]
        for i in range(n):
            if (S >> i) & 1:
                continue
            g = 0.0
            for j in range(n):
                if (S >> j) & 1:
                    g += gossip[i, j]
            if g > 0.0:
                e += g
                rhs[r] += g * upper[S | (np.int64(1) << i)]
        excess[r] = e
        for i in range(n):
            if not (S >> i) & 1:
                continue
            for j in range(n):
                rate = mobility[i, j]
                if rate <= 0.0 or (S >> j) & 1:
                    continue
                mob[r] += rate
                if dense:
                    T = S ^ (np.int64(1) << i) ^ (np.int64(1) << j)
                    t = 0
                    c = 0
                    for p in range(n):
                        if (T >> p) & 1:
                            c += 1
                            t += binom[p, c]
                    off[r, t] -= rate
    return excess, rhs, mob, off


def level_exits_numpy(n, masks, mobility):
    """Swap exits of a level as ``(rows, cols, rates)`` index arrays."""
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    rows, cols, rates = [], [], []
    for i, j in zip(*np.nonzero(mobility > 0)):
        sel = np.flatnonzero(bits[:, i] & ~bits[:, j])
        if sel.size == 0:
            continue
        targets = masks[sel] ^ ((1 << int(i)) | (1 << int(j)))
        rows.append(sel)
        cols.append(np.searchsorted(masks, targets))
        rates.append(np.full(sel.size, mobility[i, j]))
    if not rows:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(rates)


def assemble_level_numpy(n, masks, upper, source, gossip, mobility, lambda_e, binom, dense):
    m = masks.shape[0]
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    inflow = bits.astype(np.float64) @ gossip.T
    inflow[bits] = 0.0
    excess = bits @ source + inflow.sum(axis=1)
    grown = masks[:, None] | (np.int64(1) << np.arange(n))
    upper_vals = np.where(inflow > 0, upper[grown], 0.0)
    rhs = lambda_e + (inflow * upper_vals).sum(axis=1)
    rows, cols, rates = level_exits_numpy(n, masks, mobility)
    mob = np.bincount(rows, weights=rates, minlength=m)
    if dense:
        off = np.zeros((m, m))
        np.add.at(off, (rows, cols), -rates)
    else:
        off = np.zeros((0, 0))
    return excess, rhs, mob, off


# -- dense elimination ----------------------------------------------------


def eliminate_loop(off, excess, rhs):
    """Solve a row diagonally dominant M-matrix system given its row excesses.

    ``off`` holds the (nonpositive) off-diagonal entries and is overwritten.
    The diagonal is never stored: each pivot is rebuilt as excess plus the
    magnitudes of the remaining off-diagonals, so every operation adds
    nonnegative quantities. Returns ``(x, bad)`` where ``bad`` is the index of
    a zero pivot or -1.
    """
    m = rhs.shape[0]
    e = excess.copy()
    b = rhs.copy()
    piv = np.empty(m)
    x = np.zeros(m)
    for k in range(m):
        d = e[k]
        for j in range(k + 1, m):
            d -= off[k, j]
        if not d > 0.0:
            return x, k
        piv[k] = d
        for i in range(k + 1, m):
            a = off[i, k]
            if a == 0.0:
                continue
            f = a / d
            for j in range(k + 1, m):
                off[i, j] -= f * off[k, j]
            e[i] -= f * e[k]
            b[i] -= f * b[k]
    for k in range(m - 1, -1, -1):
        acc = b[k]
        for j in range(k + 1, m):
            acc -= off[k, j] * x[j]
        x[k] = acc / piv[k]
    return x, -1


def eliminate_numpy(off, excess, rhs):
    m = rhs.shape[0]
    e = excess.astype(np.float64, copy=True)
    b = rhs.astype(np.float64, copy=True)
    piv = np.empty(m)
    x = np.zeros(m)
    for k in range(m):
        row = off[k, k + 1:]
        d = e[k] - row.sum()
        if not d > 0.0:
            return x, k
        piv[k] = d
        col = off[k + 1:, k]
        nz = np.flatnonzero(col)
        if nz.size:
            f = col[nz] / d
            tgt = k + 1 + nz
            off[tgt, k + 1:] -= np.outer(f, row)
            e[tgt] -= f * e[k]
            b[tgt] -= f * b[k]
    for k in range(m - 1, -1, -1):
        x[k] = (b[k] - off[k, k + 1:] @ x[k + 1:]) / piv[k]
    return x, -1


# -- iterative sweep ------------------------------------------------------


def sweep_level_loop(n, masks, rhs, diag, mobility, binom, x, tol, max_sweeps, omega):
    """Matrix-free damped Gauss-Seidel over one level.

    Stops when the largest update ``|r_S| / diag_S`` falls below
    ``tol * max(x)``. Returns ``(x, sweeps, last_update)``.
    """
    m = masks.shape[0]
    worst = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        worst = 0.0
        scale = 0.0
        for r in range(m):
            S = masks[r]
            acc = rhs[r]
            for i in range(n):
                if not (S >> i) & 1:
                    continue
                for j in range(n):
                    rate = mobility[i, j]
                    if rate <= 0.0 or (S >> j) & 1:
                        continue
                    T = S ^ (np.int64(1) << i) ^ (np.int64(1) << j)
                    t = 0
                    c = 0
                    for p in range(n):
                        if (T >> p) & 1:
                            c += 1
                            t += binom[p, c]
                    acc += rate * x[t]
            new = acc / diag[r]
            delta = new - x[r]
            if abs(delta) > worst:
                worst = abs(delta)
            x[r] += omega * delta
            if x[r] > scale:
                scale = x[r]
        if worst <= tol * scale:
            break
    return x, sweeps, worst


def level_exits_csr_loop(n, masks, mobility, binom):
    """Swap exits of a level in CSR form ``(indptr, cols, rates)``."""
    m = masks.shape[0]
    indptr = np.zeros(m + 1, dtype=np.int64)
    for r in range(m):
        S = masks[r]
        c = 0
        for i in range(n):
            if not (S >> i) & 1:
                continue
            for j in range(n):
                if mobility[i, j] > 0.0 and not (S >> j) & 1:
                    c += 1
        indptr[r + 1] = indptr[r] + c
    cols = np.empty(indptr[m], dtype=np.int64)
    rates = np.empty(indptr[m])
    for r in range(m):
        S = masks[r]
        q = indptr[r]
        for i in range(n):
            if not (S >> i) & 1:
                continue
            for j in range(n):
                rate = mobility[i, j]
                if rate <= 0.0 or (S >> j) & 1:
                    continue
                T = S ^ (np.int64(1) << i) ^ (np.int64(1) << j)
                t = 0
                c = 0
                for p in range(n):
                    if (T >> p) & 1:
                        c += 1
                        t += binom[p, c]
                cols[q] = t
                rates[q] = rate
                q += 1
    return indptr, cols, rates


def sweep_csr_loop(indptr, cols, rates, rhs, diag, x, tol, max_sweeps, omega):
    """Gauss-Seidel of :func:`sweep_level_loop` over precomputed exits."""
    m = rhs.shape[0]
    worst = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        worst = 0.0
        scale = 0.0
        for r in range(m):
            acc = rhs[r]
            for q in range(indptr[r], indptr[r + 1]):
                acc += rates[q] * x[cols[q]]
            delta = acc / diag[r] - x[r]
            if abs(delta) > worst:
                worst = abs(delta)
            x[r] += omega * delta
            if x[r] > scale:
                scale = x[r]
        if worst <= tol * scale:
            break
    return x, sweeps, worst


def sweep_level_numpy(n, masks, rhs, diag, mobility, binom, x, tol, max_sweeps, omega):
    """Damped Jacobi counterpart of :func:`sweep_level_loop`."""
    m = masks.shape[0]
    rows, cols, rates = level_exits_numpy(n, masks, mobility)
    worst = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        new = (rhs + np.bincount(rows, weights=rates * x[cols], minlength=m)) / diag
        delta = new - x
        worst = float(np.abs(delta).max()) if m else 0.0
        x = x + omega * delta
        if worst <= tol * float(x.max()):
            break
    return x, sweeps, worst


_level_masks_jit = jit(level_masks_loop)
_assemble_jit = jit(assemble_level_loop)
_eliminate_jit = jit(eliminate_loop)
_sweep_jit = jit(sweep_level_loop)
_exits_csr_jit = jit(level_exits_csr_loop)
_sweep_csr_jit = jit(sweep_csr_loop)

# above this many stored swap exits the compiled sweep recomputes them on the fly
CSR_LIMIT = 10**7


def level_masks(n, k):
    count = math.comb(n, k)
    if USE_NUMBA:
        return _level_masks_jit(n, k, count)
    return level_masks_numpy(n, k, count)


def assemble_level(n, masks, upper, source, gossip, mobility, lambda_e, binom, dense):
    fn = _assemble_jit if USE_NUMBA else assemble_level_numpy
    return fn(n, masks, upper, source, gossip, mobility, float(lambda_e), binom, dense)


def eliminate(off, excess, rhs):
    fn = _eliminate_jit if USE_NUMBA else eliminate_numpy
    return fn(off, excess, rhs)


def sweep_level(n, masks, rhs, diag, mobility, binom, x, tol, max_sweeps, omega):
    tol, max_sweeps, omega = float(tol), int(max_sweeps), float(omega)
    if not USE_NUMBA:
        return sweep_level_numpy(n, masks, rhs, diag, mobility, binom, x, tol, max_sweeps, omega)
    k = int(np.bitwise_count(masks[0])) if masks.size else 0
    if masks.size * k * (n - k) <= CSR_LIMIT:
        indptr, cols, rates = _exits_csr_jit(n, masks, mobility, binom)
        return _sweep_csr_jit(indptr, cols, rates, rhs, diag, x, tol, max_sweeps, omega)
    return _sweep_jit(n, masks, rhs, diag, mobility, binom, x, tol, max_sweeps, omega)
