"""Batched compiled kernels behind the Monte Carlo drivers.

Everything here is an implementation detail: each kernel mirrors a
scalar public operation (engine/drop/matchings) and the test suite
cross-validates the two routes on random instances.  Replications sit
in the leading axis; bit-parallel DP rows live in little-endian uint64
words.
"""

from __future__ import annotations

import sys

import numpy as np
from numba import njit, prange

if sys.byteorder != "little":  # pragma: no cover
    raise RuntimeError("bit-packing helpers assume a little-endian platform")

_BITLEN8 = np.array([0] + [int(v).bit_length() for v in range(1, 256)], dtype=np.int64)


def pack_eq_batch(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-replication match masks (eq0, eq1) as (R, W) uint64 words."""
    y = np.ascontiguousarray(y, dtype=np.uint8)
    n = y.shape[1]
    w = max(1, (n + 63) // 64)

    def pack(bits):
        p = np.packbits(bits, axis=1, bitorder="little")
        pad = w * 8 - p.shape[1]
        if pad:
            p = np.pad(p, ((0, 0), (0, pad)))
        return np.ascontiguousarray(p).view(np.uint64)

    return pack(y == 0), pack(y == 1), w


def prefix_mask(l: int, w: int) -> np.ndarray:
    """Word mask selecting the first l bit positions."""
    mask = np.zeros(w, dtype=np.uint64)
    full, rem = divmod(l, 64)
    mask[:full] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if rem:
        mask[full] = np.uint64((1 << rem) - 1)
    return mask


def popcount_rows(rows: np.ndarray, l: int | None = None) -> np.ndarray:
    """Popcount along the word axis, optionally masked to the first l bits."""
    if l is not None:
        rows = rows & prefix_mask(l, rows.shape[-1])
    return np.bitwise_count(rows).sum(axis=-1).astype(np.int64)


def bitlength_rows(rows: np.ndarray) -> np.ndarray:
    """Bit length (position of highest set bit) of each multiword row."""
    flat = rows.reshape(-1, rows.shape[-1])
    as_bytes = flat.view(np.uint8)  # little-endian: byte b covers bits 8b..8b+7
    nz = as_bytes != 0
    rev = nz[:, ::-1]
    has = rev.any(axis=1)
    idx = as_bytes.shape[1] - 1 - rev.argmax(axis=1)
    top = as_bytes[np.arange(as_bytes.shape[0]), idx]
    out = np.where(has, idx * 8 + _BITLEN8[top], 0)
    return out.reshape(rows.shape[:-1])


@njit(cache=True)
def _rowpass(z, k, eq0, eq1, out, xs, us):
    """Final Allison-Dix row of z[:k] against the masked sequence."""
    w = eq0.shape[0]
    for ww in range(w):
        out[ww] = np.uint64(0)
    for i in range(k):
        b = z[i]
        carry = np.uint64(1)
        for ww in range(w):
            if b == 1:
                m = eq1[ww]
            elif b == 0:
                m = eq0[ww]
            else:
                m = np.uint64(0)
            x = out[ww] | m
            u = (out[ww] << np.uint64(1)) | carry
            carry = out[ww] >> np.uint64(63)
            xs[ww] = x
            us[ww] = u
        borrow = np.uint64(0)
        for ww in range(w):
            x = xs[ww]
            u = us[ww]
            d = x - u - borrow
            if x < u or (x == u and borrow == np.uint64(1)):
                nb = np.uint64(1)
            else:
                nb = np.uint64(0)
            out[ww] = x & ~d
            borrow = nb
    return


@njit(cache=True, parallel=True)
def lcs_rows_flat(z, lens, eq0, eq1):
    """Per-replication final DP rows of z[r, :lens[r]] vs masked Y_r."""
    reps = z.shape[0]
    w = eq0.shape[1]
    rows = np.zeros((reps, w), np.uint64)
    for r in prange(reps):
        xs = np.empty(w, np.uint64)
        us = np.empty(w, np.uint64)
        _rowpass(z[r], lens[r], eq0[r], eq1[r], rows[r], xs, us)
    return rows


@njit(cache=True, parallel=True)
def drop_rows_at_checkpoints(base, t_steps, v_steps, ks, eq0, eq1):
    """Grow each replication's Z by insertions; emit DP rows at checkpoints.

    base (R,2) holds Z^2; t_steps[r, s] is the 1-based position of the
    bit added at length 2+s (so Z^{3+s} after it lands); ks is sorted
    ascending with possible duplicates, every entry in [2, K].
    Returns (R, len(ks), W) rows of Z^k against the full masked Y.
    """
    reps = base.shape[0]
    w = eq0.shape[1]
    n_steps = t_steps.shape[1]
    k_max = 2 + n_steps
    m = ks.shape[0]
    rows = np.zeros((reps, m, w), np.uint64)
    for r in prange(reps):
        z = np.empty(k_max, np.uint8)
        z[0] = base[r, 0]
        z[1] = base[r, 1]
        cur = 2
        ci = 0
        xs = np.empty(w, np.uint64)
        us = np.empty(w, np.uint64)
        while ci < m and ks[ci] == cur:
            _rowpass(z, cur, eq0[r], eq1[r], rows[r, ci], xs, us)
            ci += 1
        for s in range(n_steps):
            t = t_steps[r, s]
            for j in range(cur, t - 1, -1):
                z[j] = z[j - 1]
            z[t - 1] = v_steps[r, s]
            cur += 1
            while ci < m and ks[ci] == cur:
                _rowpass(z, cur, eq0[r], eq1[r], rows[r, ci], xs, us)
                ci += 1
    return rows


@njit(cache=True, parallel=True)
def drop_rows_at_perrep_k(base, t_steps, v_steps, k_r, eq0, eq1):
    """One DP row per replication, taken when its growth reaches k_r[r] >= 2."""
    reps = base.shape[0]
    w = eq0.shape[1]
    k_max = 2 + t_steps.shape[1]
    rows = np.zeros((reps, w), np.uint64)
    for r in prange(reps):
        target = k_r[r]
        z = np.empty(k_max, np.uint8)
        z[0] = base[r, 0]
        z[1] = base[r, 1]
        cur = 2
        while cur < target:
            s = cur - 2
            t = t_steps[r, s]
            for j in range(cur, t - 1, -1):
                z[j] = z[j - 1]
            z[t - 1] = v_steps[r, s]
            cur += 1
        xs = np.empty(w, np.uint64)
        us = np.empty(w, np.uint64)
        _rowpass(z, cur, eq0[r], eq1[r], rows[r], xs, us)
    return rows


@njit(cache=True, parallel=True)
def grow_final(base, t_steps, v_steps):
    """Final Z^K letters for each replication (no row passes)."""
    reps = base.shape[0]
    k_max = 2 + t_steps.shape[1]
    out = np.empty((reps, k_max), np.uint8)
    for r in prange(reps):
        out[r, 0] = base[r, 0]
        out[r, 1] = base[r, 1]
        cur = 2
        for s in range(t_steps.shape[1]):
            t = t_steps[r, s]
            for j in range(cur, t - 1, -1):
                out[r, j] = out[r, j - 1]
            out[r, t - 1] = v_steps[r, s]
            cur += 1
    return out


@njit(cache=True)
def _extract_stats(z, k, y, n, table, nxt0, nxt1):
    """Lex-minimal maximal matching statistics for one replication.

    Returns (m, eta1, eta_m, nonempty, free_total, single_color).
    """
    for j in range(n + 1):
        table[k, j] = 0
    for i in range(k - 1, -1, -1):
        table[i, n] = 0
        zi = z[i]
        for j in range(n - 1, -1, -1):
            a = table[i + 1, j + 1] + (1 if y[j] == zi else 0)
            b = table[i + 1, j]
            c = table[i, j + 1]
            best = a if a > b else b
            if c > best:
                best = c
            table[i, j] = best
    nxt0[n] = n
    nxt1[n] = n
    for j in range(n - 1, -1, -1):
        nxt0[j] = j if y[j] == 0 else nxt0[j + 1]
        nxt1[j] = j if y[j] == 1 else nxt1[j + 1]
    m = table[0, 0]
    i = 0
    j = 0
    eta1 = 0
    eta_prev = -1
    nonempty = 0
    free_total = 0
    single = 1
    for t in range(1, m + 1):
        need = m - t
        while True:
            b = z[i]
            cand = nxt1[j] if b == 1 else nxt0[j]
            if cand < n and table[i + 1, cand + 1] >= need:
                if t == 1:
                    eta1 = cand + 1
                else:
                    gap = cand - 1 - eta_prev  # 0-based open interval size
                    if gap > 0:
                        nonempty += 1
                        free_total += gap
                        saw0 = False
                        saw1 = False
                        for q in range(eta_prev + 1, cand):
                            if y[q] == 0:
                                saw0 = True
                            else:
                                saw1 = True
                        if saw0 and saw1:
                            single = 0
                i += 1
                eta_prev = cand
                j = cand + 1
                break
            i += 1
    eta_m = eta_prev + 1 if m > 0 else 0
    return m, eta1, eta_m, nonempty, free_total, single


@njit(cache=True, parallel=True)
def matching_stats_batch(z, k, y):
    """(m, eta1, eta_m, nonempty, free_total, single_color) per replication."""
    reps = z.shape[0]
    n = y.shape[1]
    out = np.zeros((reps, 6), np.int64)
    for r in prange(reps):
        table = np.empty((k + 1, n + 1), np.int32)
        nxt0 = np.empty(n + 1, np.int64)
        nxt1 = np.empty(n + 1, np.int64)
        m, eta1, eta_m, nonempty, free_total, single = _extract_stats(
            z[r, :k], k, y[r], n, table, nxt0, nxt1
        )
        out[r, 0] = m
        out[r, 1] = eta1
        out[r, 2] = eta_m
        out[r, 3] = nonempty
        out[r, 4] = free_total
        out[r, 5] = single
    return out


def draw_drop_steps(gen: np.random.Generator, reps: int, k_max: int,
                    interior: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Base bits plus (T, V) step arrays for growth from 2 to k_max."""
    base = gen.integers(0, 2, size=(reps, 2), dtype=np.uint8)
    n_steps = k_max - 2
    t_steps = np.empty((reps, n_steps), dtype=np.int64)
    for s in range(n_steps):
        cur = 2 + s
        if interior:
            t_steps[:, s] = gen.integers(2, cur + 1, size=reps)
        else:
            t_steps[:, s] = gen.integers(1, cur + 2, size=reps)
    v_steps = gen.integers(0, 2, size=(reps, n_steps), dtype=np.uint8)
    return base, t_steps, v_steps
