"""Matching subsequences, their canonical minimal elements, and block statistics.

A matching of Z and Y is a pair (pi, eta) of strictly increasing index
maps with Z[pi(i)] = Y[eta(i)].  Among the maximal-length matchings we
return the lexicographically smallest under the interleaved order
(pi(1), eta(1), pi(2), eta(2), ...), which is a minimal element of the
coordinatewise partial order: any matching coordinatewise below it
would also be lexicographically below it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import lcs_length
from .sequences import as_codes


@dataclass(frozen=True)
class Matching:
    """Index pair realizing a common subsequence (1-based positions)."""

    pi: tuple[int, ...]
    eta: tuple[int, ...]

    def __post_init__(self):
        if len(self.pi) != len(self.eta):
            raise ValueError("pi and eta must have equal length")
        for arr in (self.pi, self.eta):
            if any(b <= a for a, b in zip(arr, arr[1:])):
                raise ValueError("index maps must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.pi)

    def validate(self, z, y) -> None:
        zv = as_codes(z)
        yv = as_codes(y)
        if self.pi and (self.pi[-1] > zv.size or self.eta[-1] > yv.size):
            raise ValueError("matching indices exceed sequence lengths")
        for i, j in zip(self.pi, self.eta):
            if zv[i - 1] != yv[j - 1]:
                raise ValueError(f"mismatch at (pi={i}, eta={j})")


@dataclass(frozen=True)
class MatchRecord:
    """One quadruple between consecutive matched pairs, with its census."""

    pi_lo: int
    pi_hi: int
    eta_lo: int
    eta_hi: int
    free_bits: int
    contains_zero: bool
    contains_one: bool

    @property
    def is_empty(self) -> bool:
        return self.free_bits == 0


@dataclass(frozen=True)
class Block:
    """Maximal constant run of Y (1-based, inclusive bounds)."""

    start: int
    end: int
    color: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def suffix_lcs_table(z, y) -> np.ndarray:
    """T[i, j] = LCS(z[i:], y[j:]) for 0 <= i <= |z|, 0 <= j <= |y|."""
    zv = as_codes(z)
    yv = as_codes(y)
    nz, ny = zv.size, yv.size
    table = np.zeros((nz + 1, ny + 1), dtype=np.int32)
    for i in range(nz - 1, -1, -1):
        nxt = table[i + 1]
        cand = nxt[1:] + (yv == zv[i])
        row = table[i]
        row[:-1] = np.maximum(nxt[:-1], np.maximum.accumulate(cand[::-1])[::-1])
    return table


def _next_occurrence(yv: np.ndarray) -> np.ndarray:
    """nxt[b, j] = smallest 0-based index >= j with yv == b, else |y|."""
    ny = yv.size
    nxt = np.full((2, ny + 1), ny, dtype=np.int64)
    for j in range(ny - 1, -1, -1):
        nxt[0, j] = j if yv[j] == 0 else nxt[0, j + 1]
        nxt[1, j] = j if yv[j] == 1 else nxt[1, j + 1]
    return nxt


def minimal_matching(z, y) -> Matching:
    """Canonical minimal element of the maximal-length matchings.

    Greedy over the interleaved lexicographic order: at each step take
    the smallest feasible pi, then the smallest eta for it, where
    feasibility is read off the suffix-LCS table.  The result has
    m = lcs_length(z, y) and is partial-order minimal.
    """
    zv = as_codes(z)
    yv = as_codes(y)
    table = suffix_lcs_table(zv, yv)
    nxt = _next_occurrence(yv)
    m = int(table[0, 0])
    pi: list[int] = []
    eta: list[int] = []
    i = 0  # 0-based scan positions
    j = 0
    for t in range(1, m + 1):
        need = m - t
        while True:
            b = zv[i]
            cand = int(nxt[b, j]) if b <= 1 else yv.size
            if cand < yv.size and table[i + 1, cand + 1] >= need:
                pi.append(i + 1)
                eta.append(cand + 1)
                i += 1
                j = cand + 1
                break
            i += 1
    return Matching(tuple(pi), tuple(eta))


def classify_matches(mt: Matching, z, y) -> list[MatchRecord]:
    """Records for the m-1 quadruples between consecutive matched pairs.

    Free bits are the Y positions strictly inside each eta-gap; bits
    before eta(1) and after eta(m) belong to no record.
    """
    yv = as_codes(y)
    records = []
    for idx in range(mt.m - 1):
        e_lo, e_hi = mt.eta[idx], mt.eta[idx + 1]
        gap = yv[e_lo : e_hi - 1]
        records.append(
            MatchRecord(
                pi_lo=mt.pi[idx],
                pi_hi=mt.pi[idx + 1],
                eta_lo=e_lo,
                eta_hi=e_hi,
                free_bits=int(gap.size),
                contains_zero=bool((gap == 0).any()),
                contains_one=bool((gap == 1).any()),
            )
        )
    return records


def nonempty_match_count(records: list[MatchRecord]) -> int:
    return sum(1 for r in records if not r.is_empty)


def free_bit_total(records: list[MatchRecord]) -> int:
    return sum(r.free_bits for r in records)


def check_single_color(records: list[MatchRecord]) -> bool:
    """True iff no record contains both a zero and a one.

    A minimal matching always passes: a free bit of the same color as
    the next matched bit would admit a strictly smaller re-matching.
    """
    return not any(r.contains_zero and r.contains_one for r in records)


def blocks(y) -> list[Block]:
    """Maximal constant runs tiling [1, |y|], alternating colors."""
    yv = as_codes(y)
    if yv.size == 0:
        return []
    breaks = np.flatnonzero(yv[1:] != yv[:-1]) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks, [yv.size]))
    return [
        Block(start=int(s) + 1, end=int(e), color=int(yv[s]))
        for s, e in zip(starts, ends)
    ]


def count_ND(y, d: int) -> tuple[int, int]:
    """(N_D, Ntilde_D) for the block-length cutoff d.

    N_D sums the lengths of maximal runs of length >= d.  Ntilde_D
    counts positions s in [1, n-d] with Y_s = ... = Y_{s+d}, i.e.
    starts of d+1 equal consecutive bits; its mean is (n-d) * 2^-d.
    """
    if d < 1:
        raise ValueError(f"D must be >= 1, got {d}")
    yv = as_codes(y)
    n = yv.size
    n_d = sum(b.length for b in blocks(yv) if b.length >= d)
    if n <= d:
        return n_d if d <= n else 0, 0
    same = (yv[1:] == yv[:-1]).astype(np.int64)
    # windows of d consecutive "same" flags <=> d+1 equal bits
    csum = np.concatenate(([0], np.cumsum(same)))
    ntilde = int(np.count_nonzero(csum[d:] - csum[:-d] == d))
    return n_d, ntilde


def renewal_embed(z, y) -> tuple[int, ...]:
    """Greedy first-fit embedding times nu(i) of z into y (1-based).

    nu(i) is the smallest l with z[:i] a subsequence of y[:l]; the
    tuple stops at the longest embeddable prefix.
    """
    zv = as_codes(z)
    yv = as_codes(y)
    nu = []
    j = 0
    for b in zv:
        while j < yv.size and yv[j] != b:
            j += 1
        if j == yv.size:
            break
        nu.append(j + 1)
        j += 1
    return tuple(nu)


def containment_prob_exact(l: int, k: int) -> Fraction:
    """Exact P(an l-bit fair string is a subsequence of an independent k-bit one).

    The greedy embedding time is a sum of l geometric(1/2) variables,
    so P = sum_{j=l}^{k} C(j-1, l-1) 2^{-j}, evaluated as one exact
    big-integer sum over the common denominator 2^k.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if k < l:
        raise ValueError(f"k must be >= l, got k={k}, l={l}")
    total = 0
    binom = 1  # C(j-1, l-1) at j = l
    power = 1 << (k - l)
    for j in range(l, k + 1):
        total += binom * power
        power >>= 1
        binom = binom * j // (j - l + 1)  # advance to C(j, l-1)
    return Fraction(total, 1 << k)


def first_containment_length(row: int) -> int:
    """Smallest l with LCS(z, y[:l]) = LCS(z, y), from the DP row.

    All set bits of the final bit-parallel row lie at positions < l_min,
    so l_min is simply the row's bit length.
    """
    return row.bit_length()


def render_alignment(mt: Matching, z, y) -> tuple[str, str]:
    """Two-row text rendering with '_' for unaligned letters."""
    zv = as_codes(z)
    yv = as_codes(y)
    chars = {0: "0", 1: "1", 2: "a"}
    top = []
    bottom = []
    i = 1
    j = 1
    for pi, eta in list(zip(mt.pi, mt.eta)) + [(zv.size + 1, yv.size + 1)]:
        while i < pi:
            top.append(chars[int(zv[i - 1])])
            bottom.append("_")
            i += 1
        while j < eta:
            top.append("_")
            bottom.append(chars[int(yv[j - 1])])
            j += 1
        if pi <= zv.size and eta <= yv.size:
            top.append(chars[int(zv[i - 1])])
            bottom.append(chars[int(yv[j - 1])])
            i += 1
            j += 1
    return "".join(top), "".join(bottom)


def matching_csv(mt: Matching) -> str:
    """CSV rows (i, pi, eta), one per matched pair."""
    lines = ["i,pi,eta"]
    lines += [f"{i},{p},{e}" for i, (p, e) in enumerate(zip(mt.pi, mt.eta), start=1)]
    return "\n".join(lines) + "\n"


def matching_from_csv(text: str) -> Matching:
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    return Matching(tuple(int(r[1]) for r in rows), tuple(int(r[2]) for r in rows))


def enumerate_maximal_matchings(z, y, max_len: int = 14):
    """Yield every maximal-length matching; exponential, test-oracle only."""
    zv = as_codes(z)
    yv = as_codes(y)
    if zv.size > max_len or yv.size > max_len:
        raise ValueError("enumeration oracle is limited to short sequences")
    table = suffix_lcs_table(zv, yv)
    m = int(table[0, 0])
    pi: list[int] = []
    eta: list[int] = []

    def rec(i: int, j: int, need: int):
        if need == 0:
            yield Matching(tuple(pi), tuple(eta))
            return
        for ii in range(i, zv.size - need + 1):
            for jj in range(j, yv.size - need + 1):
                if zv[ii] == yv[jj] and table[ii + 1, jj + 1] >= need - 1:
                    pi.append(ii + 1)
                    eta.append(jj + 1)
                    yield from rec(ii + 1, jj + 1, need - 1)
                    pi.pop()
                    eta.pop()

    yield from rec(0, 0, m)


def is_partial_order_minimal(mt: Matching, z, y) -> bool:
    """Exhaustively confirm no maximal matching sits strictly below mt."""
    for other in enumerate_maximal_matchings(z, y):
        if other.pi == mt.pi and other.eta == mt.eta:
            continue
        below = all(a <= b for a, b in zip(other.pi, mt.pi)) and all(
            a <= b for a, b in zip(other.eta, mt.eta)
        )
        if below:
            return False
    return True


def maximality_check(mt: Matching, z, y) -> bool:
    """Cross-check m against the engine's independent DP."""
    return mt.m == lcs_length(z, y)
