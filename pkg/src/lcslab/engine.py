"""Exact LCS and general alignment scoring, plus the score-vs-length curve.

Two independent routes compute LCS lengths: ``lcs_length`` is a rolling
row dynamic program (the reference), ``lcs_bitparallel`` packs one row
into machine words (the fast path).  All scores are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .sequences import as_codes

if TYPE_CHECKING:  # pragma: no cover
    from .drop import DropState

_CODE_TO_CHAR = {0: "0", 1: "1", 2: "a"}


@dataclass(frozen=True)
class SubstitutionMatrix:
    """Pairwise letter scores plus a per-gap penalty (integer units)."""

    scores: Mapping[tuple[str, str], int]
    gap: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scores", dict(self.scores))

    @classmethod
    def identity(cls, alphabet: str = "01a", match: int = 1, mismatch: int = 0,
                 gap: int = 0) -> "SubstitutionMatrix":
        scores = {
            (a, b): (match if a == b else mismatch)
            for a in alphabet
            for b in alphabet
        }
        return cls(scores, gap=gap)

    def lookup(self, a_code: int, b_code: int) -> int:
        key = (_CODE_TO_CHAR[a_code], _CODE_TO_CHAR[b_code])
        try:
            return self.scores[key]
        except KeyError:
            raise ValueError(f"substitution matrix does not cover letter pair {key}") from None

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense 3x3 code-indexed score table plus its coverage mask."""
        tab = np.zeros((3, 3), dtype=np.int64)
        covered = np.zeros((3, 3), dtype=bool)
        inv = {"0": 0, "1": 1, "a": 2}
        for (a, b), s in self.scores.items():
            if a in inv and b in inv:
                tab[inv[a], inv[b]] = s
                covered[inv[a], inv[b]] = True
        return tab, covered


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence, by rolling-row DP.

    Letters compare by code, so 'a' never matches a binary letter.
    Memory is O(min(|a|, |b|)); each row update is vectorized via a
    running maximum over match candidates.
    """
    av = as_codes(a)
    bv = as_codes(b)
    if av.size == 0 or bv.size == 0:
        return 0
    if bv.size > av.size:
        av, bv = bv, av
    prev = np.zeros(bv.size + 1, dtype=np.int64)
    for ai in av:
        cand = prev[:-1] + (bv == ai)
        np.maximum(prev[1:], np.maximum.accumulate(cand), out=prev[1:])
    return int(prev[-1])


def align_score(a, b, matrix: SubstitutionMatrix) -> int:
    """Maximal matched-pair alignment score under a substitution matrix.

    An alignment stacks equal letters in order (a weighted common
    subsequence); its score is the sum of s(c, c) over matched letters
    plus ``matrix.gap`` per unmatched letter of either sequence.  With
    an identity matrix and zero gap this equals ``lcs_length``.
    """
    av = as_codes(a)
    bv = as_codes(b)
    tab, covered = matrix.table()
    for c in np.unique(np.concatenate([av, bv])):
        if not covered[c, c]:
            raise ValueError(
                f"substitution matrix does not cover letter {_CODE_TO_CHAR[int(c)]!r}"
            )
    g = int(matrix.gap)
    n = int(bv.size)
    neg = np.int64(np.iinfo(np.int64).min // 4)
    col_score = tab[bv, bv]  # matched pairs always stack equal letters
    offs = g * np.arange(1, n + 1, dtype=np.int64)
    prev = g * np.arange(n + 1, dtype=np.int64)  # row 0: all-gap prefixes of b
    for ai in av:
        cand = np.where(bv == ai, prev[:-1] + col_score, neg)
        base = np.maximum(cand, prev[1:] + g)
        s0 = prev[0] + g
        cur = np.empty(n + 1, dtype=np.int64)
        cur[0] = s0
        if n:
            # left moves add g per step: run the max in gap-detrended units
            t = np.maximum.accumulate(np.maximum(base - offs, np.int64(s0)))
            cur[1:] = t + offs
        prev = cur
    return int(prev[-1])


def _align_score_reference(a, b, matrix: SubstitutionMatrix) -> int:
    """Plain O(nm) alignment DP; oracle for the vectorized version."""
    av = as_codes(a)
    bv = as_codes(b)
    g = int(matrix.gap)
    n = bv.size
    prev = [g * j for j in range(n + 1)]
    for ai in av:
        cur = [prev[0] + g] + [0] * n
        for j in range(1, n + 1):
            best = max(prev[j] + g, cur[j - 1] + g)
            if int(ai) == int(bv[j - 1]):
                best = max(best, prev[j - 1] + matrix.lookup(int(ai), int(ai)))
            cur[j] = best
        prev = cur
    return prev[n]


def pack_eq_masks(bits: np.ndarray) -> tuple[int, int, int]:
    """Bigint match masks (eq0, eq1, length) for a 0/1 array."""
    n = int(bits.size)
    eq1 = int.from_bytes(np.packbits(bits == 1, bitorder="little").tobytes(), "little")
    eq0 = int.from_bytes(np.packbits(bits == 0, bitorder="little").tobytes(), "little")
    return eq0, eq1, n


def _row_update(row: int, mask: int) -> int:
    # Allison-Dix row step; Python ints give exact two's-complement
    # semantics for the borrow of the subtraction.
    x = row | mask
    return x & ~(x - ((row << 1) | 1))


def lcs_bitparallel(a, b) -> int:
    """Bit-parallel LCS length; identical output to ``lcs_length``.

    One DP row lives in a single big integer over the positions of the
    second argument, so each of the |a| row updates costs O(|b|/64)
    word operations.
    """
    av = as_codes(a)
    bv = as_codes(b)
    if av.size == 0 or bv.size == 0:
        return 0
    eq0, eq1, _ = pack_eq_masks(bv)
    masks = (eq0, eq1, 0)  # 'a' matches nothing
    row = 0
    for c in av.tolist():
        row = _row_update(row, masks[c])
    return row.bit_count()


def lcs_row(a, b) -> int:
    """Final bit-parallel DP row of a against b, as a big integer.

    Bit j-1 is set iff L(a, b[:j]) > L(a, b[:j-1]); prefix popcounts of
    the row therefore give LCS(a, b[:l]) for every l at once.
    """
    av = as_codes(a)
    bv = as_codes(b)
    eq0, eq1, _ = pack_eq_masks(bv)
    masks = (eq0, eq1, 0)
    row = 0
    for c in av.tolist():
        row = _row_update(row, masks[c])
    return row


@dataclass(frozen=True)
class ScoreCurve:
    """Trace of LCS(Z^k, Y^l) over k = 0..K for a fixed Y prefix."""

    values: np.ndarray
    y_length: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", vals)
        if vals.size == 0 or vals[0] != 0:
            raise ValueError("curve must start at values[0] = 0")
        diffs = np.diff(vals)
        if diffs.size and (diffs.min(initial=0) < 0 or diffs.max(initial=0) > 1):
            raise ValueError("curve increments must be 0 or 1")
        ks = np.arange(vals.size)
        if (vals > np.minimum(ks, self.y_length)).any():
            raise ValueError("curve exceeds min(k, y_length)")

    @property
    def k_max(self) -> int:
        return self.values.size - 1

    def __getitem__(self, k: int) -> int:
        return int(self.values[k])

    def to_csv_rows(self):
        return [(int(k), int(v)) for k, v in enumerate(self.values)]


def lcs_prefix_curve(state: "DropState", y, l: int | None = None,
                     method: str = "incremental") -> ScoreCurve:
    """Score curve L^a_l(k) for k = 0..state.k along the drop history.

    Replays the insertion history and keeps the per-prefix DP rows;
    after inserting a bit at position t only rows t..k need recomputing,
    roughly halving the work of independent full DPs.  ``method="full"``
    is the from-scratch fallback that guards correctness.

    The k=1 entry uses the convention Z^1 = first bit of Z^2 (exact for
    the interior insertion mode, a fair coin marginally in either mode).
    """
    yv = as_codes(y)
    if l is None:
        l = int(yv.size)
    if not 0 <= l <= yv.size:
        raise ValueError(f"l must be in [0, {yv.size}], got {l}")
    if len(state.base) != 2:
        raise ValueError("curve replay needs a history rooted at Z^2")
    eq0, eq1, _ = pack_eq_masks(yv[:l])
    masks = (eq0, eq1, 0)
    v1, v2 = state.initial_bits
    z = [int(v1), int(v2)]
    if method == "full":
        values = [0, 0, 0]
        row = _row_update(0, masks[z[0]])
        values[1] = row.bit_count()
        values[2] = _row_update(row, masks[z[1]]).bit_count()
        for t, v in state.history:
            z.insert(t - 1, int(v))
            row = 0
            for c in z:
                row = _row_update(row, masks[c])
            values.append(row.bit_count())
        return ScoreCurve(np.array(values, dtype=np.int64), y_length=l)
    if method != "incremental":
        raise ValueError(f"unknown method {method!r}")
    rows = [0, _row_update(0, masks[z[0]])]
    rows.append(_row_update(rows[1], masks[z[1]]))
    values = [0, rows[1].bit_count(), rows[2].bit_count()]
    for t, v in state.history:
        z.insert(t - 1, int(v))
        rows.append(0)
        for i in range(t, len(z) + 1):
            rows[i] = _row_update(rows[i - 1], masks[z[i - 1]])
        values.append(rows[-1].bit_count())
    return ScoreCurve(np.array(values, dtype=np.int64), y_length=l)
