"""The bit-drop construction: grow a random binary string one bit at a time.

Z^2 = V1 V2, and Z^{k+1} arises from Z^k by inserting a fresh fair bit
V_{k+1} at a random position T_{k+1}.  Two position laws are provided:

* ``PAPER_INTERIOR``: T_{k+1} uniform on {2, ..., k} (the displayed
  recursion; k-1 interior slots, first and last symbol never move).
* ``FULL_UNIFORM``: T_{k+1} uniform on {1, ..., k+1} (every slot).

Either way each intermediate string is marginally uniform on {0,1}^k,
which is what the coupling L_n ~ L^a(n - N^a) needs.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

from .engine import ScoreCurve, lcs_prefix_curve
from .sequences import BinarySequence, RngStream

_TAG_Y = 1
_TAG_DROP = 2
_TAG_NA = 3

_CHUNK = 2048


class InsertionMode(enum.Enum):
    PAPER_INTERIOR = "paper-interior"
    FULL_UNIFORM = "full-uniform"

    def legal_positions(self, k: int) -> range:
        """1-based positions the next bit may occupy in the new string."""
        if self is InsertionMode.PAPER_INTERIOR:
            return range(2, k + 1)
        return range(1, k + 2)


class _ChunkedBits:
    """Insert-anywhere byte buffer: list of bounded chunks.

    Insertion touches one chunk plus the chunk index, so it costs
    O(chunk + k/chunk) instead of O(k) on a flat array.
    """

    __slots__ = ("chunks", "length")

    def __init__(self, initial=()):
        self.chunks: list[list[int]] = [list(initial)]
        self.length = len(self.chunks[0])

    def insert(self, pos: int, value: int) -> None:
        """Insert value so that it lands at 0-based index pos."""
        if not 0 <= pos <= self.length:
            raise IndexError(pos)
        for ci, chunk in enumerate(self.chunks):
            if pos <= len(chunk):
                # append-at-boundary goes to the earlier chunk
                chunk.insert(pos, value)
                if len(chunk) > 2 * _CHUNK:
                    half = len(chunk) // 2
                    self.chunks[ci : ci + 1] = [chunk[:half], chunk[half:]]
                self.length += 1
                return
            pos -= len(chunk)
        raise AssertionError("unreachable")

    def to_array(self) -> np.ndarray:
        out = np.empty(self.length, dtype=np.uint8)
        at = 0
        for chunk in self.chunks:
            out[at : at + len(chunk)] = chunk
            at += len(chunk)
        return out

    def copy(self) -> "_ChunkedBits":
        new = _ChunkedBits.__new__(_ChunkedBits)
        new.chunks = [list(c) for c in self.chunks]
        new.length = self.length
        return new


@dataclass(frozen=True, eq=False)
class DropState:
    """One growth history: the current string plus every (T_j, V_j).

    States along one growth chain share a single buffer; the newest
    state owns the tip.  A stale state (one that was stepped past)
    reconstructs its string by replaying its own history, so every
    value is immutable as observed.
    """

    _buffer: _ChunkedBits
    history: tuple[tuple[int, int], ...]
    mode: InsertionMode
    base: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.base) + len(self.history)

    @property
    def initial_bits(self) -> tuple[int, int]:
        """(V1, V2); V1 doubles as Z^1 in the curve convention."""
        return self.base[0], self.base[1]

    def _is_tip(self) -> bool:
        return self._buffer.length == self.k

    def _rebuild(self) -> _ChunkedBits:
        fresh = _ChunkedBits(list(self.base))
        for t, v in self.history:
            fresh.insert(t - 1, v)
        return fresh

    def current_bits(self) -> np.ndarray:
        buf = self._buffer if self._is_tip() else self._rebuild()
        return buf.to_array()

    def to_binary_sequence(self) -> BinarySequence:
        return BinarySequence(self.current_bits())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DropState)
            and self.base == other.base
            and self.history == other.history
            and self.mode == other.mode
        )

    def __hash__(self) -> int:
        return hash((self.base, self.history, self.mode))

    @classmethod
    def from_bits(cls, bits, mode: InsertionMode = InsertionMode.PAPER_INTERIOR) -> "DropState":
        """Frozen-state constructor (no history); for enumeration hooks."""
        arr = tuple(int(b) for b in np.asarray(bits).tolist())
        if len(arr) < 2:
            raise ValueError("a drop state has length >= 2")
        return cls(_ChunkedBits(arr), (), mode, arr)

    @classmethod
    def replay(cls, initial_bits: tuple[int, int], history,
               mode: InsertionMode = InsertionMode.PAPER_INTERIOR) -> "DropState":
        state = cls(_ChunkedBits(list(initial_bits)), (), mode, tuple(initial_bits))
        for t, v in history:
            state = drop_step_forced(state, int(t), int(v))
        return state

    def history_csv(self) -> str:
        """Rows (j, T_j, V_j); j = 1..len(base) carry the base string."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "T", "V"])
        for j, b in enumerate(self.base, start=1):
            w.writerow([j, j, b])
        for j, (t, v) in enumerate(self.history, start=len(self.base) + 1):
            w.writerow([j, t, v])
        return buf.getvalue()

    @classmethod
    def from_history_csv(cls, text: str,
                         mode: InsertionMode = InsertionMode.PAPER_INTERIOR) -> "DropState":
        rows = list(csv.reader(io.StringIO(text)))
        body = [(int(t), int(v)) for _, t, v in rows[1:]]
        if len(body) < 2 or body[0][0] != 1 or body[1][0] != 2:
            raise ValueError("history must start with the rows for j=1,2")
        return cls.replay((body[0][1], body[1][1]), body[2:], mode=mode)


def _resolve_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator(_TAG_DROP)
    return rng


def drop_init(rng, mode: InsertionMode = InsertionMode.PAPER_INTERIOR) -> DropState:
    """Z^2 = V1 V2 from two fresh fair coin flips."""
    gen = _resolve_generator(rng)
    v1, v2 = (int(b) for b in gen.integers(0, 2, size=2))
    return DropState(_ChunkedBits([v1, v2]), (), mode, (v1, v2))


def curve_checkpoint_bits(state: DropState, ks) -> list[np.ndarray]:
    """Z^k snapshots along the history for each requested k (ascending)."""
    ks = sorted(int(k) for k in ks)
    if ks and (ks[0] < len(state.base) or ks[-1] > state.k):
        raise ValueError("checkpoints must lie in [len(base), k]")
    buf = _ChunkedBits(list(state.base))
    out = []
    it = iter(ks)
    want = next(it, None)
    if want == buf.length:
        out.append(buf.to_array())
        want = next(it, None)
    for t, v in state.history:
        buf.insert(t - 1, v)
        while want is not None and want == buf.length:
            out.append(buf.to_array())
            want = next(it, None)
    return out


def drop_step(state: DropState, rng) -> DropState:
    """Insert one fresh fair bit at a random legal position."""
    gen = _resolve_generator(rng)
    k = state.k
    positions = state.mode.legal_positions(k)
    t = int(gen.integers(positions.start, positions.stop))
    v = int(gen.integers(0, 2))
    return drop_step_forced(state, t, v)


def drop_step_forced(state: DropState, t: int, v: int) -> DropState:
    """Deterministic step with given (T, V); validates legality of T."""
    k = state.k
    if t not in state.mode.legal_positions(k):
        raise ValueError(f"position {t} illegal for k={k} in mode {state.mode.value}")
    if v not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {v}")
    buffer = state._buffer if state._is_tip() else state._rebuild()
    buffer.insert(t - 1, v)
    return DropState(buffer, state.history + ((t, v),), state.mode, state.base)


def drop_to(state: DropState, k_target: int, rng) -> DropState:
    """Grow the state until length k_target."""
    gen = _resolve_generator(rng)
    while state.k < k_target:
        state = drop_step(state, gen)
    return state


def simulate_Ln_coupled(
    n: int,
    p: float,
    rng: RngStream,
    mode: InsertionMode = InsertionMode.PAPER_INTERIOR,
    na_override: int | None = None,
) -> tuple[int, int, ScoreCurve]:
    """One replication of the coupled representation of L_n.

    Draws N^a ~ Binomial(n, p) independently of the drop scheme and of
    Y, grows Z to length n, and reads L^a(n - N^a) off the full score
    curve.  ``na_override`` is a test hook that pins N^a.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    gen_y = rng.generator(_TAG_Y)
    gen_drop = rng.generator(_TAG_DROP)
    gen_na = rng.generator(_TAG_NA)
    na = int(gen_na.binomial(n, p)) if na_override is None else int(na_override)
    if not 0 <= na <= n:
        raise ValueError(f"N^a must be in [0, n], got {na}")
    y = BinarySequence(gen_y.integers(0, 2, size=n, dtype=np.uint8))
    state = drop_init(gen_drop, mode=mode)
    state = drop_to(state, n, gen_drop)
    curve = lcs_prefix_curve(state, y, l=n)
    return int(curve.values[n - na]), na, curve


def uniformity_counts(
    k: int, trials: int, mode: InsertionMode, seed: int
) -> np.ndarray:
    """Counts of each pattern in {0,1}^k over independent drop growths.

    Batched over trials; the returned vector has 2^k cells, pattern p
    counted at index sum(Z_i << i).
    """
    if not 2 <= k <= 20:
        raise ValueError("k must be in [2, 20]")
    gen = RngStream(seed).generator(_TAG_DROP)
    z = np.zeros((trials, k), dtype=np.uint8)
    z[:, :2] = gen.integers(0, 2, size=(trials, 2), dtype=np.uint8)
    cols = np.arange(k, dtype=np.int64)
    for cur in range(2, k):
        positions = mode.legal_positions(cur)
        t = gen.integers(positions.start, positions.stop, size=trials, dtype=np.int64)
        v = gen.integers(0, 2, size=trials, dtype=np.uint8)
        shifted = np.empty_like(z)
        shifted[:, 0] = z[:, 0]
        shifted[:, 1:] = z[:, :-1]
        keep = cols[None, :] < t[:, None] - 1
        at = cols[None, :] == t[:, None] - 1
        z = np.where(keep, z, np.where(at, v[:, None], shifted)).astype(np.uint8)
    packed = (z.astype(np.int64) << cols[None, :]).sum(axis=1)
    return np.bincount(packed, minlength=1 << k)
