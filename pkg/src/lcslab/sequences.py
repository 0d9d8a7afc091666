"""Alphabets, packed sequence containers, and seeded random generation.

The source model draws X over the three-letter alphabet {0, 1, a} with
P(a) = p and P(0) = P(1) = (1-p)/2, and Y as i.i.d. fair bits.  Symbols
are coded as small integers (ZERO=0, ONE=1, A=2) and sequences are
stored bit-packed so that lengths up to 10^7 stay cheap in memory.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

ZERO = 0
ONE = 1
A = 2

_TRI_TO_CHAR = {ZERO: "0", ONE: "1", A: "a"}
_CHAR_TO_TRI = {"0": ZERO, "1": ONE, "a": A}

_BIN_MAGIC = b"LB"
_TRI_MAGIC = b"LT"


@dataclass(frozen=True)
class RngStream:
    """Addressable deterministic random stream.

    The pair (seed, stream_index) fully determines every draw; distinct
    stream indices yield statistically independent Philox streams, so
    replication r can simply use stream_index=r in parallel runs.
    """

    seed: int
    stream_index: int = 0

    def generator(self, *tags: int) -> np.random.Generator:
        """Fresh generator for this stream, optionally sub-keyed by tags."""
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_index, *tags)
        )
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_index * 1_000_003 + index + 1)


def _pack_bits(values: np.ndarray) -> np.ndarray:
    return np.packbits(values, bitorder="little")


def _unpack_bits(packed: np.ndarray, length: int) -> np.ndarray:
    return np.unpackbits(packed, count=length, bitorder="little")


class BinarySequence:
    """Immutable bit string, stored packed at 1 bit per symbol."""

    __slots__ = ("_packed", "_length")

    def __init__(self, bits) -> None:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if arr.size and arr.max(initial=0) > 1:
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "_packed", _pack_bits(arr))
        object.__setattr__(self, "_length", int(arr.size))

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("BinarySequence is immutable")

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._length:
            raise IndexError(i)
        return (int(self._packed[i >> 3]) >> (i & 7)) & 1

    def __iter__(self):
        return iter(self.values())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinarySequence)
            and self._length == other._length
            and np.array_equal(self._packed, other._packed)
        )

    def __hash__(self) -> int:
        return hash((self._length, self._packed.tobytes()))

    def __repr__(self) -> str:
        text = self.to_text() if self._length <= 40 else self.to_text()[:37] + "..."
        return f"BinarySequence({text!r}, length={self._length})"

    def values(self) -> np.ndarray:
        """Unpacked uint8 array of 0/1 values (fresh copy)."""
        return _unpack_bits(self._packed, self._length)

    def to_text(self) -> str:
        return "".join("1" if b else "0" for b in self.values())

    @classmethod
    def from_text(cls, text: str) -> "BinarySequence":
        try:
            return cls([_CHAR_TO_TRI[c] for c in text])
        except KeyError as exc:
            raise ValueError(f"invalid binary character {exc.args[0]!r}") from None

    def to_bytes(self) -> bytes:
        return _BIN_MAGIC + struct.pack("<Q", self._length) + self._packed.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "BinarySequence":
        if blob[:2] != _BIN_MAGIC:
            raise ValueError("not a serialized BinarySequence")
        (length,) = struct.unpack_from("<Q", blob, 2)
        packed = np.frombuffer(blob, dtype=np.uint8, offset=10)
        if packed.size != (length + 7) // 8:
            raise ValueError("corrupt payload length")
        return cls(_unpack_bits(packed, length))


class TriSequence:
    """Immutable string over {0, 1, a}, stored as two packed bit planes.

    Records the a-probability p used at generation for provenance.
    """

    __slots__ = ("_low", "_high", "_length", "p")

    def __init__(self, letters, p: float | None = None) -> None:
        arr = np.asarray(letters, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("letters must be one-dimensional")
        if arr.size and arr.max(initial=0) > 2:
            raise ValueError("letters must be in {0, 1, 2}")
        object.__setattr__(self, "_low", _pack_bits(arr & 1))
        object.__setattr__(self, "_high", _pack_bits(arr >> 1))
        object.__setattr__(self, "_length", int(arr.size))
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("TriSequence is immutable")

    def __len__(self) -> int:
        return self._length

    @property
    def n(self) -> int:
        return self._length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._length:
            raise IndexError(i)
        low = (int(self._low[i >> 3]) >> (i & 7)) & 1
        high = (int(self._high[i >> 3]) >> (i & 7)) & 1
        return low | (high << 1)

    def __iter__(self):
        return iter(self.values())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TriSequence)
            and self._length == other._length
            and np.array_equal(self._low, other._low)
            and np.array_equal(self._high, other._high)
        )

    def __hash__(self) -> int:
        return hash((self._length, self._low.tobytes(), self._high.tobytes()))

    def __repr__(self) -> str:
        text = self.to_text() if self._length <= 40 else self.to_text()[:37] + "..."
        return f"TriSequence({text!r}, n={self._length}, p={self.p})"

    def values(self) -> np.ndarray:
        """Unpacked uint8 array of {0, 1, 2} codes (fresh copy)."""
        low = _unpack_bits(self._low, self._length)
        high = _unpack_bits(self._high, self._length)
        return low | (high << 1)

    def to_text(self) -> str:
        return "".join(_TRI_TO_CHAR[v] for v in self.values())

    @classmethod
    def from_text(cls, text: str, p: float | None = None) -> "TriSequence":
        try:
            return cls([_CHAR_TO_TRI[c] for c in text], p=p)
        except KeyError as exc:
            raise ValueError(f"invalid character {exc.args[0]!r}") from None

    def to_bytes(self) -> bytes:
        return (
            _TRI_MAGIC
            + struct.pack("<Q", self._length)
            + self._low.tobytes()
            + self._high.tobytes()
        )

    @classmethod
    def from_bytes(cls, blob: bytes) -> "TriSequence":
        if blob[:2] != _TRI_MAGIC:
            raise ValueError("not a serialized TriSequence")
        (length,) = struct.unpack_from("<Q", blob, 2)
        nbytes = (length + 7) // 8
        low = np.frombuffer(blob, dtype=np.uint8, offset=10, count=nbytes)
        high = np.frombuffer(blob, dtype=np.uint8, offset=10 + nbytes, count=nbytes)
        letters = _unpack_bits(low, length) | (_unpack_bits(high, length) << 1)
        return cls(letters)


def as_codes(seq) -> np.ndarray:
    """Coerce a sequence-like argument to a uint8 code array.

    Accepts BinarySequence, TriSequence, text over '0'/'1'/'a', or any
    array-like of codes in {0, 1, 2}.
    """
    if isinstance(seq, (BinarySequence, TriSequence)):
        return seq.values()
    if isinstance(seq, str):
        try:
            return np.fromiter(
                (_CHAR_TO_TRI[c] for c in seq), dtype=np.uint8, count=len(seq)
            )
        except KeyError as exc:
            raise ValueError(f"invalid character {exc.args[0]!r}") from None
    arr = np.asarray(seq, dtype=np.uint8)
    if arr.size and arr.max(initial=0) > 2:
        raise ValueError("codes must be in {0, 1, 2}")
    return arr


def generate_case1(n: int, p: float, rng: RngStream) -> tuple[TriSequence, BinarySequence]:
    """Draw one (X, Y) pair of the asymmetric source model.

    X has n i.i.d. letters with P(a)=p, P(0)=P(1)=(1-p)/2; Y has n
    i.i.d. fair bits.  X and Y come from independent sub-streams of
    ``rng``, so the pair is reproducible from (seed, stream_index).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gen_x = rng.generator(0)
    gen_y = rng.generator(1)
    u = gen_x.random(n)
    # one uniform per letter: [0,p) -> a, [p,(1+p)/2) -> 0, rest -> 1
    letters = np.where(u < p, A, np.where(u < (1.0 + p) / 2.0, ZERO, ONE)).astype(np.uint8)
    y = gen_y.integers(0, 2, size=n, dtype=np.uint8)
    return TriSequence(letters, p=p), BinarySequence(y)


def strip_a(x: TriSequence) -> tuple[BinarySequence, int]:
    """Project X to its 0/1 letters, preserving order; also count the a's."""
    vals = x.values() if isinstance(x, TriSequence) else as_codes(x)
    kept = vals[vals != A]
    return BinarySequence(kept), int(vals.size - kept.size)
