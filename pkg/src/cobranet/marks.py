"""Marked Poisson event streams of the graphical construction.

All randomness of a run is drawn by :func:`iter_event_chunks`. The stream is
the superposition of the n rate-1 vertex clocks: inter-arrival gaps are
Exponential(n), the ringing vertex is uniform, and each ring carries ``s``
out-slot indices and ``s`` Bernoulli(p) bias bits. Materialized streams and
the streaming simulator consume the same chunks, so a seed fixes the same
realization in both.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dcm import Digraph

CHUNK = 8192

_MAGIC = b"CBRM"
_HEADER = struct.Struct("<4sIqdIdQq")  # magic, version, n, T, s, p, seed, count
_VERSION = 1
_NO_SEED = 2**64 - 1


@dataclass(frozen=True)
class MarkEvent:
    time: float
    vertex: int
    neighbor_slots: tuple[int, ...]
    bias_bits: tuple[bool, ...]


def chunk_size(n: int, T: float) -> int:
    """Events drawn per batch; a function of (n, T) only, so replay stays exact."""
    mean = n * T
    return int(min(CHUNK, max(16, mean + 4.0 * np.sqrt(mean) + 16)))


def iter_event_chunks(d_plus: np.ndarray, T: float, s: int, p: float, rng: np.random.Generator):
    """Yield ``(times, vertices, slots, bits)`` arrays covering (0, T] in time order."""
    if T < 0:
        raise ValueError("horizon must be non-negative")
    if s < 1:
        raise ValueError("stubbornness s must be >= 1")
    d_plus = np.asarray(d_plus, dtype=np.int64)
    n = len(d_plus)
    chunk = chunk_size(n, T)
    t = 0.0
    while True:
        gaps = rng.exponential(1.0 / n, size=chunk)
        vertices = rng.integers(0, n, size=chunk)
        u = rng.random((chunk, s))
        bits = rng.random((chunk, s)) < p
        times = t + np.cumsum(gaps)
        slots = (u * d_plus[vertices][:, None]).astype(np.int64)
        # guard the float edge case u * d == d
        np.minimum(slots, d_plus[vertices][:, None] - 1, out=slots)
        k = int(np.searchsorted(times, T, side="right"))
        if k < chunk:
            if k:
                yield times[:k], vertices[:k], slots[:k], bits[:k]
            return
        yield times, vertices, slots, bits
        t = float(times[-1])


class MarkStream:
    """A materialized, immutable event stream on [0, T].

    Arrays are kept in generation (forward) order. A reversed stream shares
    them and flips a flag, so reversal is an exact involution.
    """

    def __init__(self, T, times, vertices, slots, bits, s, p=None, seed=None, reversed_=False):
        self.T = float(T)
        self.s = int(s)
        self.p = p
        self.seed = seed
        self._times = _ro(np.asarray(times, dtype=np.float64))
        self._vertices = _ro(np.asarray(vertices, dtype=np.int64))
        self._slots = _ro(np.asarray(slots, dtype=np.int64).reshape(-1, self.s))
        self._bits = _ro(np.asarray(bits, dtype=bool).reshape(-1, self.s))
        self.reversed = reversed_
        if not (len(self._times) == len(self._vertices) == len(self._slots) == len(self._bits)):
            raise ValueError("event arrays have mismatched lengths")

    def __len__(self):
        return len(self._times)

    def _order(self, a):
        return a[::-1] if self.reversed else a

    @property
    def times(self) -> np.ndarray:
        if self.reversed:
            return self.T - self._times[::-1]
        return self._times

    @property
    def vertices(self) -> np.ndarray:
        return self._order(self._vertices)

    @property
    def slots(self) -> np.ndarray:
        return self._order(self._slots)

    @property
    def bits(self) -> np.ndarray:
        return self._order(self._bits)

    def __getitem__(self, i) -> MarkEvent:
        k = len(self) - 1 - i if self.reversed else i
        if not 0 <= k < len(self):
            raise IndexError(i)
        t = self.T - self._times[k] if self.reversed else self._times[k]
        return MarkEvent(float(t), int(self._vertices[k]),
                         tuple(self._slots[k].tolist()), tuple(self._bits[k].tolist()))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def events(self) -> list[MarkEvent]:
        return list(self)

    def __eq__(self, other):
        if not isinstance(other, MarkStream):
            return NotImplemented
        return (self.T == other.T and self.s == other.s and len(self) == len(other)
                and np.array_equal(self.times, other.times)
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.slots, other.slots)
                and np.array_equal(self.bits, other.bits))

    __hash__ = None

    def __repr__(self):
        direction = "reversed" if self.reversed else "forward"
        return f"MarkStream(T={self.T}, s={self.s}, events={len(self)}, {direction})"


def _ro(a):
    a = a.copy()
    a.setflags(write=False)
    return a


def generate_marks(g: Digraph, T: float, s: int, p: float, rng: np.random.Generator,
                   seed=None) -> MarkStream:
    parts = list(iter_event_chunks(g.d_plus, T, s, p, rng))
    if parts:
        times, vertices, slots, bits = (np.concatenate(x) for x in zip(*parts))
    else:
        times = np.empty(0)
        vertices = np.empty(0, dtype=np.int64)
        slots = np.empty((0, s), dtype=np.int64)
        bits = np.empty((0, s), dtype=bool)
    return MarkStream(T, times, vertices, slots, bits, s, p=p, seed=seed)


def reverse(stream: MarkStream) -> MarkStream:
    """Time-reverse: the event at t moves to T - t and the order flips."""
    return MarkStream(stream.T, stream._times, stream._vertices, stream._slots, stream._bits,
                      stream.s, p=stream.p, seed=stream.seed, reversed_=not stream.reversed)


def _record_dtype(s: int) -> np.dtype:
    return np.dtype([("time", "<f8"), ("vertex", "<u4"), ("slots", "<u4", (s,)), ("bits", "u1", (s,))])


def dump_event_log(stream: MarkStream, path, n: int) -> None:
    """Write the stream in its current time order as a little-endian event log.

    Layout: header ``<4sIqdIdQq`` = (b"CBRM", version, n, T, s, p, seed, count),
    then ``count`` packed records of (f8 time, u4 vertex, s x u4 slot, s x u1 bit).
    A missing p or seed is stored as NaN / 2**64 - 1.
    """
    rec = np.zeros(len(stream), dtype=_record_dtype(stream.s))
    rec["time"] = stream.times
    rec["vertex"] = stream.vertices
    rec["slots"] = stream.slots
    rec["bits"] = stream.bits
    p = float("nan") if stream.p is None else float(stream.p)
    seed = _NO_SEED if stream.seed is None else int(stream.seed)
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, n, stream.T, stream.s, p, seed, len(stream)))
        fh.write(rec.tobytes())


def load_event_log(path) -> tuple[MarkStream, int]:
    """Read an event log; returns the stream (in forward order) and n."""
    data = Path(path).read_bytes()
    magic, version, n, T, s, p, seed, count = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != _VERSION:
        raise ValueError("not a cobranet event log")
    rec = np.frombuffer(data, dtype=_record_dtype(s), count=count, offset=_HEADER.size)
    stream = MarkStream(T, rec["time"], rec["vertex"].astype(np.int64), rec["slots"].astype(np.int64),
                        rec["bits"].astype(bool), s, p=None if np.isnan(p) else p,
                        seed=None if seed == _NO_SEED else seed)
    return stream, n
