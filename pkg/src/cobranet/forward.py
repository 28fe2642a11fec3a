"""Forward opinion dynamics along a mark stream."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .dcm import Digraph
from .marks import MarkEvent, MarkStream, iter_event_chunks

RED = "r"
BLUE = "b"


class OpinionConfig:
    """Per-vertex colours with an incrementally maintained red count."""

    def __init__(self, blue):
        self.blue = np.array(blue, dtype=np.uint8)
        self.red_count = int(len(self.blue) - self.blue.sum())

    @classmethod
    def all_red(cls, n: int) -> "OpinionConfig":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def all_blue(cls, n: int) -> "OpinionConfig":
        return cls(np.ones(n, dtype=np.uint8))

    @classmethod
    def from_string(cls, colors: str) -> "OpinionConfig":
        if set(colors) - {RED, BLUE}:
            raise ValueError("colours must be 'r' or 'b'")
        return cls([c == BLUE for c in colors])

    @property
    def n(self) -> int:
        return len(self.blue)

    def color(self, x: int) -> str:
        return BLUE if self.blue[x] else RED

    def colors(self) -> str:
        return "".join(BLUE if b else RED for b in self.blue.tolist())

    @property
    def red_density(self) -> float:
        return self.red_count / self.n

    def recount(self) -> int:
        return int(self.n - int(self.blue.sum()))

    def copy(self) -> "OpinionConfig":
        return OpinionConfig(self.blue)

    def __eq__(self, other):
        if not isinstance(other, OpinionConfig):
            return NotImplemented
        return np.array_equal(self.blue, other.blue)

    __hash__ = None

    def __repr__(self):
        return f"OpinionConfig(n={self.n}, red={self.red_count})"


@dataclass
class DensitySeries:
    sample_times: np.ndarray
    red_density: np.ndarray


def apply_event(g: Digraph, config: OpinionConfig, ev: MarkEvent) -> OpinionConfig:
    """Update ``config`` in place for one clock ring and return it.

    All perceptions read the colours before the update, self-loops included.
    """
    base = g.offsets[ev.vertex]
    perceived_blue = all(bit or config.blue[g.heads[base + slot]]
                         for slot, bit in zip(ev.neighbor_slots, ev.bias_bits))
    old = config.blue[ev.vertex]
    new = 1 if perceived_blue else 0
    if new != old:
        config.blue[ev.vertex] = new
        config.red_count += -1 if new else 1
    return config


@numba.njit(cache=True)
def _run_events(blue, red_count, heads, offsets, times, vertices, slots, bits,
                sample_times, densities, k, n):
    """Apply events in order; write the red density at each sample instant
    passed before an event. Returns (red_count, next sample index)."""
    n_samples = len(sample_times)
    s = slots.shape[1]
    for e in range(len(times)):
        t = times[e]
        while k < n_samples and sample_times[k] < t:
            densities[k] = red_count / n
            k += 1
        x = vertices[e]
        base = offsets[x]
        nb = 1
        for i in range(s):
            if not bits[e, i] and blue[heads[base + slots[e, i]]] == 0:
                nb = 0
                break
        if nb != blue[x]:
            blue[x] = nb
            if nb:
                red_count -= 1
            else:
                red_count += 1
    return red_count, k


_NO_SAMPLES = np.empty(0)


def run_forward(g: Digraph, stream: MarkStream, initial: OpinionConfig) -> OpinionConfig:
    """Apply the stream in time order to a copy of ``initial``."""
    if initial.n != g.n:
        raise ValueError("configuration size does not match the graph")
    out = initial.copy()
    if len(stream):
        c = np.ascontiguousarray
        out.red_count, _ = _run_events(out.blue, out.red_count, g.heads, g.offsets, c(stream.times),
                                       c(stream.vertices), c(stream.slots), c(stream.bits),
                                       _NO_SAMPLES, np.empty(0), 0, g.n)
    return out


def sample_grid(T: float, sample_dt: float) -> np.ndarray:
    if sample_dt <= 0:
        raise ValueError("sample_dt must be positive")
    k = int(np.floor(T / sample_dt + 1e-9))
    return np.arange(k + 1) * sample_dt


def run_streaming(g: Digraph, p: float, s: int, T: float, initial: OpinionConfig,
                  rng: np.random.Generator, sample_times=None) -> tuple[OpinionConfig, np.ndarray]:
    """Draw marks on the fly and apply them; never stores the stream.

    Uses the exact chunk discipline of :func:`marks.generate_marks`, so with the
    same generator state the final configuration equals ``run_forward`` over
    the materialized stream.
    """
    if initial.n != g.n:
        raise ValueError("configuration size does not match the graph")
    sample_times = _NO_SAMPLES if sample_times is None else np.asarray(sample_times, dtype=np.float64)
    densities = np.empty(len(sample_times))
    config = initial.copy()
    red, k = config.red_count, 0
    for times, vertices, slots, bits in iter_event_chunks(g.d_plus, T, s, p, rng):
        red, k = _run_events(config.blue, red, g.heads, g.offsets, times, vertices, slots, bits,
                             sample_times, densities, k, g.n)
    densities[k:] = red / g.n
    config.red_count = red
    return config, densities


def simulate_density(g: Digraph, p: float, s: int, T: float, sample_dt: float,
                     initial: OpinionConfig | None = None,
                     rng: np.random.Generator | None = None) -> DensitySeries:
    if initial is None:
        initial = OpinionConfig.all_red(g.n)
    if rng is None:
        rng = np.random.default_rng()
    grid = sample_grid(T, sample_dt)
    _, dens = run_streaming(g, p, s, T, initial, rng, grid)
    return DensitySeries(grid, dens)
