"""Directed configuration model: uniform matching of out-slots to in-slots."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .degrees import DegreeSequence


@dataclass(frozen=True, eq=False)
class Digraph:
    """Directed multigraph in CSR form.

    ``heads[offsets[x]:offsets[x + 1]]`` are the out-slots of ``x``; slot ``i``
    of ``x`` points at ``heads[offsets[x] + i]``. Self-loops and parallel
    edges are kept.
    """

    heads: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        for name in ("heads", "offsets"):
            a = np.array(getattr(self, name), dtype=np.int64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.offsets[0] != 0 or self.offsets[-1] != len(self.heads):
            raise ValueError("offsets do not cover heads")

    @property
    def n(self) -> int:
        return len(self.offsets) - 1

    @property
    def m(self) -> int:
        return len(self.heads)

    @property
    def d_plus(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def d_minus(self) -> np.ndarray:
        return np.bincount(self.heads, minlength=self.n)

    @property
    def out_adj(self) -> list[np.ndarray]:
        return [self.heads[self.offsets[x]:self.offsets[x + 1]] for x in range(self.n)]

    def edges(self):
        tails = np.repeat(np.arange(self.n), self.d_plus)
        return zip(tails.tolist(), self.heads.tolist())

    @classmethod
    def from_out_adj(cls, out_adj) -> "Digraph":
        lengths = [len(a) for a in out_adj]
        if min(lengths, default=0) < 1:
            raise ValueError("every vertex needs at least one out-edge")
        offsets = np.concatenate([[0], np.cumsum(lengths)])
        heads = np.concatenate([np.asarray(a, dtype=np.int64) for a in out_adj])
        n = len(out_adj)
        if heads.min() < 0 or heads.max() >= n:
            raise ValueError("head vertex out of range")
        return cls(heads, offsets)

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return np.array_equal(self.heads, other.heads) and np.array_equal(self.offsets, other.offsets)

    __hash__ = None


def sample_dcm(seq: DegreeSequence, rng: np.random.Generator) -> Digraph:
    """Project a uniformly random bijection between out-slots and in-slots."""
    if int(seq.d_minus.sum()) != int(seq.d_plus.sum()):
        raise ValueError("cannot match: sum of in-degrees differs from sum of out-degrees")
    in_slots = np.repeat(np.arange(seq.n, dtype=np.int64), seq.d_minus)
    heads = rng.permutation(in_slots)
    offsets = np.concatenate([[0], np.cumsum(seq.d_plus)])
    return Digraph(heads, offsets)


def out_neighbors(g: Digraph, x: int) -> np.ndarray:
    if not 0 <= x < g.n:
        raise IndexError(f"vertex {x} out of range for n = {g.n}")
    return g.heads[g.offsets[x]:g.offsets[x + 1]]


def dump_edge_list(g: Digraph, path) -> None:
    with Path(path).open("w") as fh:
        for t, h in g.edges():
            fh.write(f"{t} {h}\n")


def load_edge_list(path) -> Digraph:
    pairs = [tuple(map(int, line.split())) for line in Path(path).read_text().splitlines() if line.strip()]
    n = 1 + max(max(t, h) for t, h in pairs)
    out_adj = [[] for _ in range(n)]
    for t, h in pairs:
        out_adj[t].append(h)
    return Digraph.from_out_adj(out_adj)
