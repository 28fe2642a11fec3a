"""Coalescing-branching-dying labelled particles driven by a mark stream.

For s = 2 the bias bits act as: (0,0) branch to both sampled neighbours,
(0,1) move to the first, (1,0) move to the second, (1,1) die. For general s
the particles at the ringing vertex die when every bit is 1 and otherwise
branch onto the distinct targets of the slots whose bit is 0. This general-s
rule is our own extension; it is the one under which a vertex is blue
exactly when its label goes extinct.
"""

from __future__ import annotations

import math
from collections import Counter

import numba
import numpy as np

from .dcm import Digraph
from .marks import MarkEvent, MarkStream, iter_event_chunks

DIE = 0
MOVE = 1
BRANCH = 2


class ParticleConfig:
    """``occupancy[x]`` is the set of labels at vertex x (empty vertices absent)."""

    def __init__(self):
        self.occupancy: dict[int, set[int]] = {}
        self._label_sites: Counter = Counter()

    @property
    def alive_labels(self) -> set[int]:
        return set(self._label_sites)

    def is_alive(self, label: int) -> bool:
        return label in self._label_sites

    def recompute_alive(self) -> set[int]:
        out = set()
        for labels in self.occupancy.values():
            out |= labels
        return out

    def particle_count(self) -> int:
        return sum(len(v) for v in self.occupancy.values())

    def labels_at(self, x: int) -> set[int]:
        return self.occupancy.get(x, set())

    def __bool__(self):
        return bool(self.occupancy)

    def _add(self, x: int, labels) -> None:
        site = self.occupancy.setdefault(x, set())
        for a in labels:
            if a not in site:
                site.add(a)
                self._label_sites[a] += 1

    def _take(self, x: int) -> set[int]:
        labels = self.occupancy.pop(x, None)
        if not labels:
            return set()
        sites = self._label_sites
        for a in labels:
            sites[a] -= 1
            if not sites[a]:
                del sites[a]
        return labels

    def __repr__(self):
        return f"ParticleConfig(occupied={len(self.occupancy)}, alive={len(self._label_sites)})"


def init_particles(A) -> ParticleConfig:
    config = ParticleConfig()
    for x in A:
        config._add(int(x), (int(x),))
    return config


def _targets(g: Digraph, x: int, slots, bits) -> list[int]:
    base = g.offsets[x]
    out = []
    for slot, bit in zip(slots, bits):
        if not bit:
            y = int(g.heads[base + slot])
            if y not in out:
                out.append(y)
    return out


def _step(g: Digraph, config: ParticleConfig, x: int, slots, bits):
    """Apply one ring at x; returns the outcome code or None if x was empty."""
    if x not in config.occupancy:
        return None
    labels = config._take(x)
    targets = _targets(g, x, slots, bits)
    for y in targets:
        config._add(y, labels)
    if not targets:
        return DIE
    return BRANCH if len(targets) > 1 else MOVE


def step(g: Digraph, config: ParticleConfig, ev: MarkEvent) -> ParticleConfig:
    """Apply one event in place and return the configuration."""
    _step(g, config, ev.vertex, ev.neighbor_slots, ev.bias_bits)
    return config


def _run(g, config, vertices, slots, bits):
    for x, sl, bt in zip(vertices.tolist(), slots.tolist(), bits.tolist()):
        if x in config.occupancy:
            _step(g, config, x, sl, bt)
            if not config.occupancy:
                return


def run_backward(g: Digraph, reversed_stream: MarkStream, A) -> dict[int, bool]:
    """Run COBRAD from one particle per vertex of ``A``; report which labels survive."""
    config = init_particles(A)
    if len(reversed_stream):
        _run(g, config, reversed_stream.vertices, reversed_stream.slots, reversed_stream.bits)
    return {int(a): config.is_alive(int(a)) for a in A}


@numba.njit(cache=True)
def _survival_kernel(heads, offsets, occupied, index, count, t, T, p, s, u):
    """Advance the occupied-set chain using uniforms ``u``; resumable.

    Returns (count, t, status) with status 1 = survived to T, 0 = extinct,
    -1 = uniforms exhausted.
    """
    need = 2 + 2 * s
    i = 0
    while count > 0:
        if i + need > len(u):
            return count, t, -1
        t += -np.log(1.0 - u[i]) / count
        if t > T:
            return count, t, 1
        k = min(int(u[i + 1] * count), count - 1)
        v = occupied[k]
        count -= 1
        last = occupied[count]
        occupied[k] = last
        index[last] = k
        index[v] = -1
        d = offsets[v + 1] - offsets[v]
        for j in range(s):
            slot = min(int(u[i + 2 + 2 * j] * d), d - 1)
            if u[i + 3 + 2 * j] >= p:
                y = heads[offsets[v] + slot]
                if index[y] < 0:
                    index[y] = count
                    occupied[count] = y
                    count += 1
        i += need
    return count, t, 0


def survives(g: Digraph, x: int, p: float, s: int, T: float, rng: np.random.Generator,
             batch: int = 4096) -> bool:
    """One fresh realization: does the label started at ``x`` live through [0, T]?

    Only the clocks of occupied vertices matter, so the run is driven by the
    superposed clock of the occupied set; this has the same law as replaying a
    full stream. A ring draws 2 + 2s uniforms: gap, vertex, then (slot, bit)
    per sample.
    """
    occupied = np.empty(g.n, dtype=np.int64)
    index = np.full(g.n, -1, dtype=np.int64)
    occupied[0] = x
    index[x] = 0
    count, t = 1, 0.0
    while True:
        count, t, status = _survival_kernel(g.heads, g.offsets, occupied, index, count, t,
                                            float(T), float(p), s, rng.random(batch))
        if status >= 0:
            return bool(status)


def estimate_survival(g: Digraph, p: float, s: int, x, T: float, trials: int,
                      rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo P(label survives to T) with its standard error.

    ``x`` may be a vertex id or ``None``; with ``None`` each trial starts from a
    uniformly chosen vertex, which estimates the vertex-averaged survival.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    for _ in range(trials):
        start = int(rng.integers(g.n)) if x is None else int(x)
        hits += survives(g, start, p, s, T, rng)
    est = hits / trials
    return est, math.sqrt(est * (1.0 - est) / trials)


def tally_outcomes(g: Digraph, p: float, s: int, rng: np.random.Generator, min_events: int,
                   horizon: float = 50.0) -> np.ndarray:
    """Count die/move/branch outcomes over events that hit occupied vertices.

    Runs COBRAD from a particle on every vertex over fresh streams of length
    ``horizon``, restarting whenever needed, until ``min_events`` occupied-vertex
    events are seen. Branching onto a single distinct vertex counts as a move.
    Outcomes depend only on which vertices are occupied, so labels are not tracked.
    """
    counts = [0, 0, 0]
    heads = g.heads.tolist()
    offsets = g.offsets.tolist()
    while sum(counts) < min_events:
        occupied = [True] * g.n
        n_occupied = g.n
        for _, vertices, slots, bits in iter_event_chunks(g.d_plus, horizon, s, p, rng):
            for x, sl, bt in zip(vertices.tolist(), slots.tolist(), bits.tolist()):
                if not occupied[x]:
                    continue
                occupied[x] = False
                n_occupied -= 1
                base = offsets[x]
                targets = {heads[base + slot] for slot, bit in zip(sl, bt) if not bit}
                for y in targets:
                    if not occupied[y]:
                        occupied[y] = True
                        n_occupied += 1
                counts[min(len(targets), BRANCH)] += 1
            if not n_occupied:
                break
    return np.array(counts, dtype=np.int64)
