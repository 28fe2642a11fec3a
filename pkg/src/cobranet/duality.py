"""Forward opinions versus backward particle extinction on shared randomness."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cobrad import run_backward
from .dcm import Digraph
from .forward import OpinionConfig, run_forward
from .marks import MarkStream, dump_event_log, generate_marks, reverse


@dataclass
class MismatchReport:
    seed: int | None
    mismatches: set[int]
    n_events: int
    blue: set[int] = field(default_factory=set)
    dump_path: str | None = None

    @property
    def ok(self) -> bool:
        return not self.mismatches


def compare(g: Digraph, stream: MarkStream, A) -> tuple[set[int], set[int]]:
    """Run both sides over one stream; returns (mismatching vertices, blue vertices in A)."""
    final = run_forward(g, stream, OpinionConfig.all_red(g.n))
    alive = run_backward(g, reverse(stream), A)
    blue = {x for x in A if final.blue[x]}
    bad = {x for x in A if (x in blue) == alive[x]}
    return bad, blue


def verify_pathwise(g: Digraph, T: float, p: float, s: int, A, seed: int,
                    dump_dir=None) -> MismatchReport:
    """Check c_x(T) = b  <=>  label x extinct, for every x in A, on one realization.

    A non-empty mismatch set is an implementation bug; if ``dump_dir`` is given
    the offending stream is written there for replay.
    """
    A = sorted(set(int(a) for a in A))
    if not A:
        raise ValueError("A must be non-empty")
    stream = generate_marks(g, T, s, p, np.random.default_rng(seed), seed=seed)
    bad, blue = compare(g, stream, A)
    report = MismatchReport(seed, bad, len(stream), blue)
    if bad and dump_dir is not None:
        path = f"{dump_dir}/mismatch-seed{seed}.bin"
        dump_event_log(stream, path, g.n)
        report.dump_path = path
    return report


@dataclass
class DistributionalReport:
    cells: list[frozenset[int]]
    forward: np.ndarray
    backward: np.ndarray
    trials: int

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.forward - self.backward)))

    @property
    def standard_errors(self) -> np.ndarray:
        """Standard error of the difference of the two independent estimates, per cell."""
        var = (self.forward * (1 - self.forward) + self.backward * (1 - self.backward)) / self.trials
        return np.sqrt(var)

    def max_z(self) -> float:
        se = self.standard_errors
        diff = np.abs(self.forward - self.backward)
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 0, math.inf, 0.0))
        return float(z.max())


def verify_distributional(g: Digraph, T: float, p: float, trials: int, rng: np.random.Generator,
                          s: int = 2, A=None) -> DistributionalReport:
    """Estimate both sides of the duality identity from independent streams.

    Cell C (a subset of A) holds P(exactly C blue) on the forward side and
    P(exactly the labels in C extinct) on the backward side.
    """
    if g.n > 4:
        raise ValueError("distributional check is limited to n <= 4")
    A = list(range(g.n)) if A is None else sorted(set(A))
    cells = [frozenset(c) for r in range(len(A) + 1) for c in itertools.combinations(A, r)]
    index = {c: i for i, c in enumerate(cells)}
    fwd = np.zeros(len(cells))
    bwd = np.zeros(len(cells))
    start = OpinionConfig.all_red(g.n)
    for _ in range(trials):
        final = run_forward(g, generate_marks(g, T, s, p, rng), start)
        fwd[index[frozenset(x for x in A if final.blue[x])]] += 1
        alive = run_backward(g, generate_marks(g, T, s, p, rng), A)
        bwd[index[frozenset(x for x in A if not alive[x])]] += 1
    return DistributionalReport(cells, fwd / trials, bwd / trials, trials)
