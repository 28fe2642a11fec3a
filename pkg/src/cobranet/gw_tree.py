"""The approximating random tree and its {0,1,2}-offspring percolation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import theory
from .degrees import DegreeSequence
from .theory import OutcomeProbs

# Lineage counts are clipped here; extinction from this many independent
# lineages has probability z**(2**40), i.e. zero unless z == 1.
POPULATION_CLIP = 2**40


class ExtinctionNotConverged(RuntimeError):
    def __init__(self, last: float, iterations: int):
        super().__init__(f"fixed-point iteration did not converge after {iterations} steps (last = {last!r})")
        self.last = last
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class OffspringLaw:
    """Out-degree of a vertex drawn proportionally to its in-degree."""

    support: np.ndarray
    probs: np.ndarray

    def mean_inverse(self) -> float:
        return float(np.sum(self.probs / self.support))

    def mixed_outcome_probs(self, p: float) -> OutcomeProbs:
        """Outcome law of a non-root vertex: mixture of the per-degree laws."""
        rows = [theory.outcome_probs_for_degree(int(k), p).as_tuple() for k in self.support]
        p0, p1, p2 = (math.fsum(w * r[i] for w, r in zip(self.probs, rows)) for i in range(3))
        return OutcomeProbs(p0, p1, p2)


def offspring_law(seq: DegreeSequence) -> OffspringLaw:
    m = seq.m
    mass: dict[int, int] = {}
    for (d_in, d_out), c in seq.degree_classes().items():
        mass[d_out] = mass.get(d_out, 0) + c * d_in
    support = sorted(k for k, v in mass.items() if v > 0)
    probs = [float(Fraction(mass[k], m)) for k in support]
    return OffspringLaw(np.array(support, dtype=np.int64), np.array(probs))


def extinction_prob_iterate(probs: OutcomeProbs, tol: float = 1e-14, max_iter: int = 1_000_000) -> float:
    """Smallest root of p0 + p1 z + p2 z^2 = z in [0, 1], by iteration from z = 0."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    p0, p1, p2 = probs.as_tuple()
    z = 0.0
    for i in range(1, max_iter + 1):
        nxt = min(p0 + p1 * z + p2 * z * z, 1.0)
        if abs(nxt - z) < tol:
            return nxt
        z = nxt
    raise ExtinctionNotConverged(z, max_iter)


def extinction_by_generation(d_root: int, law: OffspringLaw, p: float, generations: int) -> float:
    """Exact probability that the percolated tree from a root of degree ``d_root``
    has no vertex alive at depth ``generations``."""
    mixed = law.mixed_outcome_probs(p).as_tuple()
    root = theory.outcome_probs_for_degree(d_root, p).as_tuple()
    z = 0.0
    for _ in range(generations - 1):
        z = mixed[0] + mixed[1] * z + mixed[2] * z * z
    return root[0] + root[1] * z + root[2] * z * z


def _outcome_counts(rng, counts, probs):
    """Split each entry of ``counts`` into (die, move, branch) tallies."""
    return rng.multinomial(counts, probs)


def simulate_tree_population(d_root: int, law: OffspringLaw, p: float, generation_cap: int,
                             trials: int, rng: np.random.Generator) -> np.ndarray:
    """Lineage counts at depth ``generation_cap`` for ``trials`` independent trees.

    Lineages on a tree never meet, so a generation is fully described by how
    many particles it holds. Each particle's vertex draws its out-degree from
    ``law`` and then its die/move/branch outcome for that degree.
    """
    if generation_cap < 1:
        raise ValueError("generation_cap must be >= 1")
    root = theory.outcome_probs_for_degree(d_root, p).as_tuple()
    per_degree = np.array([theory.outcome_probs_for_degree(int(k), p).as_tuple() for k in law.support])
    per_degree /= per_degree.sum(axis=1, keepdims=True)
    law_probs = law.probs / law.probs.sum()

    first = _outcome_counts(rng, np.ones(trials, dtype=np.int64), root)
    alive = first[:, 1] + 2 * first[:, 2]
    for _ in range(generation_cap - 1):
        if not alive.any():
            break
        by_degree = rng.multinomial(alive, law_probs)
        nxt = np.zeros_like(alive)
        for j in range(len(law.support)):
            out = _outcome_counts(rng, by_degree[:, j], per_degree[j])
            nxt += out[:, 1] + 2 * out[:, 2]
        alive = np.minimum(nxt, POPULATION_CLIP)
    return alive


def simulate_percolated_tree(d_root: int, law: OffspringLaw, p: float, generation_cap: int,
                             rng: np.random.Generator) -> bool:
    return bool(simulate_tree_population(d_root, law, p, generation_cap, 1, rng)[0] > 0)


def estimate_tree_survival(d_root: int, law: OffspringLaw, p: float, generation_cap: int,
                           trials: int, rng: np.random.Generator) -> tuple[float, float]:
    """Fraction of trees alive at the generation cap, with its standard error."""
    alive = simulate_tree_population(d_root, law, p, generation_cap, trials, rng) > 0
    est = float(alive.mean())
    return est, math.sqrt(est * (1.0 - est) / trials)


def predicted_red_density(seq: DegreeSequence, p: float) -> float:
    return theory.q_star_sum(seq, p)
