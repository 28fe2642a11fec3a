"""Closed-form predictions for the two-sample (s = 2) dynamics.

Every function takes a keyword ``s`` and refuses anything but 2: the
closed forms below exist only for two sampled neighbours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .degrees import DegreeSequence, rho_lambda_exact

SUBCRITICAL = "Subcritical"
SUPERCRITICAL = "Supercritical"


class TheoryUnavailable(ValueError):
    pass


def _require_s2(s: int) -> None:
    if s != 2:
        raise TheoryUnavailable(f"theory available only for s=2 (got s={s})")


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"bias p must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class OutcomeProbs:
    p0: float  # die
    p1: float  # move
    p2: float  # branch

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p0, self.p1, self.p2)

    @property
    def mean_offspring(self) -> float:
        return self.p1 + 2.0 * self.p2


@dataclass(frozen=True)
class Regime:
    tag: str
    p_c: float
    z_star: float


def outcome_probs_for_degree(d: int, p: float, *, s: int = 2) -> OutcomeProbs:
    """Fate of a particle sitting at a vertex with ``d`` children."""
    _require_s2(s)
    _check_p(p)
    if d < 1:
        raise ValueError("degree must be >= 1")
    q = 1.0 - p
    p1 = q * (2.0 * (1.0 - 1.0 / d) * p + (1.0 / d) * (1.0 + p))
    p2 = (1.0 - 1.0 / d) * q * q
    return OutcomeProbs(p * p, p1, p2)


def averaged_outcome_probs(rho: float, p: float, *, s: int = 2) -> OutcomeProbs:
    _require_s2(s)
    _check_p(p)
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    q = 1.0 - p
    return OutcomeProbs(p * p, q * (2.0 * p - p * rho + rho), (1.0 - rho) * q * q)


def p_critical(rho: float, *, s: int = 2) -> float:
    _require_s2(s)
    if not 0.0 < rho < 1.0:
        raise ValueError(f"p_critical needs rho in (0, 1), got {rho}")
    r = 1.0 - rho
    return (math.sqrt(r) - r) / rho


def z_star(p: float, rho: float, *, s: int = 2) -> float:
    """Extinction probability of the percolated tree below a non-root vertex."""
    _require_s2(s)
    _check_p(p)
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if p >= p_critical(rho):
        return 1.0
    return min(p * p / ((1.0 - p) ** 2 * (1.0 - rho)), 1.0)


def z_hat_root(d_root: int, p: float, rho: float, *, s: int = 2) -> float:
    z = z_star(p, rho, s=s)
    if z == 1.0:
        return 1.0
    r = outcome_probs_for_degree(d_root, p)
    return r.p0 + r.p1 * z + r.p2 * z * z


def q_star_closed(p: float, rho: float, lam: float, *, s: int = 2) -> float:
    _require_s2(s)
    _check_p(p)
    if p == 1.0:
        raise ValueError("q_star is undefined at p = 1")
    first = 1.0 - p * p / ((1.0 - p) ** 2 * (1.0 - rho))
    second = 1.0 - p * p * (lam - rho) / (1.0 - rho)
    return first * second


def q_star_sum(seq: DegreeSequence, p: float, *, s: int = 2) -> float:
    """Vertex average of the root-corrected survival probabilities."""
    _require_s2(s)
    _check_p(p)
    if p == 1.0:
        raise ValueError("q_star is undefined at p = 1")
    rho = float(rho_lambda_exact(seq)[0])
    degrees, counts = np.unique(seq.d_plus, return_counts=True)
    terms = [c * (1.0 - z_hat_root(int(d), p, rho)) for d, c in zip(degrees, counts.tolist())]
    return math.fsum(terms) / seq.n


def classify(p: float, rho: float, *, s: int = 2) -> Regime:
    pc = p_critical(rho, s=s)
    tag = SUPERCRITICAL if p >= pc else SUBCRITICAL
    return Regime(tag, pc, z_star(p, rho, s=s))
