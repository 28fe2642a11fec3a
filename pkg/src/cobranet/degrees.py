"""Prescribed in/out-degree sequences and the block profiles that generate them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

GENERABLE = "generable"
THEORY_VALID = "theory_valid"


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    count: int
    d_in: int
    d_out: int

    def __post_init__(self):
        if self.count < 1:
            raise ProfileError(f"block count must be >= 1, got {self.count}")
        if self.d_in < 0:
            raise ProfileError(f"in-degree must be >= 0, got {self.d_in}")
        if self.d_out < 1:
            raise ProfileError(f"out-degree must be >= 1, got {self.d_out}")


@dataclass(frozen=True)
class DegreeProfile:
    """Run-length encoding of a degree sequence: ``count`` vertices per (d_in, d_out)."""

    blocks: tuple[Block, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ProfileError("profile has no blocks")

    @property
    def n(self) -> int:
        return sum(b.count for b in self.blocks)

    @classmethod
    def from_blocks(cls, blocks) -> "DegreeProfile":
        out = []
        for b in blocks:
            if isinstance(b, Block):
                out.append(b)
            elif isinstance(b, dict):
                try:
                    out.append(Block(int(b["count"]), int(b["d_in"]), int(b["d_out"])))
                except KeyError as e:
                    raise ProfileError(f"block missing field {e}") from None
            else:
                out.append(Block(*map(int, b)))
        return cls(tuple(out))

    @classmethod
    def from_json(cls, text: str) -> "DegreeProfile":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ProfileError(f"profile is not valid JSON: {e}") from None
        if not isinstance(obj, dict) or not isinstance(obj.get("blocks"), list):
            raise ProfileError('profile must be an object with a "blocks" list')
        return cls.from_blocks(obj["blocks"])

    @classmethod
    def load(cls, path) -> "DegreeProfile":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        blocks = [{"count": b.count, "d_in": b.d_in, "d_out": b.d_out} for b in self.blocks]
        return json.dumps({"blocks": blocks})

    def dump(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DegreeSequence:
    d_minus: np.ndarray
    d_plus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d_minus", _frozen(self.d_minus))
        object.__setattr__(self, "d_plus", _frozen(self.d_plus))
        if self.d_minus.ndim != 1 or self.d_minus.shape != self.d_plus.shape:
            raise ValueError("in- and out-degree sequences must be 1-d and of equal length")
        if len(self.d_plus) == 0:
            raise ValueError("empty degree sequence")
        if self.d_minus.min() < 0:
            raise ValueError("negative in-degree")
        if self.d_plus.min() < 1:
            raise ValueError("every vertex needs out-degree >= 1")

    @property
    def n(self) -> int:
        return len(self.d_plus)

    @property
    def m(self) -> int:
        """Total out-degree; equals the total in-degree for generable sequences."""
        return int(self.d_plus.sum())

    @property
    def delta_max(self) -> int:
        return int(self.d_plus.max())

    def degree_classes(self) -> dict[tuple[int, int], int]:
        """Multiplicity of each distinct (d_in, d_out) pair."""
        pairs, counts = np.unique(np.stack([self.d_minus, self.d_plus], axis=1), axis=0, return_counts=True)
        return {(int(a), int(b)): int(c) for (a, b), c in zip(pairs, counts)}

    def __eq__(self, other):
        if not isinstance(other, DegreeSequence):
            return NotImplemented
        return np.array_equal(self.d_minus, other.d_minus) and np.array_equal(self.d_plus, other.d_plus)

    __hash__ = None


def build_sequence(profile: DegreeProfile) -> DegreeSequence:
    counts = [b.count for b in profile.blocks]
    d_minus = np.repeat([b.d_in for b in profile.blocks], counts)
    d_plus = np.repeat([b.d_out for b in profile.blocks], counts)
    return DegreeSequence(d_minus, d_plus)


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def validate(seq: DegreeSequence, mode: str = GENERABLE, delta: float = 1.0) -> ValidationReport:
    """Check the matching condition and, in ``theory_valid`` mode, the minimum out-degree.

    The bounded max-degree and bounded (2+delta)-moment hypotheses are asymptotic;
    they are only reported as warnings when the values look large for this n.
    """
    if mode not in (GENERABLE, THEORY_VALID):
        raise ValueError(f"unknown validation mode {mode!r}")
    violations = []
    warnings = []
    s_in, s_out = int(seq.d_minus.sum()), int(seq.d_plus.sum())
    if s_in != s_out:
        violations.append(f"degree sums differ: sum d_in = {s_in}, sum d_out = {s_out}")
    if mode == THEORY_VALID:
        lo = int(seq.d_plus.min())
        if lo < 2:
            violations.append(f"min out-degree < 2 (found {lo})")
        root_n = math.sqrt(seq.n)
        if seq.delta_max > max(root_n, 64):
            warnings.append(f"large max out-degree: {seq.delta_max} (n = {seq.n})")
        moment = _moment(seq.d_minus, 2 + delta)
        if moment > root_n * max(1.0, float(np.mean(seq.d_minus)) ** (2 + delta)):
            warnings.append(f"large (2+{delta})-moment of in-degrees: {moment:.6g}")
    return ValidationReport(not violations, violations, warnings)


def _moment(d: np.ndarray, order: float) -> float:
    return math.fsum(np.asarray(d, dtype=float) ** order) / len(d)


@dataclass(frozen=True)
class SequenceStats:
    rho: float
    lam: float
    delta_max: int
    moment_2_plus_delta: float


def rho_lambda_exact(seq: DegreeSequence) -> tuple[Fraction, Fraction]:
    """(rho, lambda) as exact rationals, grouped by out-degree over a common denominator."""
    outs, inverse, counts = np.unique(seq.d_plus, return_inverse=True, return_counts=True)
    in_mass = np.zeros(len(outs), dtype=np.int64)
    np.add.at(in_mass, inverse, seq.d_minus)
    outs = outs.tolist()
    L = math.lcm(*outs)
    rho_num = sum(w * (L // d) for d, w in zip(outs, in_mass.tolist()))
    lam_num = sum(c * (L // d) for d, c in zip(outs, counts.tolist()))
    return Fraction(rho_num, seq.m * L), Fraction(lam_num, seq.n * L)


def compute_stats(seq: DegreeSequence, delta: float = 1.0) -> SequenceStats:
    if delta <= 0:
        raise ValueError("delta must be positive")
    if seq.m <= 0 or int(seq.d_minus.sum()) != seq.m:
        raise ValueError("statistics need a generable sequence with m > 0")
    rho, lam = rho_lambda_exact(seq)
    return SequenceStats(float(rho), float(lam), seq.delta_max, _moment(seq.d_minus, 2 + delta))
