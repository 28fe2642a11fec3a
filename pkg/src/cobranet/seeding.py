"""Deterministic seed derivation and trial fan-out."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

GRAPH = 0
TRIALS = 1


def derive_seeds(seed: int, count: int, *key: int) -> list[int]:
    """``count`` independent 64-bit seeds for the sub-stream named by ``key``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return [int(x) for x in ss.generate_state(count, dtype=np.uint64)]


def derive_seed(seed: int, *key: int) -> int:
    return derive_seeds(seed, 1, *key)[0]


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("COBRANET_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def fan_out(fn, jobs, threads: int = 1) -> list:
    """Map ``fn`` over ``jobs`` in order; results do not depend on ``threads``."""
    jobs = list(jobs)
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))
