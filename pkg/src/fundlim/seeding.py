"""Per-trial seed derivation and order-preserving fan-out.

Every Monte-Carlo trial owns its own generator, seeded from
``mix64(base_seed, trial_index)``.  Because no state is shared between
trials, splitting the trials across any number of workers gives bit-identical
per-trial values, and reductions are always done afterwards in trial order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood); a bijective 64-bit avalanche."""
    x = (x + GOLDEN_GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix64(base_seed: int, index: int) -> int:
    """Derive the seed of stream ``index`` from ``base_seed``.

    mix64(b, i) = splitmix64(splitmix64(b) XOR (i * GOLDEN_GAMMA mod 2^64)).
    """
    if base_seed < 0 or index < 0:
        raise ValueError("seeds and indices must be nonnegative")
    return splitmix64(splitmix64(base_seed & MASK64) ^ ((index * GOLDEN_GAMMA) & MASK64))


def trial_seeds(base_seed: int, trials: int) -> np.ndarray:
    return np.array([mix64(base_seed, i) for i in range(trials)], dtype=np.uint64)


def chunked_map(
    fn: Callable[[np.ndarray], T], seeds: np.ndarray, workers: int = 1
) -> list[T]:
    """Apply ``fn`` to contiguous chunks of ``seeds``; results come back in order."""
    workers = max(1, int(workers))
    if workers == 1 or len(seeds) < 2:
        return [fn(seeds)]
    chunks = [c for c in np.array_split(seeds, workers) if len(c)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def mean_and_se(values: Sequence[float] | np.ndarray, axis: int = 0):
    """Sample mean and standard error (ddof=1) along ``axis``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    mean = values.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=axis, ddof=1) / np.sqrt(n)
