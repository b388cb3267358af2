"""Counter-based random streams.

Sample index i lives in chunk i // CHUNK, and chunk k draws from a Philox
generator keyed by (seed, experiment id, k). Any partition of chunks over workers
therefore sees the same numbers, and the per-chunk partial sums are combined in
chunk order, so results do not depend on the worker count.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

CHUNK = 2**16


def experiment_key(experiment_id: str) -> int:
    return zlib.crc32(experiment_id.encode("utf-8"))


def chunk_rng(seed: int, experiment_id: str, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), experiment_key(experiment_id), int(chunk)])
    return np.random.Generator(np.random.Philox(ss))


def stream_rng(seed: int, experiment_id: str) -> np.random.Generator:
    """A single named stream, for small draws such as picking random test pairs."""
    ss = np.random.SeedSequence([int(seed), experiment_key(experiment_id)])
    return np.random.Generator(np.random.Philox(ss))


def chunk_sizes(n: int, chunk: int = CHUNK) -> list:
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn: Callable[[np.random.Generator, int], Sequence[float]], n: int, seed: int,
               experiment_id: str, workers: int = 1) -> np.ndarray:
    """Apply fn(rng, size) to every chunk; returns the stacked per-chunk results in chunk order."""
    sizes = chunk_sizes(n)

    def job(k):
        return np.asarray(fn(chunk_rng(seed, experiment_id, k), sizes[k]), dtype=float)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(k) for k in range(len(sizes))]
    return np.stack(parts)


def uniform_ball(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """n points uniform in the unit ball of R^dim."""
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = rng.random(n) ** (1.0 / dim)
    return g * rad[:, None]
