"""Counter-based random streams for reproducible, chunked sampling.

Every block of samples owns an independent Philox stream keyed by
``(seed, stream tag, block index)``. Samples are drawn in blocks of a fixed
size, so the sample set for a given ``(seed, n)`` does not depend on how many
worker threads process the blocks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 16
THREADS_ENV = "WIGNERXFT_THREADS"

FORWARD_STREAM = 0
REVERSE_STREAM = 1

_MAX_SEED = 2**64 - 1

T = TypeVar("T")


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= _MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def block_generator(seed: int, block: int, stream: int = FORWARD_STREAM) -> np.random.Generator:
    """Independent generator for one block of one stream."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def standard_normals(gen: np.random.Generator, size: int) -> np.ndarray:
    """Box-Muller standard normals from the generator's uniform doubles."""
    m = (size + 1) // 2
    u1 = 1.0 - gen.random(m)  # (0, 1], keeps log finite
    u2 = gen.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:size]


def block_sizes(n: int, block_size: int = BLOCK_SIZE) -> list[int]:
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    full, rest = divmod(n, block_size)
    return [block_size] * full + ([rest] if rest else [])


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def map_blocks(fn: Callable[[int], T], n_blocks: int, threads: int | None = None) -> list[T]:
    """Apply ``fn`` to every block index; results come back in block order."""
    threads = thread_count() if threads is None else threads
    if threads <= 1 or n_blocks <= 1:
        return [fn(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=min(threads, n_blocks)) as pool:
        return list(pool.map(fn, range(n_blocks)))

