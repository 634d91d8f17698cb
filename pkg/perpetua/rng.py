"""Seeded random streams and chunked parallel Monte Carlo.

A master seed is split into named streams with ``SeedSequence.spawn_key``,
so a stream depends only on ``(seed, key)``. Batches are cut into chunks of
a fixed size, each chunk gets its own stream, and chunk results are
returned in chunk order: the outcome of a run does not depend on how many
threads executed it.
"""

import os
import secrets
import struct
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar, Union

import daiquiri
import numpy as np

from .exceptions import ValidationError

logger = daiquiri.getLogger(__name__)

CHUNK_SIZE = 1000
THREADS_ENV = 'LPL_THREADS'

T = TypeVar('T')
SeedLike = Union[int, np.random.Generator]


def _key_part(part) -> int:
    if isinstance(part, float):
        # exact bit pattern, so distinct times give distinct streams
        return struct.unpack('<Q', struct.pack('<d', part))[0]
    if isinstance(part, str):
        return int.from_bytes(part.encode(), 'little')
    return int(part)


def stream(seed: int, *key) -> np.random.Generator:
    """Return the generator of the stream named `key` under master `seed`."""
    spawn_key = tuple(_key_part(part) for part in key)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=spawn_key))


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)


def draw_master_seed() -> int:
    """Draw a fresh 64-bit master seed. Callers log it so the run can be replayed."""
    seed = secrets.randbits(63)
    logger.info('no seed given, drew master seed %d', seed)
    return seed


def resolve_threads(threads: int = None) -> int:
    """Worker count: `threads`, else ``$LPL_THREADS``, else 1.

    :raises ValidationError: If the environment value is not a positive integer.
    """
    if threads is None:
        raw = os.environ.get(THREADS_ENV, '1')
        try:
            threads = int(raw)
        except ValueError:
            threads = 0
        if threads < 1:
            raise ValidationError(f'{THREADS_ENV} must be a positive integer, not {raw!r}.')
    return max(1, threads)


def chunk_sizes(total: int, chunk_size: int = CHUNK_SIZE) -> List[int]:
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def map_chunks(
        func: Callable[[np.random.Generator, int], T],
        total: int,
        seed: int,
        *key,
        threads: int = 1,
        chunk_size: int = CHUNK_SIZE) -> List[T]:
    """Run ``func(rng, size)`` over fixed-size chunks of `total` samples.
    Chunk ``i`` draws from ``stream(seed, *key, i)``.
    """
    sizes = chunk_sizes(total, chunk_size)
    tasks = [(stream(seed, *key, i), size) for i, size in enumerate(sizes)]
    threads = resolve_threads(threads)
    if threads == 1 or len(tasks) < 2:
        return [func(rng, size) for rng, size in tasks]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(lambda task: func(*task), tasks))


def map_indexed(func: Callable[[int], T], count: int, threads: int = 1) -> List[T]:
    """Run ``func(i)`` for ``i < count`` and return the results in index order.
    Used for per-task streams such as one tree per index."""
    threads = resolve_threads(threads)
    if threads == 1 or count < 2:
        return [func(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, range(count)))
