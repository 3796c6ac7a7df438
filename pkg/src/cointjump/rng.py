"""Counter-based random streams.

Paths are grouped in fixed-size blocks and every block gets its own Philox
key derived from ``(seed, block index)``. A path therefore always sees the
same random numbers, whatever chunking or worker count is used to reach it.
"""
from __future__ import annotations

from collections.abc import Iterator

import numpy as np

BLOCK_SIZE = 1 << 14


def block_generator(seed: int, block: int) -> np.random.Generator:
    if seed < 0 or block < 0:
        raise ValueError("seed and block index must be nonnegative")
    key = ((seed & ((1 << 64) - 1)) << 64) | block
    return np.random.Generator(np.random.Philox(key=key))


def blocks(seed: int, n_paths: int, block_size: int = BLOCK_SIZE) -> Iterator[tuple[int, int, np.random.Generator]]:
    """Yield ``(first_path, n_in_block, generator)`` covering ``n_paths`` paths."""
    for b, start in enumerate(range(0, n_paths, block_size)):
        yield start, min(block_size, n_paths - start), block_generator(seed, b)
