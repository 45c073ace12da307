"""Reproducible random streams.

Every stream is a pure function of the master seed and a stream index, so
results never depend on how work is spread across workers.
"""

from typing import List, Tuple

import numpy as np

from src.models.errors import StableDomainError

# Offsets keep path-level and chunk-level streams disjoint
PATH_STREAM = 0
CHUNK_STREAM = 1


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Generator for a single path"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), PATH_STREAM, int(path_index)]))


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """Generator for a fixed-size chunk of an ensemble"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), CHUNK_STREAM, int(chunk_index)]))


def sub_seed(seed: int, *labels: int) -> int:
    """Derive an integer seed for a sub-experiment (e.g. one r of a scan)"""
    entropy = [int(seed)] + [int(label) for label in labels]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint32)[0])


def chunk_bounds(n: int, chunk_size: int) -> List[Tuple[int, int, int]]:
    """Split n paths into (chunk_index, start, stop) triples"""
    if n < 0:
        raise StableDomainError(f"number of paths must be non-negative, got {n}")
    if chunk_size <= 0:
        raise StableDomainError(f"chunk size must be positive, got {chunk_size}")
    return [
        (c, start, min(start + chunk_size, n))
        for c, start in enumerate(range(0, n, chunk_size))
    ]
