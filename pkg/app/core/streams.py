"""Keyed random substreams.

Every Monte Carlo draw comes from a generator keyed by (seed, stream tag, ..., batch index),
so results depend only on the seed and the trial count, never on how batches are scheduled
across workers.
"""

import zlib
from typing import Iterator, Tuple, Union

import numpy as np

# Trials are simulated in fixed-size batches; the batch size is part of the stream schedule.
BATCH_SIZE = 4096

STREAM_MSE = "mse"
STREAM_RATE = "rate"
STREAM_ORTHOGONALITY = "orthogonality"


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf8"))


def substream(seed: int, tag: str, *keys: int) -> np.random.Generator:
    """Return an independent generator for the given key path."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(_tag_key(tag), *keys))
    return np.random.default_rng(sequence)


def batch_sizes(trials: int, batch_size: int = BATCH_SIZE) -> Iterator[Tuple[int, int]]:
    """Yield (batch_index, size) covering ``trials`` in fixed-size chunks."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    full, rest = divmod(trials, batch_size)
    for index in range(full):
        yield index, batch_size
    if rest:
        yield full, rest


def complex_normal(rng: np.random.Generator, variance: Union[np.ndarray, float], size) -> np.ndarray:
    """Circular complex Gaussian samples: real and imaginary parts each carry variance/2."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
