"""Splittable seeded streams.

Every (seed, stream-id...) key maps to an independent PCG64 stream built from a
SeedSequence spawn key, so parallel trials draw the same numbers regardless of
scheduling.
"""
from __future__ import annotations

import numpy as np

# Stream ids reserved by the model module
SIGNAL_STREAM = 0
NOISE_STREAM = 1
# Stream ids used by algorithms
INIT_STREAM = 2
INJECTION_STREAM = 3
PROBE_STREAM = 4


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for the sub-stream `stream` of `seed`."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *stream: int) -> int:
    """A 63-bit integer seed for the sub-stream; stable across runs and platforms."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(s) for s in stream))
    state = ss.generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def random_unit(n: int, seed: int, *stream: int) -> np.ndarray:
    """Uniform point on the unit sphere (normalized Gaussian)."""
    g = make_rng(seed, *stream).standard_normal(n)
    return g / np.linalg.norm(g)
