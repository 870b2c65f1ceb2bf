"""Deterministic splittable random streams.

Every variate consumed anywhere in this package is a pure function of
(master seed, stream index, step index), built from the SplitMix64 output
function

    mix64(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
               z ^= z >> 27;  z *= 0x94D049BB133111EB
               z ^= z >> 31                               (mod 2**64)

applied to distinct points of a golden-ratio progression:

    stream key    key(s, r) = mix64(s + (r + 1) * GOLDEN)
    t-th variate  u(key, t) = top 53 bits of mix64(key + (t + 1) * GOLDEN),
                              scaled to [0, 1)

Because nothing is stateful, parallel ensembles are reproducible under any
scheduling, chunking or thread count, and enlarging an ensemble reuses its
existing replicates verbatim.  Seed banks use a second odd increment so
bank-derived seeds never ride the same progression as replicate keys.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
BANK_GAMMA = 0xD1B54A32D192ED03
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
INV53 = 2.0**-53


def mix64(z: int) -> int:
    """SplitMix64 output function of a 64-bit integer."""
    z &= MASK64
    z ^= z >> 30
    z = (z * MIX_A) & MASK64
    z ^= z >> 27
    z = (z * MIX_B) & MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, index: int) -> int:
    """Key of stream `index` under `master_seed`."""
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    return mix64(master_seed + (index + 1) * GOLDEN)


def replicate_seed(master_seed: int, index: int) -> int:
    """Seed whose stream 0 coincides with stream `index` of `master_seed`.

    stream_key(replicate_seed(s, r), 0) == stream_key(s, r), so any single
    replicate of an ensemble can be rerun in isolation.
    """
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    return (master_seed + index * GOLDEN) & MASK64


def bank_seed(master_seed: int, bank: int) -> int:
    """Master seed of disjoint seed bank `bank`."""
    if bank < 0:
        raise ValueError("bank index must be nonnegative")
    return mix64(master_seed + (bank + 1) * BANK_GAMMA)


def step_uniform(key: int, t: int) -> float:
    """The t-th uniform variate of a stream, in [0, 1)."""
    return (mix64(key + (t + 1) * GOLDEN) >> 11) * INV53


def stream_keys(master_seed: int, n: int) -> np.ndarray:
    """Keys of streams 0..n-1 as a uint64 array (vectorized stream_key)."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(master_seed & MASK64) + idx * np.uint64(GOLDEN)
    return _mix64_array(z)


def uniforms(key: int, n: int) -> np.ndarray:
    """First n variates of a stream (vectorized step_uniform)."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(key & MASK64) + idx * np.uint64(GOLDEN)
    return (_mix64_array(z) >> np.uint64(11)) * INV53


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(MIX_A)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(MIX_B)
    return z ^ (z >> np.uint64(31))
