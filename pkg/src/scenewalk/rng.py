"""Counter-based randomness.

Every random quantity in the package is a pure function of
(master seed, stream tag, counter).  This is what makes scenery windows
extendable without replaying history and makes replicate-level parallelism
trivially reproducible: value number k of stream s never depends on how many
values were drawn before it.

The generator is the splitmix64 output function applied to an affine counter
sequence, vectorized with uint64 wraparound arithmetic.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix_int(x: int) -> int:
    """splitmix64 finalizer on a Python int (exact, no numpy overflow)."""
    x &= _MASK
    x ^= x >> 30
    x = (x * _MIX1) & _MASK
    x ^= x >> 27
    x = (x * _MIX2) & _MASK
    x ^= x >> 31
    return x


def derive(seed: int, *tags) -> int:
    """Derive a subkey from a master seed and a sequence of tags.

    Tags may be ints or strings; the result is a 64-bit int usable as
    another seed or as a counter-stream key.
    """
    h = _mix_int(int(seed) ^ 0x5851F42D4C957F2D)
    for t in tags:
        if isinstance(t, str):
            for b in t.encode():
                h = _mix_int(h ^ b)
        else:
            h = _mix_int(h ^ _mix_int(int(t)))
    return h


def _mix_u64(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    return x


def counter_u64(key: int, counter) -> np.ndarray:
    """Raw 64-bit output for the given counters of stream `key`."""
    c = np.asarray(counter, dtype=np.uint64)
    state = np.uint64(key & _MASK) + (c + np.uint64(1)) * np.uint64(_GAMMA)
    return _mix_u64(state)


def counter_uniform(key: int, counter) -> np.ndarray:
    """Uniforms in the open interval (0, 1), one per counter."""
    bits = counter_u64(key, counter) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def counter_rademacher(key: int, counter) -> np.ndarray:
    """Fair signs in {-1.0, +1.0}, one per counter."""
    bit = (counter_u64(key, counter) >> np.uint64(63)).astype(np.float64)
    return 2.0 * bit - 1.0


def counter_normal(key: int, counter) -> np.ndarray:
    """Standard normals via Box-Muller; consumes counters 2c and 2c+1."""
    c = np.asarray(counter, dtype=np.uint64)
    u1 = counter_uniform(key, c * np.uint64(2))
    u2 = counter_uniform(key, c * np.uint64(2) + np.uint64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def grid_counter(rep, k, sub: int = 0) -> np.ndarray:
    """Pack (replicate, site index, substream) into a single counter.

    Supports rep < 2^29 and |k| < 2^31; collision-free within a stream.
    """
    r = np.asarray(rep, dtype=np.uint64)
    kk = (np.asarray(k, dtype=np.int64) + np.int64(1 << 31)).astype(np.uint64)
    return (r << np.uint64(35)) | (kk << np.uint64(3)) | np.uint64(sub)


def np_rng(seed: int, *tags) -> np.random.Generator:
    """A numpy Generator keyed off the same derivation chain.

    Used for bulk draws (walk steps, Brownian increments) where
    per-index addressability is not needed.
    """
    return np.random.default_rng(derive(seed, *tags))
