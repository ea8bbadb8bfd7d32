"""Vectorized replicate pipelines shared by the CLI and the stats module."""

from __future__ import annotations

import numpy as np

from . import scenery, walk
from .scenery import SceneryModel


def z_samples(model: SceneryModel, n: int, reps: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Z_n and z = Z_n / n^{3/4} for `reps` independent (scenery, walk) pairs.

    Walk replicate r is paired with scenery replicate r; both are pure
    functions of (seed, r), so the output is independent of chunking.
    """
    Z = np.empty(reps, dtype=np.float64)
    for off, pos in walk.walk_positions_batches(n, reps, seed):
        r = pos.shape[0]
        K = int(np.max(np.abs(pos)))
        xi = scenery.values_batch(model, K, seed, reps=r, rep_offset=off)
        k_min, counts = walk.occupation_counts_batch(pos)
        lo = K + k_min  # column of site k_min in the window matrix
        Z[off : off + r] = np.einsum(
            "ij,ij->i", xi[:, lo : lo + counts.shape[1]], counts.astype(np.float64)
        )
    return Z, Z / float(n) ** 0.75
