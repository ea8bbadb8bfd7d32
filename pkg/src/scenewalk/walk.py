"""Simple symmetric random walk, occupation counts and the scenery functional.

The occupation count N_n(k) counts the visits of S_1..S_n to site k (the
start point S_0 = 0 is deliberately not counted).  The foundational sanity
check of the whole package is the identity

    sum_{j=1..n} xi_{S_j}  =  sum_k xi_k N_n(k)

which `evaluate_functional` verifies on every call by computing both routes
with identical summation order and demanding bit equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.stats import binom

from . import rng, scenery
from .errors import WindowTooSmall
from .scenery import SceneryWindow

# Fixed batching policy: results never depend on how work is chunked.
CHUNK_ELEMS = 1 << 24


@dataclass(frozen=True)
class WalkPath:
    """Positions S_1..S_n of a simple symmetric walk started at S_0 = 0."""

    n: int
    positions: np.ndarray
    seed: int

    def __post_init__(self):
        self.positions.setflags(write=False)


@dataclass(frozen=True)
class OccupationProfile:
    """Dense visit counts over [k_min, k_min + len(counts) - 1]."""

    k_min: int
    counts: np.ndarray

    def __post_init__(self):
        self.counts.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def count(self, k: int) -> int:
        i = int(k) - self.k_min
        if 0 <= i < len(self.counts):
            return int(self.counts[i])
        return 0


@dataclass(frozen=True)
class FunctionalSample:
    """Z_n = sum xi_{S_j} and its n^{-3/4} normalization z."""

    n: int
    Z: float
    z: float
    model_id: str
    seeds: tuple


def sample_walk(n: int, seed: int) -> WalkPath:
    """n i.i.d. +-1 steps, cumulatively summed; deterministic per seed."""
    if n < 1:
        raise ValueError("walk length must be >= 1")
    gen = rng.np_rng(seed, "walk")
    steps = 2 * gen.integers(0, 2, size=n, dtype=np.int64) - 1
    return WalkPath(n=n, positions=np.cumsum(steps), seed=seed)


def walk_positions_batches(n: int, reps: int, seed: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (replicate offset, positions matrix) chunks for `reps` walks.

    Chunking is a fixed function of n, so results built from these batches
    are independent of any parallelism hint.
    """
    rows = max(1, CHUNK_ELEMS // max(1, n))
    done = 0
    chunk_id = 0
    while done < reps:
        r = min(rows, reps - done)
        gen = rng.np_rng(seed, "walkbatch", chunk_id)
        steps = 2 * gen.integers(0, 2, size=(r, n), dtype=np.int32) - 1
        yield done, np.cumsum(steps, axis=1, dtype=np.int32)
        done += r
        chunk_id += 1


def occupation(path: WalkPath) -> OccupationProfile:
    """Exact visit counts N_n(k) over the visited range."""
    s = path.positions
    k_min = int(s.min())
    counts = np.bincount(s - k_min)
    return OccupationProfile(k_min=k_min, counts=counts.astype(np.int64))


def occupation_counts_batch(positions: np.ndarray) -> tuple[int, np.ndarray]:
    """Visit-count matrix for a batch of walks, aligned to a common k_min."""
    k_min = int(positions.min())
    width = int(positions.max()) - k_min + 1
    r = positions.shape[0]
    flat = (positions - k_min).astype(np.int64) + width * np.arange(r, dtype=np.int64)[:, None]
    counts = np.bincount(flat.ravel(), minlength=r * width).reshape(r, width)
    return k_min, counts


def max_excursion(path: WalkPath) -> int:
    """max_j |S_j| over j = 1..n."""
    return int(np.max(np.abs(path.positions)))


def evaluate_functional(
    window: SceneryWindow, path: WalkPath, auto_extend: bool = True
) -> FunctionalSample:
    """Z_n by direct path summation, cross-checked against the occupation route.

    Both routes bin by site and sum over visited sites in ascending order,
    which makes their float results identical; any disagreement indicates a
    counting bug and raises immediately.
    """
    need = max_excursion(path)
    if window.K < need:
        if not auto_extend:
            raise WindowTooSmall(f"window half-width {window.K} < walk range {need}")
        window = scenery.extend(window, need)
    xi = window.values

    # direct route: pre-bin the path by site (sorted unique), then sum
    sites_d, visits_d = np.unique(path.positions, return_counts=True)
    z_direct = float(np.dot(xi[window.K + sites_d], visits_d.astype(np.float64)))

    # occupation route: iterate the profile's sites ascending
    prof = occupation(path)
    nz = np.nonzero(prof.counts)[0]
    sites_o = prof.k_min + nz
    z_occ = float(np.dot(xi[window.K + sites_o], prof.counts[nz].astype(np.float64)))

    if z_direct != z_occ:
        raise AssertionError(
            f"occupation identity violated: direct {z_direct!r} != occupation {z_occ!r}"
        )
    z = z_direct / float(path.n) ** 0.75
    return FunctionalSample(
        n=path.n, Z=z_direct, z=z, model_id=window.model_id, seeds=(window.seed, path.seed)
    )


def self_intersection(profile: OccupationProfile) -> tuple[int, float]:
    """(sum_k N(k)^2, n^{-3/2} sum_k N(k)^2) -- raw value is an exact integer."""
    c = profile.counts
    raw = int(np.dot(c, c))
    n = profile.n
    return raw, raw / float(n) ** 1.5


def expected_scaled_self_intersection(n: int) -> float:
    """Exact E[n^{-3/2} sum N_n(k)^2] from binomial return probabilities.

    E[sum N^2] = sum_{j,j'} P(S_j = S_j') = n + 2 sum_{d<n} (n-d) P(S_d = 0).
    Converges to 8/(3 sqrt(2 pi)) as n grows.
    """
    d = np.arange(2, n, 2)
    p0 = binom.pmf(d // 2, d, 0.5)
    return (n + 2.0 * np.sum((n - d) * p0)) / float(n) ** 1.5
