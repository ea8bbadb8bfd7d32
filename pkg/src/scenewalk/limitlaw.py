"""Sampling the limit variable Delta = int L_1(x) dB_x.

Conditionally on the Brownian path b, Delta is centered Gaussian with
variance V = int L_1(x)^2 dx, so one draw is sqrt(sigma2) * sqrt(V) * g
with g standard normal.  Two independent discretizations of V are provided:

* walk method: V = m^{-3/2} sum_k N_m(k)^2 for a fresh m-step walk (exact
  integer arithmetic before scaling, no bandwidth parameter);
* brownian method: simulate b on a grid of m increments, bin its occupation
  measure into cells of width 2*eps centered on the lattice 2*eps*Z, and
  square the histogram local time.

A direct discretization of the stochastic integral itself is available as
method "direct" for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng, walk
from .errors import BadResolution, NegativeVariance

_CHUNK_ELEMS = 1 << 24


@dataclass(frozen=True)
class VSample:
    """One draw of the squared-local-time integral V = int L_1(x)^2 dx."""

    value: float
    method: str
    m: int
    eps: float | None
    seed: int


@dataclass(frozen=True)
class DeltaSample:
    """One draw of sqrt(sigma2) * Delta, with its conditional variance V."""

    delta: float
    V: float
    sigma2: float
    g: float
    seed: int


def _check_resolution(method: str, m: int, eps: float | None) -> None:
    if m < 1:
        raise BadResolution(f"m must be >= 1, got {m}")
    if method in ("brownian", "direct") and (eps is None or eps <= 0):
        raise BadResolution(f"eps must be > 0 for the {method} method, got {eps}")
    if method not in ("walk", "brownian", "direct"):
        raise BadResolution(f"unknown V method {method!r}")


def sample_v_batch(
    reps: int, seed: int, method: str = "walk", m: int = 10_000, eps: float | None = 0.05
) -> np.ndarray:
    """`reps` independent V draws; deterministic per (seed, method, m, eps)."""
    _check_resolution(method, m, eps)
    if method == "walk":
        out = np.empty(reps, dtype=np.float64)
        for off, pos in walk.walk_positions_batches(m, reps, rng.derive(seed, "vwalk")):
            _, counts = walk.occupation_counts_batch(pos)
            c = counts.astype(np.float64)
            out[off : off + counts.shape[0]] = np.einsum("ij,ij->i", c, c)
        return out / float(m) ** 1.5
    # brownian occupation-histogram route
    out = np.empty(reps, dtype=np.float64)
    rows = max(1, _CHUNK_ELEMS // m)
    done = 0
    chunk_id = 0
    while done < reps:
        r = min(rows, reps - done)
        gen = rng.np_rng(seed, "vbrown", chunk_id)
        b = np.cumsum(gen.normal(0.0, 1.0 / np.sqrt(m), size=(r, m)), axis=1)
        cells = np.rint(b / (2.0 * eps)).astype(np.int64)
        _, counts = walk.occupation_counts_batch(cells)
        c = counts.astype(np.float64)
        out[done : done + r] = np.einsum("ij,ij->i", c, c) / (m * m * 2.0 * eps)
        done += r
        chunk_id += 1
    return out


def sample_v(
    seed: int, method: str = "walk", m: int = 10_000, eps: float | None = 0.05
) -> VSample:
    v = float(sample_v_batch(1, seed, method=method, m=m, eps=eps)[0])
    return VSample(value=v, method=method, m=m, eps=eps if method != "walk" else None, seed=seed)


def sample_delta_batch(
    sigma2: float,
    reps: int,
    seed: int,
    method: str = "walk",
    m: int = 10_000,
    eps: float | None = 0.05,
) -> tuple[np.ndarray, np.ndarray]:
    """(delta, V) arrays for `reps` draws of sqrt(sigma2) * Delta.

    The standard-normal mixers g are counter-based, so deltas with matched
    (seed, method, m, eps) and different sigma2 differ exactly by the factor
    sqrt(sigma2' / sigma2).
    """
    if sigma2 < 0:
        raise NegativeVariance(f"sigma2 must be >= 0, got {sigma2}")
    _check_resolution(method, m, eps)
    if method == "direct":
        return _delta_direct_batch(sigma2, reps, seed, m, eps)
    v = sample_v_batch(reps, seed, method=method, m=m, eps=eps)
    g = rng.counter_normal(rng.derive(seed, "mixer"), np.arange(reps))
    return np.sqrt(sigma2) * np.sqrt(v) * g, v


def _delta_direct_batch(sigma2, reps, seed, m, eps):
    """Discretize int L_1(x) dB_x cell by cell instead of mixing one normal."""
    out = np.empty(reps, dtype=np.float64)
    vout = np.empty(reps, dtype=np.float64)
    rows = max(1, _CHUNK_ELEMS // m)
    done = 0
    chunk_id = 0
    while done < reps:
        r = min(rows, reps - done)
        gen = rng.np_rng(seed, "vbrown", chunk_id)
        b = np.cumsum(gen.normal(0.0, 1.0 / np.sqrt(m), size=(r, m)), axis=1)
        cells = np.rint(b / (2.0 * eps)).astype(np.int64)
        _, counts = walk.occupation_counts_batch(cells)
        lhat = counts.astype(np.float64) / (m * 2.0 * eps)  # local time per cell
        gen2 = rng.np_rng(seed, "scenery-bm", chunk_id)
        db = gen2.normal(0.0, np.sqrt(2.0 * eps), size=lhat.shape)
        out[done : done + r] = np.sqrt(sigma2) * np.einsum("ij,ij->i", lhat, db)
        vout[done : done + r] = np.einsum("ij,ij->i", lhat, lhat) * 2.0 * eps
        done += r
        chunk_id += 1
    return out, vout


def sample_delta(
    sigma2: float,
    seed: int,
    method: str = "walk",
    m: int = 10_000,
    eps: float | None = 0.05,
) -> DeltaSample:
    delta, v = sample_delta_batch(sigma2, 1, seed, method=method, m=m, eps=eps)
    if method == "direct":
        g = float("nan")  # no single mixing normal on the direct route
    else:
        g = float(rng.counter_normal(rng.derive(seed, "mixer"), np.arange(1))[0])
    return DeltaSample(delta=float(delta[0]), V=float(v[0]), sigma2=sigma2, g=g, seed=seed)


def delta_cf(u_grid, v_samples) -> np.ndarray:
    """E[exp(i u Delta)] estimated as the mean of exp(-u^2 V / 2).

    Real-valued, 1 at u = 0, strictly decreasing in |u| for fixed samples.
    """
    from .errors import EmptySample

    v = np.asarray(v_samples, dtype=np.float64)
    if v.size == 0:
        raise EmptySample("delta_cf needs at least one V sample")
    u = np.asarray(u_grid, dtype=np.float64)
    return np.exp(-0.5 * np.square(u)[:, None] * v[None, :]).mean(axis=1)
