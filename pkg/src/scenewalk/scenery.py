"""Stationary scenery generators.

Four model families produce the doubly infinite value sequence read off by
the walker, materialized on finite windows [-K, K]:

* IID            -- independent values (rademacher signs or gaussians);
* TorusDirect    -- xi_k = f(T^k omega) for a centered observable f;
* TorusCoin      -- signs that are +1 with probability f(T^k omega),
                    conditionally independent given the orbit;
* TorusMulti     -- values theta_j with probability f_j(T^k omega).

All randomness is counter-based and keyed by (master seed, replicate, site
index), so extending a window never changes already-generated values and
replicates can be produced in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng, torus
from .errors import InvalidModel, WindowTooLarge
from .torus import Observable, TorusMap

# Guard against runaway window requests; exact lattice orbits are O(K) each.
MAX_HALF_WIDTH = 1 << 21

_GRID_POINTS = 10_000
_CENTER_MC_POINTS = 100_000


@dataclass(frozen=True)
class IIDScenery:
    dist: str = "rademacher"  # "rademacher" | "gaussian"
    sd: float = 1.0

    @property
    def model_id(self) -> str:
        if self.dist == "gaussian":
            return f"iid-gaussian(sd={self.sd!r})"
        return "iid-rademacher"


@dataclass(frozen=True)
class TorusDirect:
    map: TorusMap
    f: Observable

    @property
    def model_id(self) -> str:
        return f"torus-direct(d={self.map.dim})"


@dataclass(frozen=True)
class TorusCoin:
    map: TorusMap
    f: Observable

    @property
    def model_id(self) -> str:
        return f"torus-coin(d={self.map.dim})"


@dataclass(frozen=True)
class TorusMulti:
    map: TorusMap
    thetas: tuple
    fs: tuple

    @property
    def model_id(self) -> str:
        return f"torus-multi(p={len(self.thetas)},d={self.map.dim})"


SceneryModel = IIDScenery | TorusDirect | TorusCoin | TorusMulti


def value_bound(model: SceneryModel) -> float:
    """Sup-norm bound on |xi_k| (infinite only for gaussian sceneries)."""
    if isinstance(model, IIDScenery):
        return 1.0 if model.dist == "rademacher" else np.inf
    if isinstance(model, TorusDirect):
        return model.f.bound
    if isinstance(model, TorusCoin):
        return 1.0
    return max(abs(t) for t in model.thetas)


def validate_model(model: SceneryModel) -> None:
    """Check the structural constraints of a scenery model.

    Pointwise constraints on observables are checked on a deterministic
    low-discrepancy grid; the TorusMulti centering constraint is checked by
    Monte Carlo at 4 standard errors.
    """
    if isinstance(model, IIDScenery):
        if model.dist not in ("rademacher", "gaussian"):
            raise InvalidModel(f"unknown iid distribution {model.dist!r}")
        if model.dist == "gaussian" and model.sd < 0:
            raise InvalidModel("gaussian sd must be >= 0")
        return
    d = model.map.dim
    grid = torus.kronecker_grid(_GRID_POINTS, d)
    if isinstance(model, TorusDirect):
        if abs(model.f.mean) > 1e-12:
            raise InvalidModel(f"direct scenery needs a centered observable, mean={model.f.mean}")
        return
    if isinstance(model, TorusCoin):
        vals = model.f(grid)
        if vals.min() < -1e-9 or vals.max() > 1 + 1e-9:
            raise InvalidModel("coin scenery observable must map into [0, 1]")
        if abs(model.f.mean - 0.5) > 1e-12:
            raise InvalidModel(f"coin scenery observable must have mean 1/2, got {model.f.mean}")
        return
    if isinstance(model, TorusMulti):
        p = len(model.thetas)
        if p < 2 or len(model.fs) != p:
            raise InvalidModel("multi scenery needs p >= 2 thetas and p matching observables")
        total = np.zeros(len(grid))
        for f in model.fs:
            vals = f(grid)
            if vals.min() < -1e-9:
                raise InvalidModel("multi scenery observables must be nonnegative")
            total += vals
        if np.max(np.abs(total - 1.0)) > 1e-9:
            raise InvalidModel("multi scenery observables must sum to 1 pointwise")
        # centering: sum_j theta_j * int f_j dnu = 0, Monte Carlo at 4 SE
        key = rng.derive(0xC0FFEE, "multi-centering")
        pts = rng.counter_uniform(key, np.arange(_CENTER_MC_POINTS * d)).reshape(-1, d)
        g = np.zeros(len(pts))
        for theta, f in zip(model.thetas, model.fs):
            g += theta * f(pts)
        se = g.std(ddof=1) / np.sqrt(len(g))
        if abs(g.mean()) > max(4.0 * se, 1e-12):
            raise InvalidModel(
                f"multi scenery not centered: sum theta_j E[f_j] = {g.mean():.4g} (4 SE = {4*se:.4g})"
            )
        return
    raise InvalidModel(f"unknown model type {type(model).__name__}")


@dataclass(frozen=True)
class SceneryWindow:
    """Scenery values xi_{-K}..xi_K for one replicate of a model."""

    K: int
    values: np.ndarray
    model: SceneryModel
    seed: int
    rep: int = 0

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def model_id(self) -> str:
        return self.model.model_id

    def __getitem__(self, k: int) -> float:
        return float(self.values[self.K + int(k)])


def _omegas(model, seed: int, rep_lo: int, rep_hi: int, share_omega: bool) -> np.ndarray:
    """Exact fixed-point starting points on the torus, one per replicate."""
    d = model.map.dim
    key = rng.derive(seed, "omega")
    reps = np.arange(rep_lo, rep_hi, dtype=np.uint64)
    if share_omega:
        reps = np.zeros_like(reps)
    ctr = reps[:, None] * np.uint64(d) + np.arange(d, dtype=np.uint64)[None, :]
    return rng.counter_u64(key, ctr)


def values_batch(
    model: SceneryModel,
    K: int,
    seed: int,
    reps: int,
    rep_offset: int = 0,
    share_omega: bool = False,
) -> np.ndarray:
    """Scenery values for replicates [rep_offset, rep_offset + reps).

    Returns an array of shape (reps, 2K+1); column K + k holds xi_k.
    Bit-reproducible as a function of (model, seed, replicate index, k).
    """
    if K < 0:
        raise InvalidModel("window half-width must be >= 0")
    if K > MAX_HALF_WIDTH:
        raise WindowTooLarge(f"half-width {K} exceeds cap {MAX_HALF_WIDTH}")
    lo, hi = rep_offset, rep_offset + reps
    ks = np.arange(-K, K + 1, dtype=np.int64)

    if isinstance(model, IIDScenery):
        ctr = rng.grid_counter(np.arange(lo, hi)[:, None], ks[None, :])
        key = rng.derive(seed, "iid")
        if model.dist == "rademacher":
            return rng.counter_rademacher(key, ctr)
        return model.sd * rng.counter_normal(key, ctr)

    omega = _omegas(model, seed, lo, hi, share_omega)

    if isinstance(model, TorusDirect):
        return torus.orbit_values(model.map, model.f, omega, K)

    zkey = rng.derive(seed, "z")
    z = rng.counter_uniform(zkey, rng.grid_counter(np.arange(lo, hi)[:, None], ks[None, :]))

    if isinstance(model, TorusCoin):
        fvals = torus.orbit_values(model.map, model.f, omega, K)
        return 2.0 * (z <= fvals) - 1.0

    if isinstance(model, TorusMulti):
        # bin l = smallest l with z <= f_1 + ... + f_l along the orbit;
        # the value is theta_l ("equal to theta_j with probability f_j(T^k omega)")
        p = len(model.thetas)
        idx = np.zeros(z.shape, dtype=np.int64)
        cum = np.zeros(z.shape, dtype=np.float64)
        for f in model.fs[: p - 1]:
            cum += torus.orbit_values(model.map, f, omega, K)
            idx += z > cum
        return np.asarray(model.thetas, dtype=np.float64)[idx]

    raise InvalidModel(f"unknown model type {type(model).__name__}")


def generate(model: SceneryModel, K: int, seed: int) -> SceneryWindow:
    """Generate the window of half-width K for replicate 0 of (model, seed)."""
    validate_model(model)
    vals = values_batch(model, K, seed, reps=1)[0]
    return SceneryWindow(K=K, values=vals, model=model, seed=seed)


def extend(window: SceneryWindow, K2: int) -> SceneryWindow:
    """Grow a window to half-width K2; the overlap is bit-identical."""
    if K2 < window.K:
        raise InvalidModel(f"cannot shrink window from {window.K} to {K2}")
    if K2 == window.K:
        return window
    vals = values_batch(window.model, K2, window.seed, reps=1, rep_offset=window.rep)[0]
    return SceneryWindow(K=K2, values=vals, model=window.model, seed=window.seed, rep=window.rep)
