"""Estimators for the hypotheses and conclusion of the limit theorem.

Everything here is Monte Carlo with explicit standard errors; "consistent
with zero" always means |estimate| < 4 SE.  Absolute values are applied to
the estimates (unbiased estimation of |E[...]| is impossible), which biases
small true values upward by about one SE -- the reported SEs quantify it.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from . import pipeline, rng, scenery, torus
from .errors import (
    BudgetExceeded,
    DegenerateVariance,
    EmptySample,
    InsufficientReps,
    InvalidBlocks,
    InvalidModel,
    OrbitCapExceeded,
)
from .scenery import IIDScenery, SceneryModel
from .torus import Observable, TorusMap

_CHUNK_REPS = 1 << 16
ZERO_SIGMAS = 4.0  # the package-wide "consistent with zero" convention


# ---------------------------------------------------------------------------
# Autocovariance and the long-run variance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AutocovSeries:
    """Lag products rho(p) = E[xi_0 xi_p], the long-run variance estimate
    sigma2 = rho(0) + 2 sum rho(p), and the weighted tail sum
    W = sum sqrt(1+p) |rho(p)| (the summability diagnostic)."""

    lags: np.ndarray
    rho: np.ndarray
    se: np.ndarray
    sigma2: float
    sigma2_se: float
    weighted_sum: float
    tail_indicator: float
    reps: int


def autocovariance(model: SceneryModel, P: int, reps: int, seed: int) -> AutocovSeries:
    """Estimate E[xi_0 xi_p] for p = 0..P over `reps` independent windows."""
    if reps < 2:
        raise InsufficientReps("autocovariance needs reps >= 2")
    if P < 0:
        raise InvalidModel("P must be >= 0")
    s1 = np.zeros(P + 1)
    s2 = np.zeros(P + 1)
    done = 0
    while done < reps:
        r = min(_CHUNK_REPS, reps - done)
        v = scenery.values_batch(model, P, seed, reps=r, rep_offset=done)
        prods = v[:, P : P + 1] * v[:, P : 2 * P + 1]
        s1 += prods.sum(axis=0)
        s2 += np.square(prods).sum(axis=0)
        done += r
    rho = s1 / reps
    var = np.maximum(s2 / reps - rho**2, 0.0) * reps / (reps - 1)
    se = np.sqrt(var / reps)
    sigma2 = float(rho[0] + 2.0 * rho[1:].sum())
    sigma2_se = float(np.sqrt(se[0] ** 2 + 4.0 * np.sum(se[1:] ** 2)))
    w = np.sqrt(1.0 + np.arange(P + 1))
    return AutocovSeries(
        lags=np.arange(P + 1),
        rho=rho,
        se=se,
        sigma2=sigma2,
        sigma2_se=sigma2_se,
        weighted_sum=float(np.dot(w, np.abs(rho))),
        tail_indicator=float(w[-1] * abs(rho[-1])),
        reps=reps,
    )


# ---------------------------------------------------------------------------
# Fourth-moment condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    """N^{-2} sum over quadruples in [0,N)^4 of |E[xi_k1 xi_k2 xi_k3 xi_k4]|."""

    n_grid: np.ndarray
    estimates: np.ndarray
    ses: np.ndarray
    max_min_ratio: float
    analytic: bool


def _gap_triples(n_max: int):
    """(g1, g2, g3) >= 0 with span <= n_max - 1, plus the multiplicity of the
    ordered quadruples collapsing to the sorted tuple (0, g1, g1+g2, span)."""
    out = []
    for g1 in range(n_max):
        for g2 in range(n_max - g1):
            for g3 in range(n_max - g1 - g2):
                idx = (0, g1, g1 + g2, g1 + g2 + g3)
                mult = factorial(4)
                for v in set(idx):
                    mult //= factorial(idx.count(v))
                out.append((g1, g2, g3, idx, mult))
    return out


def _rademacher_quadruple_expectation(idx) -> float:
    """E[xi_a xi_b xi_c xi_d] for i.i.d. fair signs: 1 iff indices pair up."""
    return 1.0 if all(idx.count(v) % 2 == 0 for v in set(idx)) else 0.0


def fourth_moment_check(
    model: SceneryModel,
    n_grid,
    reps: int,
    seed: int,
    analytic: bool = False,
    n_cap: int = 48,
) -> MomentReport:
    """Boundedness check of the quadruple-sum moment condition.

    Stationarity collapses the O(N^4) quadruple sum to O(N^3) sorted gap
    triples, each weighted by (N - span) base positions times the number of
    ordered rearrangements.  In analytic mode (i.i.d. rademacher only) the
    per-triple expectations are exact, reproducing N^{-2}(3N^2 - 2N).
    """
    n_grid = np.asarray(sorted(int(v) for v in n_grid))
    n_max = int(n_grid[-1])
    if n_max > n_cap:
        raise BudgetExceeded(f"max N {n_max} exceeds cap {n_cap}; raise n_cap explicitly")
    triples = _gap_triples(n_max)

    if analytic:
        if not (isinstance(model, IIDScenery) and model.dist == "rademacher"):
            raise InvalidModel("analytic mode is only available for i.i.d. rademacher")
        est = {t[:3]: _rademacher_quadruple_expectation(t[3]) for t in triples}
        ses = {t[:3]: 0.0 for t in triples}
    else:
        if reps < 2:
            raise InsufficientReps("fourth_moment_check needs reps >= 2")
        K = n_max - 1
        v = scenery.values_batch(model, K, seed, reps=reps)
        base = K  # column of site 0
        est, ses = {}, {}
        for g1, g2, g3, idx, _ in triples:
            prod = (
                v[:, base]
                * v[:, base + g1]
                * v[:, base + g1 + g2]
                * v[:, base + g1 + g2 + g3]
            )
            est[(g1, g2, g3)] = float(prod.mean())
            ses[(g1, g2, g3)] = float(prod.std(ddof=1) / np.sqrt(reps))

    estimates = np.empty(len(n_grid))
    errs = np.empty(len(n_grid))
    for i, N in enumerate(n_grid):
        total = 0.0
        var = 0.0
        for g1, g2, g3, idx, mult in triples:
            span = g1 + g2 + g3
            if span >= N:
                continue
            w = (N - span) * mult
            e, s = est[(g1, g2, g3)], ses[(g1, g2, g3)]
            # soft-threshold at 2 SE: summing raw |noise| over O(N^3) triples
            # would otherwise inject a positive bias growing like N^2 * SE
            total += w * max(abs(e) - 2.0 * s, 0.0)
            var += (w * s) ** 2
        estimates[i] = total / N**2
        errs[i] = np.sqrt(var) / N**2
    ratio = float(estimates.max() / estimates.min()) if estimates.min() > 0 else np.inf
    return MomentReport(
        n_grid=n_grid, estimates=estimates, ses=errs, max_min_ratio=ratio, analytic=analytic
    )


# ---------------------------------------------------------------------------
# Characteristic-function decorrelation (condition 5)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharCovReport:
    blocks: tuple
    modulus: float
    se: float
    reps: int


def char_cov_check(
    model: SceneryModel, blocks, alphas, betas, reps: int, seed: int
) -> CharCovReport:
    """|Cov(e^{i sum alpha_k xi_k}, e^{i sum beta_k xi_k})| over two index blocks."""
    n1, n2, n3, n4 = (int(b) for b in blocks)
    if not (0 <= n1 <= n2 <= n3 <= n4):
        raise InvalidBlocks(f"blocks must satisfy 0 <= n1 <= n2 <= n3 <= n4, got {blocks}")
    alphas = np.asarray(alphas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    if len(alphas) != n2 - n1 + 1 or len(betas) != n4 - n3 + 1:
        raise InvalidBlocks("coefficient lengths must match block lengths")
    if reps < 2:
        raise InsufficientReps("char_cov_check needs reps >= 2")
    K = n4
    su = 0.0 + 0.0j
    sv = 0.0 + 0.0j
    suv = 0.0 + 0.0j
    sq = 0.0
    done = 0
    while done < reps:
        r = min(_CHUNK_REPS, reps - done)
        vals = scenery.values_batch(model, K, seed, reps=r, rep_offset=done)
        u = np.exp(1j * (vals[:, K + n1 : K + n2 + 1] @ alphas))
        w = np.exp(1j * (vals[:, K + n3 : K + n4 + 1] @ betas))
        su += u.sum()
        sv += w.sum()
        uv = u * w
        suv += uv.sum()
        sq += float(np.sum(np.abs(uv) ** 2))
        done += r
    mu, mv, muv = su / reps, sv / reps, suv / reps
    cov = muv - mu * mv
    # SE of the product-mean term dominates the covariance estimator
    var_uv = max(sq / reps - abs(muv) ** 2, 0.0) * reps / (reps - 1)
    se = float(np.sqrt(var_uv / reps))
    return CharCovReport(blocks=(n1, n2, n3, n4), modulus=float(abs(cov)), se=se, reps=reps)


# ---------------------------------------------------------------------------
# Covariance decay under the map (Hypothesis point 1 evidence)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayReport:
    ns: np.ndarray
    estimates: np.ndarray  # |Cov(g, h o T^n)|
    ses: np.ndarray
    rate: float | None  # fitted log-linear decay rate, None if below noise
    residual: float | None
    below_noise_floor: bool


def covariance_decay(
    tmap: TorusMap,
    g: Observable,
    h: Observable,
    n_max: int,
    reps: int,
    seed: int,
    n_cap: int = scenery.MAX_HALF_WIDTH,
) -> DecayReport:
    """Estimate |Cov_nu(g, h o T^n)| for n = 0..n_max from uniform starts."""
    if n_max > n_cap:
        raise OrbitCapExceeded(f"n_max {n_max} exceeds cap {n_cap}")
    if reps < 2:
        raise InsufficientReps("covariance_decay needs reps >= 2")
    d = tmap.dim
    key = rng.derive(seed, "decay")
    pts = rng.counter_u64(key, np.arange(reps * d)).reshape(reps, d)
    g0 = g(torus.lattice_points(pts))
    mf = tmap._u64(forward=True).T
    ns = np.arange(n_max + 1)
    est = np.empty(n_max + 1)
    ses = np.empty(n_max + 1)
    cur = pts
    for n in ns:
        if n > 0:
            cur = cur @ mf
        hn = h(torus.lattice_points(cur))
        prod = g0 * hn
        cov = prod.mean() - g0.mean() * hn.mean()
        est[n] = abs(cov)
        ses[n] = prod.std(ddof=1) / np.sqrt(reps)
    fit_mask = (ns >= 1) & (est > ZERO_SIGMAS * ses) & (est > 0)
    if fit_mask.sum() >= 3:
        x = ns[fit_mask].astype(float)
        y = np.log(est[fit_mask])
        coef = np.polyfit(x, y, 1)
        resid = float(np.max(np.abs(np.polyval(coef, x) - y)))
        return DecayReport(ns, est, ses, rate=float(coef[0]), residual=resid, below_noise_floor=False)
    return DecayReport(ns, est, ses, rate=None, residual=None, below_noise_floor=True)


def collision_horizon(tmap: TorusMap, g: Observable, h: Observable, n_max: int) -> int:
    """Largest n in [1, n_max] at which a Fourier mode of h, pushed through
    (M^n)^T, collides with +-(a mode of g); 0 if no collision.

    E_nu[e^{2 pi i a.x} e^{2 pi i b.(T^n x)}] vanishes unless a + (M^n)^T b = 0,
    so Cov(g, h o T^n) is exactly zero beyond this horizon.
    """
    gset = set()
    for f, _, _ in g.modes():
        if any(f):
            gset.add(f)
            gset.add(tuple(-v for v in f))
    horizon = 0
    for n in range(1, n_max + 1):
        p = tmap.power(n)
        pt = [list(col) for col in zip(*p)]  # transpose, exact ints
        for f, _, _ in h.modes():
            if not any(f):
                continue
            img = tuple(sum(pt[i][j] * f[j] for j in range(tmap.dim)) for i in range(tmap.dim))
            if img in gset or tuple(-v for v in img) in gset:
                horizon = n
    return horizon


# ---------------------------------------------------------------------------
# Empirical characteristic function and two-sample KS
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ECF:
    t: np.ndarray
    phi: np.ndarray  # complex
    se: np.ndarray
    count: int


def ecf(samples, t_grid) -> ECF:
    """phi_hat(t) = mean of e^{i t X}; exact 1 at t = 0, |phi_hat| <= 1."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise EmptySample("ecf needs at least one sample")
    t = np.asarray(t_grid, dtype=np.float64)
    phi = np.empty(len(t), dtype=np.complex128)
    se = np.empty(len(t))
    for i, ti in enumerate(t):
        terms = np.exp(1j * ti * x)
        phi[i] = terms.mean()
        se[i] = np.sqrt(terms.real.var(ddof=1) + terms.imag.var(ddof=1)) / np.sqrt(x.size)
    return ECF(t=t, phi=phi, se=se, count=int(x.size))


@dataclass(frozen=True)
class KSReport:
    D: float
    n_a: int
    n_b: int
    threshold: float


def ks_two_sample(a, b, alpha_coeff: float = 1.3581) -> KSReport:
    """Exact two-sample Kolmogorov-Smirnov statistic via a merged sort.

    The threshold field is the asymptotic alpha = 0.05 quantile
    c(alpha) * sqrt((n_a + n_b) / (n_a n_b)).
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise EmptySample("ks_two_sample needs two nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    thr = alpha_coeff * np.sqrt((a.size + b.size) / (a.size * b.size))
    return KSReport(D=d, n_a=int(a.size), n_b=int(b.size), threshold=float(thr))


# ---------------------------------------------------------------------------
# Variance scaling of the functional
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceScalingReport:
    n_grid: np.ndarray
    variances: np.ndarray
    prefactors: np.ndarray  # Var(Z_n) / n^{3/2}
    slope: float
    residual: float
    reps: int


def variance_scaling(
    model: SceneryModel, n_grid, reps: int, seed: int
) -> VarianceScalingReport:
    """Least-squares exponent of Var(Z_n) against n on a geometric grid."""
    if reps < 2:
        raise InsufficientReps("variance_scaling needs reps >= 2")
    n_grid = np.asarray(sorted(int(v) for v in n_grid))
    variances = np.empty(len(n_grid))
    for i, n in enumerate(n_grid):
        Z, _ = pipeline.z_samples(model, int(n), reps, rng.derive(seed, "vscale", int(n)))
        variances[i] = np.var(Z, ddof=1)
    if np.any(variances <= 0):
        raise DegenerateVariance("Var(Z_n) vanished on the grid; scenery is degenerate")
    coef = np.polyfit(np.log(n_grid.astype(float)), np.log(variances), 1)
    resid = float(
        np.max(np.abs(np.polyval(coef, np.log(n_grid.astype(float))) - np.log(variances)))
    )
    return VarianceScalingReport(
        n_grid=n_grid,
        variances=variances,
        prefactors=variances / n_grid.astype(float) ** 1.5,
        slope=float(coef[0]),
        residual=resid,
        reps=reps,
    )
