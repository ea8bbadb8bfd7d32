"""Ergodic algebraic torus automorphisms and trigonometric observables.

A map is given by an integer matrix M with det M = 1 whose characteristic
polynomial has no cyclotomic factor (no eigenvalue is a root of unity, so
the induced automorphism of the torus is ergodic for Haar measure).

Two orbit representations coexist:

* a float representation (`step`) for interactive use -- accurate only for
  short orbits because the map is expanding (documented cap below);
* an exact fixed-point representation on the lattice (Z/2^64)^d
  (`orbit_values`), used by the scenery generators.  A unimodular matrix
  acts bijectively on that lattice and uint64 wraparound arithmetic
  implements the action exactly, so orbits of any length are exact and
  bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy

from .errors import NonSquare, NotUnimodular, RootOfUnitySpectrum

# Float orbits of a hyperbolic map lose roughly log2(lambda_max) bits per
# step; beyond this many steps a double-precision orbit of the cat map is
# numerically meaningless.  Exact lattice orbits have no such cap.
FLOAT_ORBIT_CAP = 60

_TWO64 = 2.0**-64


def mod1(x):
    """Reduce coordinates to [0, 1); exact 1.0 maps to 0.0."""
    y = np.asarray(x, dtype=np.float64) % 1.0
    return np.where(y >= 1.0, 0.0, y)


@dataclass(frozen=True)
class TorusMap:
    """Unimodular integer matrix together with its exact integer inverse."""

    dim: int
    matrix: np.ndarray
    inverse: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)
        self.inverse.setflags(write=False)

    def power(self, k: int) -> list[list[int]]:
        """M^k as exact Python-int rows (valid for any k, any magnitude)."""
        base = self.matrix if k >= 0 else self.inverse
        m = sympy.Matrix(base.tolist()) ** abs(k)
        return [[int(v) for v in row] for row in m.tolist()]

    def _u64(self, forward: bool) -> np.ndarray:
        src = self.matrix if forward else self.inverse
        return src.astype(np.int64).astype(np.uint64)


def make_torus_map(M) -> TorusMap:
    """Validate an integer matrix and build a TorusMap.

    Raises NonSquare, NotUnimodular or RootOfUnitySpectrum.
    """
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
        raise NonSquare(f"need a square matrix of dimension >= 2, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise NonSquare("matrix entries must be integers")
        arr = arr.astype(np.int64)
    d = arr.shape[0]
    sm = sympy.Matrix([[int(v) for v in row] for row in arr.tolist()])
    det = sm.det()
    if det != 1:
        raise NotUnimodular(f"det(M) = {det}, must be exactly 1")
    inv = sm.inv()  # integer because det = 1

    # Any eigenvalue that is a root of unity has a cyclotomic minimal
    # polynomial Phi_m dividing the characteristic polynomial, and
    # deg Phi_m = phi(m) <= d.  phi(m) >= sqrt(m/2) bounds the trial list.
    x = sympy.Symbol("x")
    charpoly = sm.charpoly(x)
    for m in range(1, 2 * d * d + 2):
        if sympy.totient(m) > d:
            continue
        phi_m = sympy.Poly(sympy.cyclotomic_poly(m, x), x)
        if sympy.rem(charpoly.as_expr(), phi_m.as_expr(), x) == 0:
            raise RootOfUnitySpectrum(
                f"characteristic polynomial divisible by cyclotomic polynomial Phi_{m}"
            )

    matrix = np.array(arr, dtype=np.int64)
    inverse = np.array([[int(v) for v in row] for row in inv.tolist()], dtype=np.int64)
    return TorusMap(dim=d, matrix=matrix, inverse=inverse)


def step(tmap: TorusMap, x, k: int = 1):
    """Apply the automorphism k times (k < 0 uses the inverse) in floats."""
    y = mod1(np.asarray(x, dtype=np.float64))
    mat = tmap.matrix if k >= 0 else tmap.inverse
    for _ in range(abs(int(k))):
        y = mod1(y @ mat.T.astype(np.float64))
    return y


def step_by_power(tmap: TorusMap, x, k: int):
    """T^k via the exact integer matrix power, one float reduction at the end."""
    p = np.array(tmap.power(k), dtype=np.float64)
    y = mod1(np.asarray(x, dtype=np.float64))
    return mod1(y @ p.T)


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------


class Observable:
    """Bounded trigonometric observable on the torus.

    Subclasses provide vectorized evaluation, an exact mean under Haar
    measure, a sup-norm bound, and their Fourier mode list (used by the
    character-orthogonality oracles in the stats module).
    """

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def bound(self) -> float:
        raise NotImplementedError

    def modes(self) -> list[tuple[tuple[int, ...], float, float]]:
        """List of (frequency vector, coefficient, phase) terms."""
        raise NotImplementedError


@dataclass(frozen=True)
class FourierMode(Observable):
    """cos(2 pi freq.x + phase)."""

    freq: tuple
    phase: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        f = np.asarray(self.freq, dtype=np.float64)
        return np.cos(2.0 * np.pi * (x @ f) + self.phase)

    @property
    def mean(self):
        if any(self.freq):
            return 0.0
        return float(np.cos(self.phase))

    @property
    def bound(self):
        return 1.0

    def modes(self):
        return [(tuple(int(v) for v in self.freq), 1.0, float(self.phase))]


@dataclass(frozen=True)
class TrigPolynomial(Observable):
    """Sum of terms coeff * cos(2 pi freq.x + phase) plus a constant.

    A term with the zero frequency vector is a constant coeff*cos(phase).
    """

    terms: tuple = ()  # ((freq tuple, coeff, phase), ...)
    constant: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape[:-1], self.constant, dtype=np.float64)
        for freq, coeff, phase in self.terms:
            f = np.asarray(freq, dtype=np.float64)
            out += coeff * np.cos(2.0 * np.pi * (x @ f) + phase)
        return out

    @property
    def mean(self):
        m = self.constant
        for freq, coeff, phase in self.terms:
            if not any(freq):
                m += coeff * np.cos(phase)
        return float(m)

    @property
    def bound(self):
        return abs(self.constant) + sum(abs(c) for _, c, _ in self.terms)

    def modes(self):
        return [(tuple(int(v) for v in f), float(c), float(p)) for f, c, p in self.terms]


def affine(constant: float, parts) -> TrigPolynomial:
    """Affine combination constant + sum coeff_i * obs_i of trig observables."""
    terms = []
    const = float(constant)
    for coeff, obs in parts:
        if isinstance(obs, TrigPolynomial):
            const += coeff * obs.constant
        for freq, c, phase in obs.modes():
            terms.append((freq, coeff * c, phase))
    return TrigPolynomial(terms=tuple(terms), constant=const)


# ---------------------------------------------------------------------------
# Exact lattice orbits
# ---------------------------------------------------------------------------


def lattice_points(u: np.ndarray) -> np.ndarray:
    """Convert uint64 fixed-point lattice coordinates to floats in [0, 1)."""
    return u.astype(np.float64) * _TWO64


def orbit_values(tmap: TorusMap, obs: Observable, omega_u64: np.ndarray, K: int) -> np.ndarray:
    """Evaluate obs along the two-sided exact orbit of each starting point.

    omega_u64 has shape (R, d); the result has shape (R, 2K+1) with column
    K + k holding obs(T^k omega).
    """
    R = omega_u64.shape[0]
    out = np.empty((R, 2 * K + 1), dtype=np.float64)
    out[:, K] = obs(lattice_points(omega_u64))
    mf = tmap._u64(forward=True).T
    mb = tmap._u64(forward=False).T
    cur = omega_u64.copy()
    for k in range(1, K + 1):
        cur = cur @ mf
        out[:, K + k] = obs(lattice_points(cur))
    cur = omega_u64.copy()
    for k in range(1, K + 1):
        cur = cur @ mb
        out[:, K - k] = obs(lattice_points(cur))
    return out


def kronecker_grid(n: int, d: int) -> np.ndarray:
    """Deterministic low-discrepancy grid on the torus (additive recurrence)."""
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    while len(primes) < d:
        primes.append(sympy.nextprime(primes[-1]))
    alpha = np.sqrt(np.array(primes[:d], dtype=np.float64))
    i = np.arange(1, n + 1, dtype=np.float64)[:, None]
    return mod1(i * alpha[None, :])
