"""Volume-preserving map from an elliptical to a circular Gaussian uncertainty."""
from dataclasses import dataclass
import math

import numpy as np

from ._num import robust_ceil


@dataclass(frozen=True, eq=False)
class EllipticalUncertainty:
    """2x2 symmetric positive-definite covariance (m^2)."""

    covariance: np.ndarray

    def __post_init__(self):
        c = np.array(self.covariance, dtype=float)
        if c.shape != (2, 2):
            raise ValueError("covariance must be 2x2")
        if abs(c[0, 1] - c[1, 0]) > 1e-12 * max(1.0, np.abs(c).max()):
            raise ValueError("covariance must be symmetric")
        c = 0.5 * (c + c.T)
        if np.linalg.eigvalsh(c)[0] <= 0:
            raise ValueError("covariance must be positive definite")
        c.flags.writeable = False
        object.__setattr__(self, "covariance", c)


def _spd(cov):
    if isinstance(cov, EllipticalUncertainty):
        return cov.covariance
    return EllipticalUncertainty(cov).covariance


def whitening_transform(cov):
    """Unit-determinant ``T`` with ``T cov T.T`` a multiple of the identity.

    ``T = W / sqrt(det W)`` where ``W = Lambda**-1/2 Q.T`` from the
    eigendecomposition ``cov = Q Lambda Q.T``; ``Q`` is taken as a rotation
    so ``det T = +1``.
    """
    c = _spd(cov)
    lam, Q = np.linalg.eigh(c)
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    W = (Q / np.sqrt(lam)).T
    return W / math.sqrt(np.linalg.det(W))


def spectral_sqrt(cov):
    """Symmetric square root ``Q Lambda**1/2 Q.T``."""
    lam, Q = np.linalg.eigh(_spd(cov))
    return (Q * np.sqrt(lam)) @ Q.T


def whitened_covariance(cov):
    """``T cov T.T``, equal to ``c**2 I`` with ``c**2 = sqrt(det cov)``."""
    c = _spd(cov)
    T = whitening_transform(c)
    return T @ c @ T.T


@dataclass(frozen=True)
class EllipticalRegion:
    """``{x : x.T shape**-1 x <= level**2}``; ``level = inf`` is the whole plane."""

    shape: tuple
    level: float

    def contains(self, x, y):
        if math.isinf(self.level):
            return np.ones(np.shape(x), dtype=bool)
        s = np.asarray(self.shape, dtype=float)
        inv = np.linalg.inv(s)
        q = inv[0, 0] * x * x + 2.0 * inv[0, 1] * x * y + inv[1, 1] * y * y
        return q <= self.level ** 2

    def transformed(self, T):
        """Image ``T B``, again elliptical with shape ``T shape T.T``."""
        s = np.asarray(self.shape, dtype=float)
        return EllipticalRegion(tuple(map(tuple, T @ s @ T.T)), self.level)


@dataclass(frozen=True)
class PreservationCheck:
    mass_original: float
    mass_transformed: float
    difference: float
    half_width_95: float
    n: int


def verify_probability_preservation(cov, region, n_mc=1_000_000, seed=0, common_draws=True):
    """Monte Carlo masses of ``B`` under ``N(0, cov)`` and of ``T B`` under ``N(0, T cov T.T)``.

    With ``common_draws`` both sides push the same standard-normal draws
    through their own spectral square roots, so an identity transform gives
    identical masses. Otherwise each side gets an independent stream.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    c = _spd(cov)
    T = whitening_transform(c)
    c2 = T @ c @ T.T
    ss = np.random.SeedSequence(seed)
    z = np.random.default_rng(ss).standard_normal((2, int(n_mc)))
    z2 = z if common_draws else np.random.default_rng(ss.spawn(1)[0]).standard_normal((2, int(n_mc)))
    x = spectral_sqrt(c) @ z
    x2 = spectral_sqrt(0.5 * (c2 + c2.T)) @ z2
    in1 = region.contains(x[0], x[1])
    in2 = region.transformed(T).contains(x2[0], x2[1])
    m1, m2 = float(in1.mean()), float(in2.mean())
    d = in1.astype(float) - in2.astype(float)
    hw = 1.96 * float(d.std()) / math.sqrt(n_mc)
    return PreservationCheck(m1, m2, m1 - m2, hw, int(n_mc))


def transformed_radius(cov, level):
    """Radius of the disc ``T B`` for the ``level``-sigma ellipse ``B`` of ``cov``."""
    return level * math.sqrt(math.sqrt(np.linalg.det(_spd(cov))))


def region_scan_time(Td, radius, rho, a=1.0):
    """``a Td ceil(radius**2 / rho**2)`` for a circular region of the given radius."""
    if a < 1:
        raise ValueError("a must be at least 1")
    return a * Td * robust_ceil(radius * radius / (rho * rho))


def lattice_scan_steps(region, rho):
    """Footprint count for ``region`` on a square lattice of pitch ``sqrt(pi) rho``.

    Each footprint disc has the lattice cell's area, so the count tracks
    ``area / (pi rho**2)`` and differs from it only through boundary cells.
    """
    s = np.asarray(region.shape, dtype=float)
    reach = region.level * math.sqrt(np.linalg.eigvalsh(s)[-1])
    h = math.sqrt(math.pi) * rho
    k = math.ceil(reach / h) + 1
    g = np.arange(-k, k + 1) * h
    X, Y = np.meshgrid(g, g)
    return int(region.contains(X, Y).sum())
