"""Spectral representation of the operator and the problem definition.

The operator A is carried purely by the ordered list of its eigenvalue
frequencies lambda_k (A e_k = lambda_k^2 e_k, multiplicity by repetition).
Everything downstream is modal, so no spatial discretization exists anywhere
in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroInitialData,
    DimensionMismatch,
    InvalidBand,
    NonPositiveEigenvalue,
    NonPositiveGamma,
)

__all__ = [
    "Spectrum",
    "Problem",
    "BandDecomposition",
    "build_problem",
    "decompose",
    "weighted_norm_sq",
    "laplacian_interval_spectrum",
]


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d sequence of reals")
    return arr


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ordered eigenvalue frequencies lambda_k of a coercive operator.

    Invariants: nonempty, strictly positive, sorted nondecreasing.
    Duplicates express multiplicity.
    """

    eigenvalues: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.eigenvalues, "eigenvalues")
        if arr.size == 0:
            raise NonPositiveEigenvalue("spectrum must be nonempty")
        if not np.all(arr > 0.0):
            raise NonPositiveEigenvalue("all eigenvalue frequencies must be > 0")
        if np.any(np.diff(arr) < 0.0):
            raise ValueError("eigenvalues must be sorted nondecreasing")
        arr.flags.writeable = False
        object.__setattr__(self, "eigenvalues", arr)

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def lam(self) -> np.ndarray:
        return self.eigenvalues

    @property
    def lam2(self) -> np.ndarray:
        return self.eigenvalues**2

    @property
    def sigma0(self) -> float:
        """Coercivity constant: the smallest eigenvalue of A."""
        return float(self.eigenvalues[0] ** 2)


@dataclass(frozen=True, eq=False)
class Problem:
    """A validated modal Cauchy problem.

    nu is the smallest frequency carrying nonzero initial data; modes below
    nu are carried as identical zeros rather than truncated away.
    """

    spectrum: Spectrum
    gamma: float
    epsilon: float
    u0: np.ndarray
    u1: np.ndarray
    nu: float

    @property
    def b0(self) -> float:
        """Initial coefficient value |A^{1/2}u0|^{2 gamma}."""
        g = float(np.dot(self.spectrum.lam2, self.u0**2))
        return g**self.gamma

    @property
    def dim(self) -> int:
        return len(self.spectrum)

    def nu_band(self) -> np.ndarray:
        """Boolean mask of the modes at the base frequency nu."""
        return self.spectrum.lam == self.nu


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """Split of a coefficient vector into base / middle / high frequency bands.

    low + mid + high reconstructs the input exactly; the three supports are
    disjoint (pure masking, no arithmetic on coefficients).
    """

    low: np.ndarray
    mid: np.ndarray
    high: np.ndarray


def build_problem(eigenvalues, gamma: float, epsilon: float, u0, u1) -> Problem:
    """Validate inputs and assemble a Problem, sorting modes by frequency.

    Raises AllZeroInitialData, DimensionMismatch, NonPositiveEigenvalue,
    NonPositiveGamma, or ValueError (epsilon out of (0, 1]).
    """
    lam = _as_vector(eigenvalues, "eigenvalues")
    c0 = _as_vector(u0, "u0")
    c1 = _as_vector(u1, "u1")
    if not (lam.size == c0.size == c1.size):
        raise DimensionMismatch(
            f"eigenvalues ({lam.size}), u0 ({c0.size}) and u1 ({c1.size}) "
            "must have the same length"
        )
    if lam.size == 0:
        raise NonPositiveEigenvalue("need at least one mode")
    if not np.all(lam > 0.0):
        raise NonPositiveEigenvalue("all eigenvalue frequencies must be > 0")
    if not (gamma > 0.0):
        raise NonPositiveGamma(f"gamma must be > 0, got {gamma}")
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not np.any(c0 != 0.0):
        raise AllZeroInitialData("u0 must have at least one nonzero entry")

    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    c0 = c0[order].copy()
    c1 = c1[order].copy()
    active = (c0 != 0.0) | (c1 != 0.0)
    nu = float(lam[active].min())
    c0.flags.writeable = False
    c1.flags.writeable = False
    return Problem(
        spectrum=Spectrum(lam),
        gamma=float(gamma),
        epsilon=float(epsilon),
        u0=c0,
        u1=c1,
        nu=nu,
    )


def decompose(u, spectrum: Spectrum, nu: float, mu: float) -> BandDecomposition:
    """Split u into the nu-band, the open middle band and the [mu, inf) band.

    Modes with lambda_k < nu land in the low part so that the three masks
    partition every index; under the zero-mode invariant those entries are
    zero anyway.
    """
    if not (mu > nu):
        raise InvalidBand(f"need mu > nu, got mu={mu}, nu={nu}")
    vec = _as_vector(u, "u")
    if vec.size != len(spectrum):
        raise DimensionMismatch(
            f"vector length {vec.size} != spectrum length {len(spectrum)}"
        )
    lam = spectrum.lam
    low_mask = lam <= nu
    high_mask = lam >= mu
    mid_mask = ~(low_mask | high_mask)
    return BandDecomposition(
        low=np.where(low_mask, vec, 0.0),
        mid=np.where(mid_mask, vec, 0.0),
        high=np.where(high_mask, vec, 0.0),
    )


def weighted_norm_sq(u, spectrum: Spectrum, h: float) -> float:
    """Squared norm with spectral weight: sum_k lambda_k^{2h} u_k^2.

    h = 0 gives the plain squared Euclidean norm; h = 1 the energy norm.
    """
    vec = _as_vector(u, "u")
    if vec.size != len(spectrum):
        raise DimensionMismatch(
            f"vector length {vec.size} != spectrum length {len(spectrum)}"
        )
    if h < 0:
        raise ValueError("h must be nonnegative")
    if h == 0:
        return float(np.dot(vec, vec))
    return float(np.dot(spectrum.lam ** (2.0 * h), vec**2))


def laplacian_interval_spectrum(count: int, length: float) -> Spectrum:
    """Dirichlet-Laplacian preset on an interval: lambda_k = k*pi/length."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not (length > 0.0):
        raise ValueError("length must be > 0")
    k = np.arange(1, count + 1, dtype=np.float64)
    return Spectrum(k * math.pi / length)
