"""Trajectory container shared by the stepper, the oracles and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import LinearCoefficient
from .errors import DegenerateTrace
from .spectrum import Problem, Spectrum

__all__ = ["Trace"]


@dataclass(frozen=True, eq=False)
class Trace:
    """Log-spaced samples of one trajectory.

    Either `problem` (self-consistent coefficient) or `coeff` (prescribed
    coefficient) is set. `flushed[i, k]` records whether mode k had been
    flushed to zero by sample i; diagnostics use it to flag below-floor
    weighted values.
    """

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    b: np.ndarray
    B: np.ndarray
    epsilon: float
    spectrum: Spectrum
    problem: Problem | None = None
    coeff: LinearCoefficient | None = None
    flushed: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.t.shape[0]
        k = len(self.spectrum)
        if self.u.shape != (n, k) or self.v.shape != (n, k):
            raise ValueError("state arrays must have shape (n_samples, n_modes)")
        if self.b.shape != (n,) or self.B.shape != (n,):
            raise ValueError("b and B must have one entry per sample")
        if n >= 2 and not np.all(np.diff(self.t) > 0.0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(np.diff(self.B) < 0.0):
            raise ValueError("accumulated B must be nondecreasing")
        nonzero_state = np.any(self.u != 0.0, axis=1)
        if np.any(nonzero_state & (self.b <= 0.0)):
            raise DegenerateTrace("b must be positive wherever u is nonzero")
        if self.flushed is None:
            object.__setattr__(self, "flushed", np.zeros((n, k), dtype=bool))

    # -- basic views ----------------------------------------------------

    @property
    def n_samples(self) -> int:
        return int(self.t.shape[0])

    @property
    def lam(self) -> np.ndarray:
        return self.spectrum.lam

    @property
    def lam2(self) -> np.ndarray:
        return self.spectrum.lam2

    @property
    def gamma(self) -> float | None:
        return self.problem.gamma if self.problem is not None else None

    @property
    def nu(self) -> float:
        """Smallest frequency carrying nonzero initial data."""
        if self.problem is not None:
            return self.problem.nu
        active = (self.u[0] != 0.0) | (self.v[0] != 0.0)
        if not np.any(active):
            return float(self.lam[0])
        return float(self.lam[active].min())

    # -- derived per-sample quantities -----------------------------------

    def accel(self) -> np.ndarray:
        """u'' at every sample, from the equation (never differenced)."""
        return -(self.b[:, None] * self.lam2[None, :] * self.u + self.v) / self.epsilon

    def b_dot(self) -> np.ndarray:
        """Analytic derivative of the coefficient at every sample."""
        if self.coeff is not None:
            return np.asarray(self.coeff.derivative(self.t), dtype=np.float64)
        gamma = self.problem.gamma
        g = np.einsum("k,nk->n", self.lam2, self.u**2)
        s = np.einsum("k,nk->n", self.lam2, self.u * self.v)
        out = np.zeros_like(g)
        pos = g > 0.0
        out[pos] = 2.0 * gamma * s[pos] * g[pos] ** (gamma - 1.0)
        return out

    def lyapunov_energy(self) -> np.ndarray:
        """eps|u'|^2 + |A^{1/2}u|^{2(gamma+1)}/(gamma+1); exactly nonincreasing."""
        if self.problem is None:
            raise ValueError("Lyapunov energy is defined for self-consistent runs")
        g = np.einsum("k,nk->n", self.lam2, self.u**2)
        kin = self.epsilon * np.einsum("nk,nk->n", self.v, self.v)
        gamma = self.problem.gamma
        return kin + g ** (gamma + 1.0) / (gamma + 1.0)

    # -- slicing ----------------------------------------------------------

    def restrict(self, t_min: float = -np.inf, t_max: float = np.inf) -> "Trace":
        """Sub-trace with samples in [t_min, t_max]."""
        mask = (self.t >= t_min) & (self.t <= t_max)
        if not np.any(mask):
            raise ValueError("restriction window contains no samples")
        return Trace(
            t=self.t[mask],
            u=self.u[mask],
            v=self.v[mask],
            b=self.b[mask],
            B=self.B[mask],
            epsilon=self.epsilon,
            spectrum=self.spectrum,
            problem=self.problem,
            coeff=self.coeff,
            flushed=self.flushed[mask],
            meta=dict(self.meta),
        )
