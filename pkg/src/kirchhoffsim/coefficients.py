"""Prescribed coefficient families for the linear damped system.

Two named families are offered:

* power:    b(t) = K / (1 + t)^p  with K > 0, p in [0, 1]
* constant: b(t) = K              (closed-form oracle runs only)

Only the p = 1 power family satisfies the slow-decay template
(b <= K4/(1+t), |b'|/b <= K4/(1+t), |b'|/b^2 <= K4/K3); the other members
exist for experiments and oracle tests and are marked non-compliant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["LinearCoefficient", "power_coefficient", "constant_coefficient"]

_FAMILIES = ("power", "constant")

# kernel dispatch codes, shared with _kernels
KIND_POWER = 1
KIND_CONSTANT = 2


@dataclass(frozen=True)
class LinearCoefficient:
    family: str
    K: float
    p: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown coefficient family {self.family!r}")
        if not (self.K > 0.0):
            raise ValueError("K must be > 0")
        if self.family == "power" and not (0.0 <= self.p <= 1.0):
            raise ValueError("power family needs p in [0, 1]")

    def value(self, t):
        if self.family == "constant":
            return self.K * _ones_like(t)
        return self.K / (1.0 + t) ** self.p

    def derivative(self, t):
        if self.family == "constant":
            return 0.0 * _ones_like(t)
        return -self.p * self.K / (1.0 + t) ** (self.p + 1.0)

    def rate(self, t):
        """|b'(t)| / b(t)."""
        if self.family == "constant":
            return 0.0 * _ones_like(t)
        return self.p / (1.0 + t)

    def integral(self, t):
        """B(t) = integral of b over [0, t], in closed form."""
        if self.family == "constant":
            return self.K * t
        if abs(1.0 - self.p) < 1e-12:
            return self.K * _log1p(t)
        q = 1.0 - self.p
        return self.K * ((1.0 + t) ** q - 1.0) / q

    @property
    def h2b_compliant(self) -> bool:
        return self.family == "power" and abs(self.p - 1.0) < 1e-12

    def h2b_constants(self) -> tuple[float, float] | None:
        """Witness (K3, K4) for the slow-decay template, when compliant.

        For b = K/(1+t): (1+t)b = K so K3 = K; both (1+t)b and
        (1+t)|b'|/b = 1 are bounded by K4 = max(K, 1), and
        |b'|/b^2 = 1/K <= K4/K3.
        """
        if not self.h2b_compliant:
            return None
        return self.K, max(self.K, 1.0)

    @property
    def kernel_kind(self) -> int:
        return KIND_CONSTANT if self.family == "constant" else KIND_POWER

    def describe(self) -> str:
        if self.family == "constant":
            return f"constant K={self.K!r}"
        return f"power K={self.K!r} p={self.p!r}"


def _ones_like(t):
    try:
        return t * 0.0 + 1.0
    except TypeError:
        return 1.0


def _log1p(t):
    try:
        return math.log1p(t)
    except TypeError:
        import numpy as np

        return np.log1p(t)


def power_coefficient(K: float, p: float = 1.0) -> LinearCoefficient:
    return LinearCoefficient("power", float(K), float(p))


def constant_coefficient(K: float) -> LinearCoefficient:
    return LinearCoefficient("constant", float(K))
