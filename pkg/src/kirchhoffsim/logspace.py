"""Overflow-safe log-space carriers for exponentially weighted functionals.

Quantities of the form e^{2 lambda^2 B} * (tiny energy) overflow doubles
long before the underlying mode amplitudes do, so every weighted diagnostic
is stored as (sign, log magnitude). A value whose band coefficients were
flushed to zero by the integrator is flagged below_floor instead of being
reported as a silent 0.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEG_INF = float("-inf")

# exp() stays finite/normal roughly within this window
_LOG_MAX = 709.0
_LOG_MIN = -745.0


@dataclass(frozen=True)
class WeightedValue:
    """Signed log-magnitude of a weighted functional.

    sign is 0 exactly when log_value is -inf. raw_hint is the value in
    ordinary floating point when representable, else None.
    """

    log_value: float
    sign: int = 1
    below_floor: bool = False

    def __post_init__(self):
        if self.log_value == NEG_INF:
            object.__setattr__(self, "sign", 0)

    @property
    def is_zero(self) -> bool:
        return self.log_value == NEG_INF

    @property
    def raw_hint(self) -> float | None:
        if self.log_value == NEG_INF:
            return 0.0
        if _LOG_MIN < self.log_value < _LOG_MAX:
            return self.sign * math.exp(self.log_value)
        return None


def from_float(x: float, below_floor: bool = False) -> WeightedValue:
    """Wrap an ordinary float as a WeightedValue."""
    if x == 0.0:
        return WeightedValue(NEG_INF, 0, below_floor)
    s = 1 if x > 0 else -1
    return WeightedValue(math.log(abs(x)), s, below_floor)


def shifted(wv: WeightedValue, log_shift: float) -> WeightedValue:
    """Multiply by e^{log_shift} in log space."""
    if wv.is_zero:
        return wv
    return WeightedValue(wv.log_value + log_shift, wv.sign, wv.below_floor)


def logsumexp(values) -> float:
    """log(sum exp(values)); -inf entries contribute nothing."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return NEG_INF
    m = np.max(arr)
    if m == NEG_INF:
        return NEG_INF
    return float(m + np.log(np.sum(np.exp(arr - m))))


def logaddexp(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    return float(np.logaddexp(a, b))


def logdiffexp(a: float, b: float) -> float:
    """log(e^a - e^b) for a >= b; -inf when they cancel exactly."""
    if b == NEG_INF:
        return a
    if a == b:
        return NEG_INF
    if a < b:
        raise ValueError("logdiffexp needs a >= b")
    return a + math.log1p(-math.exp(b - a))


def signed_logsumexp(signs, logs) -> tuple[int, float]:
    """Sum of signed log-magnitude terms; returns (sign, log|sum|)."""
    signs = np.asarray(signs)
    logs = np.asarray(logs, dtype=np.float64)
    pos = logsumexp(logs[signs > 0])
    neg = logsumexp(logs[signs < 0])
    if pos == neg:
        return 0, NEG_INF
    if pos > neg:
        return 1, logdiffexp(pos, neg)
    return -1, logdiffexp(neg, pos)


def log_weighted_sq_sum(x: np.ndarray, log_w: np.ndarray) -> float:
    """log( sum_k e^{log_w[k]} * x[k]^2 ), robust to squares underflowing.

    Works from log|x[k]| so amplitudes near the flush floor still
    contribute correctly before their squares would denormalize.
    """
    x = np.asarray(x, dtype=np.float64)
    nz = x != 0.0
    if not np.any(nz):
        return NEG_INF
    with np.errstate(divide="ignore"):
        terms = log_w[nz] + 2.0 * np.log(np.abs(x[nz]))
    return logsumexp(terms)
