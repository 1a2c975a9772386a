"""Per-trajectory functionals: the coefficient and its integral, weighted
energies, band functionals, the initial-layer corrector, the frequency
decomposition diagnostics, and the comparison-inequality checker.

Every exponentially weighted quantity is produced as a WeightedValue
(sign + log magnitude): the decay weight e^{2 lambda^2 B} grows
polynomially in t with a large power and overflows doubles long before the
underlying amplitudes degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTrace
from .logspace import (
    NEG_INF,
    WeightedValue,
    from_float,
    log_weighted_sq_sum,
    logaddexp,
)
from .spectrum import Problem
from .trace import Trace

__all__ = [
    "b_of",
    "h2_constants",
    "corrector",
    "corrector_ddot_series",
    "energies",
    "EnergyRecord",
    "theorem1_functionals",
    "Theorem1Values",
    "beta_functionals",
    "BetaValues",
    "comparison_lemma_check",
    "nonuniform_derivative",
]


def b_of(problem: Problem, u) -> float:
    """Coefficient value (sum lam_k^2 u_k^2)^gamma; 0 for u = 0 (degenerate)."""
    g = float(np.dot(problem.spectrum.lam2, np.asarray(u, dtype=np.float64) ** 2))
    return g**problem.gamma


def nonuniform_derivative(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Three-point first derivative at interior samples of a nonuniform grid.

    Returns an array of length n-2 aligned with t[1:-1].
    """
    t = np.asarray(t, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    w0 = -h2 / (h1 * (h1 + h2))
    w1 = (h2 - h1) / (h1 * h2)
    w2 = h1 / (h2 * (h1 + h2))
    return w0 * f[:-2] + w1 * f[1:-1] + w2 * f[2:]


def h2_constants(trace: Trace) -> tuple[float, float]:
    """Empirical witnesses for the slow-decay template of the coefficient.

    K4_hat = max over samples of max{(1+t) b, (1+t)|b'|/b} with b' taken by
    centered differences; K3_hat = min over samples of (1+t) b. A coefficient
    not of 1/(1+t) type shows up as K4_hat drifting with the horizon.
    """
    if np.any(trace.b <= 0.0):
        raise DegenerateTrace("h2 constants need b > 0 at every sample")
    tb = (1.0 + trace.t) * trace.b
    k3 = float(np.min(tb))
    k4 = float(np.max(tb))
    if trace.n_samples >= 3:
        bdot = nonuniform_derivative(trace.t, trace.b)
        mid = slice(1, -1)
        ratio = (1.0 + trace.t[mid]) * np.abs(bdot) / trace.b[mid]
        k4 = max(k4, float(np.max(ratio)))
    return k3, k4


def _corrector_slope(b0: float, lam2: np.ndarray, u0: np.ndarray,
                     v0: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # initial slope of the layer corrector on the band: v + b0 * A u at t=0
    return np.where(mask, v0 + b0 * lam2 * u0, 0.0)


def corrector(problem: Problem, lam: float, t: float):
    """Initial-layer corrector on the band lambda_k >= lam.

    Theta absorbs the O(1/eps) transient of u'': with slope
    Theta'(0) = u1 + b0 A u0 restricted to the band,
    Theta(t) = eps Theta'(0) (1 - e^{-t/eps}), Theta' = Theta'(0) e^{-t/eps},
    Theta'' = -(1/eps) Theta'(0) e^{-t/eps}.
    """
    if lam < problem.nu:
        raise ValueError("corrector band must start at or above nu")
    lam_arr = problem.spectrum.lam
    mask = lam_arr >= lam
    slope = _corrector_slope(problem.b0, problem.spectrum.lam2,
                             problem.u0, problem.u1, mask)
    eps = problem.epsilon
    decay = np.exp(-t / eps)
    theta = eps * slope * (1.0 - decay)
    theta_dot = slope * decay
    theta_ddot = -slope * decay / eps
    return theta, theta_dot, theta_ddot


def corrector_ddot_series(trace: Trace, lam: float | None = None) -> np.ndarray:
    """Theta'' at every sample, shape (n, K).

    Works for both run kinds: the slope uses the trace's own initial data
    and b(0). lam=None means the whole spectrum (the linear-system case).
    """
    lam_arr = trace.lam
    mask = np.ones_like(lam_arr, dtype=bool) if lam is None else lam_arr >= lam
    slope = _corrector_slope(float(trace.b[0]), trace.lam2,
                             trace.u[0], trace.v[0], mask)
    decay = np.exp(-trace.t / trace.epsilon)
    return -np.outer(decay, slope) / trace.epsilon


@dataclass(frozen=True)
class EnergyRecord:
    """Weighted energies along a trace for one weight exponent alpha."""

    alpha: float
    d: list
    e: list
    f: list
    g: list | None = None


def _band_below_floor(trace: Trace, mask: np.ndarray) -> np.ndarray:
    """Per-sample flag: some band mode was flushed by that sample."""
    return np.any(trace.flushed[:, mask], axis=1)


def energies(trace: Trace, alpha: float, sigma_sq: float | None = None) -> EnergyRecord:
    """The three weighted energies, per sample, in log space.

    D = e^{2 alpha B} [eps <u',u> + |u|^2/2]        (sign tracked)
    E = e^{2 alpha B} [eps |u'|^2 / b + |A^{1/2}u|^2]
    F = e^{2 alpha B} |u'|^2 / b^2
    G = e^{2 sigma^2 B} |w''|^2 / b^4 for prescribed-coefficient runs, with
    w = u - corrector.
    """
    _need_positive_b(trace)
    eps = trace.epsilon
    lam2 = trace.lam2
    n = trace.n_samples
    all_mask = np.ones(len(trace.spectrum), dtype=bool)
    floor = _band_below_floor(trace, all_mask)
    log_b = np.log(trace.b)
    log_lam2 = np.log(lam2)
    zeros = np.zeros_like(log_lam2)

    d_vals, e_vals, f_vals = [], [], []
    for i in range(n):
        w = 2.0 * alpha * trace.B[i]
        u = trace.u[i]
        v = trace.v[i]
        bracket_d = eps * float(np.dot(v, u)) + 0.5 * float(np.dot(u, u))
        wv = from_float(bracket_d, below_floor=bool(floor[i]) and bracket_d == 0.0)
        d_vals.append(WeightedValue(wv.log_value + w if not wv.is_zero else NEG_INF,
                                    wv.sign, wv.below_floor))
        log_kin = np.log(eps) + log_weighted_sq_sum(v, zeros) - log_b[i]
        log_pot = log_weighted_sq_sum(u, log_lam2)
        e_vals.append(WeightedValue(logaddexp(log_kin, log_pot) + w
                                    if max(log_kin, log_pot) > NEG_INF else NEG_INF,
                                    1, bool(floor[i])))
        log_f = log_weighted_sq_sum(v, zeros) - 2.0 * log_b[i]
        f_vals.append(WeightedValue(log_f + w if log_f > NEG_INF else NEG_INF,
                                    1, bool(floor[i])))

    g_vals = None
    if trace.coeff is not None:
        ssq = sigma_sq if sigma_sq is not None else trace.spectrum.sigma0
        wpp = trace.accel() - corrector_ddot_series(trace)
        g_vals = []
        for i in range(n):
            log_g = log_weighted_sq_sum(wpp[i], zeros) - 4.0 * log_b[i]
            wgt = 2.0 * ssq * trace.B[i]
            g_vals.append(WeightedValue(log_g + wgt if log_g > NEG_INF else NEG_INF,
                                        1, bool(floor[i])))
    return EnergyRecord(alpha=alpha, d=d_vals, e=e_vals, f=f_vals, g=g_vals)


def _need_positive_b(trace: Trace):
    state_sq = np.einsum("nk,nk->n", trace.u, trace.u) + \
        np.einsum("nk,nk->n", trace.v, trace.v)
    if np.any((trace.b <= 0.0) & (state_sq > 0.0)):
        raise DegenerateTrace("functional needs b > 0 at samples with a live state")


@dataclass(frozen=True)
class Theorem1Values:
    """High-band weighted functionals along a trace, in log space."""

    lam: float
    h: int
    d1: list
    d2: list
    d3: list


def theorem1_functionals(trace: Trace, lam: float, h: int) -> Theorem1Values:
    """Band functionals for the modes with lambda_k >= lam.

    d1 = e^{2 lam^2 B} (eps |A^{h/2} U'|^2 / b + |A^{(h+1)/2} U|^2)
    d2 = e^{2 lam^2 B} |U'|^2 / b^2
    d3 = e^{2 lam^2 B} |U'' - Theta''|^2 / b^4
    with U the band part of u and U'' taken from the equation.
    """
    if trace.problem is None:
        raise ValueError("band functionals are defined for self-consistent runs")
    if h not in (0, 1):
        raise ValueError("h must be 0 or 1")
    if lam < trace.problem.nu:
        raise ValueError("band must start at or above nu")
    _need_positive_b(trace)
    mask = trace.lam >= lam
    floor = _band_below_floor(trace, mask)
    lam2 = trace.lam2
    eps = trace.epsilon
    with np.errstate(divide="ignore"):
        log_wh = np.where(mask, h * np.log(lam2), NEG_INF)
        log_wh1 = np.where(mask, (h + 1) * np.log(lam2), NEG_INF)
        log_band = np.where(mask, 0.0, NEG_INF)
    log_b = np.log(trace.b)
    wpp = trace.accel() - corrector_ddot_series(trace, lam)

    d1_vals, d2_vals, d3_vals = [], [], []
    for i in range(trace.n_samples):
        w = 2.0 * lam * lam * trace.B[i]
        fl = bool(floor[i])
        log_kin = np.log(eps) + log_weighted_sq_sum(trace.v[i], log_wh) - log_b[i]
        log_pot = log_weighted_sq_sum(trace.u[i], log_wh1)
        lv = logaddexp(log_kin, log_pot)
        d1_vals.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, fl))
        lv = log_weighted_sq_sum(trace.v[i], log_band) - 2.0 * log_b[i]
        d2_vals.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, fl))
        lv = log_weighted_sq_sum(wpp[i], log_band) - 4.0 * log_b[i]
        d3_vals.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, fl))
    return Theorem1Values(lam=lam, h=h, d1=d1_vals, d2=d2_vals, d3=d3_vals)


@dataclass(frozen=True)
class BetaValues:
    """Decomposition diagnostics: base-band mass and the four weighted
    off-band remainders, per sample, in log space."""

    beta0: list
    beta1: list
    beta2: list
    beta3: list
    beta4: list

    def as_tuple(self):
        return (self.beta0, self.beta1, self.beta2, self.beta3, self.beta4)


def beta_functionals(trace: Trace) -> BetaValues:
    """beta_0 = e^{2 nu^2 B} |u_nu|^2 and beta_i = e^{2 nu^2 B} alpha_i.

    The off-band remainders alpha_i are accumulated directly over the modes
    with lambda_k != nu (sums of squares, no cancellation):
    alpha_1 = |A^{1/2}u|^2 - nu^2|u_nu|^2, alpha_2 = |Au|^2 - nu^4|u_nu|^2,
    alpha_3 = (|u'|^2 - |u'_nu|^2)/b^2, alpha_4 = (|A^{1/2}u'|^2 -
    nu^2|u'_nu|^2)/b^2.
    """
    _need_positive_b(trace)
    nu = trace.nu
    on = trace.lam == nu
    off = ~on
    lam2 = trace.lam2
    with np.errstate(divide="ignore"):
        log_on = np.where(on, 0.0, NEG_INF)
        log_off0 = np.where(off, 0.0, NEG_INF)
        log_off1 = np.where(off, np.log(lam2), NEG_INF)
        log_off2 = np.where(off, 2.0 * np.log(lam2), NEG_INF)
    floor_on = _band_below_floor(trace, on)
    floor_off = _band_below_floor(trace, off) if np.any(off) else \
        np.zeros(trace.n_samples, dtype=bool)
    log_b = np.log(trace.b)

    b0v, b1v, b2v, b3v, b4v = [], [], [], [], []
    for i in range(trace.n_samples):
        w = 2.0 * nu * nu * trace.B[i]
        u = trace.u[i]
        v = trace.v[i]
        fon = bool(floor_on[i])
        foff = bool(floor_off[i])

        lv = log_weighted_sq_sum(u, log_on)
        b0v.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, fon))
        lv = log_weighted_sq_sum(u, log_off1)
        b1v.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, foff))
        lv = log_weighted_sq_sum(u, log_off2)
        b2v.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, foff))
        lv = log_weighted_sq_sum(v, log_off0) - 2.0 * log_b[i]
        b3v.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, foff))
        lv = log_weighted_sq_sum(v, log_off1) - 2.0 * log_b[i]
        b4v.append(WeightedValue(lv + w if lv > NEG_INF else NEG_INF, 1, foff))
    return BetaValues(b0v, b1v, b2v, b3v, b4v)


def comparison_lemma_check(times, f, K5: float, K6: float,
                           rel_tol: float = 1e-2, atol: float = 1e-12):
    """Check the comparison inequality f' <= -K5 sqrt(f)(sqrt(f) - K6) on a
    sampled nonnegative series, plus its conclusion f <= max(f(0), K6^2).

    Derivatives are centered differences, compared with a relative slack.
    Returns (ok, witness); witness describes the first violating sample.
    """
    t = np.asarray(times, dtype=np.float64)
    fv = np.asarray(f, dtype=np.float64)
    if t.size != fv.size or t.size < 3:
        raise ValueError("need at least 3 aligned samples")
    if np.any(fv < 0.0):
        raise ValueError("f must be nonnegative")
    if not (K5 > 0.0) or K6 < 0.0:
        raise ValueError("need K5 > 0 and K6 >= 0")

    bound = max(float(fv[0]), K6 * K6)
    slack_bound = rel_tol * max(bound, atol) + atol
    for i in range(t.size):
        if fv[i] > bound + slack_bound:
            return False, {"index": i, "t": float(t[i]), "kind": "bound",
                           "lhs": float(fv[i]), "rhs": bound}

    fd = nonuniform_derivative(t, fv)
    root = np.sqrt(fv[1:-1])
    rhs = -K5 * root * (root - K6)
    slack = rel_tol * (K5 * (fv[1:-1] + K6 * root) + np.abs(fd)) + atol
    bad = fd > rhs + slack
    if np.any(bad):
        j = int(np.argmax(bad))
        return False, {"index": j + 1, "t": float(t[j + 1]), "kind": "derivative",
                       "lhs": float(fd[j]), "rhs": float(rhs[j])}
    return True, None
