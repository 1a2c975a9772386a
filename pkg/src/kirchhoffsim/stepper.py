"""Long-horizon stepping of the coupled mode system.

The scheme: freeze the coefficient at a predictor-corrector midpoint value
over each step and propagate every mode exactly for that frozen 2x2 linear
system. The fast 1/eps scale is treated exactly, so dt follows the slow
coefficient only and grows proportionally to (1+t) once the dynamics settle
onto their polynomial decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels
from .coefficients import LinearCoefficient
from .errors import BlowupDetected, DimensionMismatch, StepUnderflow
from .spectrum import Problem, Spectrum
from .trace import Trace

__all__ = [
    "StepController",
    "SamplingPolicy",
    "SystemState",
    "accel",
    "step",
    "evolve",
    "evolve_linear",
    "initial_state",
    "sample_targets",
]


@dataclass(frozen=True)
class StepController:
    """Step-size policy.

    eta_b caps the relative change of the coefficient per step; dt is also
    capped by dt_max_factor*(1+t) and a 2x growth factor between steps.
    Entries with |u_k| and |v_k| below flush_threshold are zeroed.

    polish_window / polish_dt (in multiples of eps) force dt <= polish_dt*eps
    over the last polish_window*eps of time before each recorded sample, so
    the velocity carries its slow-manifold offset at sample times and the
    equation-based u'' stays meaningful at late t. polish_window = 0
    disables this.
    """

    eta_b: float = 1e-3
    dt_min: float = 1e-12
    dt_max_factor: float = 0.1
    flush_threshold: float = 1e-300
    polish_window: float = 20.0
    polish_dt: float = 0.25

    def __post_init__(self):
        if not (0.0 < self.eta_b < 1.0):
            raise ValueError("eta_b must lie in (0, 1)")
        if not (self.dt_min > 0.0):
            raise ValueError("dt_min must be > 0")
        if not (self.dt_max_factor > 0.0):
            raise ValueError("dt_max_factor must be > 0")
        if not (self.flush_threshold >= 0.0):
            raise ValueError("flush_threshold must be >= 0")
        if self.polish_window < 0.0 or self.polish_dt <= 0.0:
            raise ValueError("polish_window must be >= 0 and polish_dt > 0")


@dataclass(frozen=True)
class SamplingPolicy:
    """Geometric sampling: fixed samples per decade starting at t_first."""

    samples_per_decade: int = 16
    t_first: float = 1e-3

    def __post_init__(self):
        if self.samples_per_decade < 1:
            raise ValueError("samples_per_decade must be >= 1")
        if not (self.t_first > 0.0):
            raise ValueError("t_first must be > 0")


@dataclass(frozen=True)
class SystemState:
    """Instantaneous state: time, coefficients, velocities, accumulated B."""

    t: float
    u: np.ndarray
    v: np.ndarray
    B: float = 0.0

    def __post_init__(self):
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")
        if self.t < 0.0 or self.B < 0.0:
            raise ValueError("t and B must be nonnegative")


def initial_state(problem: Problem) -> SystemState:
    return SystemState(t=0.0, u=problem.u0.copy(), v=problem.u1.copy(), B=0.0)


def _check_dim(problem: Problem, state: SystemState):
    if state.u.size != problem.dim:
        raise DimensionMismatch(
            f"state dimension {state.u.size} != problem dimension {problem.dim}"
        )


def coefficient_of(problem: Problem, u: np.ndarray) -> float:
    """b = (sum lam_k^2 u_k^2)^gamma for the current displacement."""
    g = float(np.dot(problem.spectrum.lam2, np.asarray(u, dtype=np.float64) ** 2))
    return g**problem.gamma


def accel(problem: Problem, state: SystemState) -> np.ndarray:
    """u'' = -(b lam^2 u + u') / eps with b evaluated from the state."""
    _check_dim(problem, state)
    b = coefficient_of(problem, state.u)
    return -(b * problem.spectrum.lam2 * state.u + state.v) / problem.epsilon


def step(problem: Problem, state: SystemState, ctrl: StepController) -> SystemState:
    """Advance one accepted step; dt keeps the relative move of b within
    ~2*eta_b and below dt_max_factor*(1+t). Raises StepUnderflow if the
    controller cannot find such a dt above dt_min."""
    _check_dim(problem, state)
    lam2 = np.ascontiguousarray(problem.spectrum.lam2)
    u = np.ascontiguousarray(state.u, dtype=np.float64)
    v = np.ascontiguousarray(state.v, dtype=np.float64)
    n = u.size
    up, vp, un, vn = (np.empty(n) for _ in range(4))
    g = float(np.dot(lam2, u**2))
    b = g**problem.gamma
    status, dt, _, _, _, dB = _kernels._try_step(
        lam2, u, v, state.t, b, g, problem.gamma, problem.epsilon,
        _kernels.KIND_SELF, 0.0, 0.0,
        ctrl.eta_b, ctrl.dt_min, ctrl.dt_max_factor * (1.0 + state.t), 1e300,
        up, vp, un, vn)
    if status == _kernels.STATUS_UNDERFLOW:
        raise StepUnderflow(f"dt fell below dt_min={ctrl.dt_min} at t={state.t}")
    _flush(un, vn, ctrl.flush_threshold)
    return SystemState(t=state.t + dt, u=un, v=vn, B=state.B + dB)


def _flush(u: np.ndarray, v: np.ndarray, threshold: float):
    small = (np.abs(u) < threshold) & (np.abs(v) < threshold)
    u[small] = 0.0
    v[small] = 0.0


def sample_targets(t_end: float, sampler: SamplingPolicy) -> np.ndarray:
    """Strictly increasing geometric sample times ending exactly at t_end."""
    growth = 10.0 ** (1.0 / sampler.samples_per_decade)
    out = []
    x = sampler.t_first
    while x < t_end * (1.0 - 1e-12):
        out.append(x)
        x *= growth
    out.append(t_end)
    return np.asarray(out, dtype=np.float64)


def _run_loop(lam2, u0, v0, gamma, eps, kind, cK, cp, ctrl, sampler, t_end,
              g_limit):
    targets = sample_targets(t_end, sampler)
    n_out = targets.size + 1
    n = lam2.size
    out_t = np.empty(n_out)
    out_u = np.empty((n_out, n))
    out_v = np.empty((n_out, n))
    out_b = np.empty(n_out)
    out_B = np.empty(n_out)
    out_fl = np.zeros((n_out, n), dtype=np.bool_)
    ns, status, t_fin, _ = _kernels._evolve_loop(
        lam2, u0, v0, gamma, eps, kind, cK, cp,
        ctrl.eta_b, ctrl.dt_min, ctrl.dt_max_factor, ctrl.flush_threshold,
        g_limit, ctrl.polish_window * eps, ctrl.polish_dt * eps,
        t_end, targets,
        out_t, out_u, out_v, out_b, out_B, out_fl)
    if status == _kernels.STATUS_UNDERFLOW:
        raise StepUnderflow(f"dt fell below dt_min={ctrl.dt_min} at t={t_fin}")
    if status == _kernels.STATUS_BLOWUP:
        raise BlowupDetected(
            f"|A^(1/2)u|^2 exceeded 10x its initial value at t={t_fin}; "
            "epsilon appears too large for this data")
    return (out_t[:ns], out_u[:ns], out_v[:ns], out_b[:ns], out_B[:ns],
            out_fl[:ns])


def evolve(problem: Problem, t_end: float,
           ctrl: StepController | None = None,
           sampler: SamplingPolicy | None = None) -> Trace:
    """Integrate the self-consistent system to t_end and sample it
    geometrically. Raises BlowupDetected when the energy norm leaves the
    decay regime and StepUnderflow on unresolvable stiffness."""
    if not (t_end > 0.0):
        raise ValueError("t_end must be > 0")
    ctrl = ctrl or StepController()
    sampler = sampler or SamplingPolicy()
    lam2 = np.ascontiguousarray(problem.spectrum.lam2)
    u0 = np.ascontiguousarray(problem.u0, dtype=np.float64)
    v0 = np.ascontiguousarray(problem.u1, dtype=np.float64)
    g0 = float(np.dot(lam2, u0**2))
    g_limit = 10.0 * g0 if g0 > 0.0 else math.inf
    t, u, v, b, B, fl = _run_loop(
        lam2, u0, v0, problem.gamma, problem.epsilon,
        _kernels.KIND_SELF, 0.0, 0.0, ctrl, sampler, t_end, g_limit)
    return Trace(t=t, u=u, v=v, b=b, B=B, epsilon=problem.epsilon,
                 spectrum=problem.spectrum, problem=problem, flushed=fl,
                 meta=_meta(ctrl, sampler))


def evolve_linear(spectrum: Spectrum, coeff: LinearCoefficient, epsilon: float,
                  v0, v1, t_end: float,
                  ctrl: StepController | None = None,
                  sampler: SamplingPolicy | None = None) -> Trace:
    """Integrate the prescribed-coefficient linear system with the same
    scheme; B accumulates by the family's closed-form integral."""
    if not (t_end > 0.0):
        raise ValueError("t_end must be > 0")
    if not (0.0 < epsilon <= 1.0):
        raise ValueError("epsilon must lie in (0, 1]")
    ctrl = ctrl or StepController()
    sampler = sampler or SamplingPolicy()
    lam2 = np.ascontiguousarray(spectrum.lam2)
    u0 = np.ascontiguousarray(v0, dtype=np.float64)
    w0 = np.ascontiguousarray(v1, dtype=np.float64)
    if u0.size != len(spectrum) or w0.size != len(spectrum):
        raise DimensionMismatch("initial data must match the spectrum length")
    g0 = float(np.dot(lam2, u0**2))
    g_limit = 10.0 * g0 if g0 > 0.0 else math.inf
    t, u, v, b, B, fl = _run_loop(
        lam2, u0, w0, 1.0, epsilon,
        coeff.kernel_kind, coeff.K, coeff.p, ctrl, sampler, t_end, g_limit)
    return Trace(t=t, u=u, v=v, b=b, B=B, epsilon=epsilon,
                 spectrum=spectrum, coeff=coeff, flushed=fl,
                 meta=_meta(ctrl, sampler))


def _meta(ctrl: StepController, sampler: SamplingPolicy) -> dict:
    out = asdict(ctrl)
    out.update(asdict(sampler))
    return out
