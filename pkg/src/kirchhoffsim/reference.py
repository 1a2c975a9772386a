"""Independent oracles: a high-order adaptive reference integrator and the
closed-form solution of the zero-mass single-mode limit equation.

The reference path is deliberately different machinery from the production
stepper (explicit adaptive Runge-Kutta with the step bounded well inside the
fast scale), so the two can cross-check each other on short horizons.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .coefficients import LinearCoefficient
from .errors import ToleranceNotMet
from .spectrum import Problem, Spectrum
from .stepper import SamplingPolicy, sample_targets
from .trace import Trace

__all__ = ["reference_solve", "reference_solve_linear", "limit_ode_solution"]

_MAX_ORACLE_HORIZON = 1e3


def _eval_times(t_end: float, sampler: SamplingPolicy) -> np.ndarray:
    return np.concatenate(([0.0], sample_targets(t_end, sampler)))


def reference_solve(problem: Problem, t_end: float, tol: float,
                    sampler: SamplingPolicy | None = None) -> Trace:
    """Adaptive high-order explicit integration of the full nonlinear system.

    Short-horizon oracle (t_end <= 1e3), used only in tests. B is carried
    as an extra integrated state so its accuracy matches the solver's.
    """
    if t_end > _MAX_ORACLE_HORIZON:
        raise ValueError(f"reference oracle is limited to t_end <= {_MAX_ORACLE_HORIZON}")
    sampler = sampler or SamplingPolicy()
    lam2 = problem.spectrum.lam2
    gamma = problem.gamma
    eps = problem.epsilon
    n = problem.dim

    def rhs(_t, y):
        u = y[:n]
        v = y[n:2 * n]
        g = float(np.dot(lam2, u**2))
        b = g**gamma
        return np.concatenate((v, -(b * lam2 * u + v) / eps, [b]))

    y0 = np.concatenate((problem.u0, problem.u1, [0.0]))
    t_eval = _eval_times(t_end, sampler)
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=tol, atol=tol,
                    max_step=eps / 4.0, t_eval=t_eval)
    if not sol.success:
        raise ToleranceNotMet(f"reference integration failed: {sol.message}")
    u = sol.y[:n].T.copy()
    v = sol.y[n:2 * n].T.copy()
    B = sol.y[2 * n].copy()
    B = np.maximum.accumulate(B)
    g = np.einsum("k,nk->n", lam2, u**2)
    b = g**gamma
    return Trace(t=sol.t.copy(), u=u, v=v, b=b, B=B, epsilon=eps,
                 spectrum=problem.spectrum, problem=problem,
                 meta={"oracle": "dop853", "tol": tol})


def reference_solve_linear(spectrum: Spectrum, coeff: LinearCoefficient,
                           epsilon: float, v0, v1, t_end: float, tol: float,
                           sampler: SamplingPolicy | None = None) -> Trace:
    """Reference integration of the prescribed-coefficient linear system."""
    if t_end > _MAX_ORACLE_HORIZON:
        raise ValueError(f"reference oracle is limited to t_end <= {_MAX_ORACLE_HORIZON}")
    sampler = sampler or SamplingPolicy()
    lam2 = spectrum.lam2
    n = len(spectrum)
    u_init = np.asarray(v0, dtype=np.float64)
    w_init = np.asarray(v1, dtype=np.float64)

    def rhs(t, y):
        u = y[:n]
        v = y[n:]
        b = float(coeff.value(t))
        return np.concatenate((v, -(b * lam2 * u + v) / epsilon))

    y0 = np.concatenate((u_init, w_init))
    t_eval = _eval_times(t_end, sampler)
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=tol, atol=tol,
                    max_step=epsilon / 4.0, t_eval=t_eval)
    if not sol.success:
        raise ToleranceNotMet(f"reference integration failed: {sol.message}")
    u = sol.y[:n].T.copy()
    v = sol.y[n:].T.copy()
    b = np.asarray(coeff.value(sol.t), dtype=np.float64)
    B = np.asarray(coeff.integral(sol.t), dtype=np.float64)
    return Trace(t=sol.t.copy(), u=u, v=v, b=b, B=B, epsilon=epsilon,
                 spectrum=spectrum, coeff=coeff,
                 meta={"oracle": "dop853", "tol": tol})


def limit_ode_solution(t: float, y0: float, gamma: float, nu: float) -> float:
    """Closed form of the zero-mass single-mode equation
    y' + nu^2 y^{2 gamma + 1} = 0: separation of variables gives
    y(t) = y0 (1 + 2 gamma nu^2 |y0|^{2 gamma} t)^{-1/(2 gamma)}, with the
    sign of y0 preserved."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if y0 == 0.0:
        return 0.0
    scale = 1.0 + 2.0 * gamma * nu**2 * abs(y0) ** (2.0 * gamma) * t
    return y0 * scale ** (-1.0 / (2.0 * gamma))
