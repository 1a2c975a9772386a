"""Tail-limit extraction and pass/fail verification of the decay claims.

Limit claims compare a trailing log-time average against the closed-form
constant predicted from (gamma, nu) alone; a limit counts as converged when
the full-window and half-window estimates agree to tolerance/2.
Boundedness claims fit the slope of the log functional against log t over
the trailing decade and require it to sit near zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import beta_functionals, corrector_ddot_series, theorem1_functionals
from .errors import InsufficientTail
from .logspace import NEG_INF, log_weighted_sq_sum, logaddexp
from .trace import Trace

__all__ = [
    "LimitEstimate",
    "Claim",
    "VerificationReport",
    "estimate_limit",
    "tail_slope",
    "predicted_coefficient_limit",
    "predicted_base_mass_limit",
    "predicted_energy_norm_limit",
    "predicted_operator_norm_limit",
    "predicted_velocity_limit",
    "predicted_energy_velocity_limit",
    "verify_theorem_A",
    "verify_theorem_1",
    "verify_theorem_2",
    "verify_propositions",
]

MIN_TAIL_SAMPLES = 8
DEFAULT_SLOPE_TOL = 0.05

# claims are evaluated on t >= TAIL_T_MIN so the initial layer (where u''
# carries the 1/eps corrector transient) never contaminates a tail window
TAIL_T_MIN = 1.0


@dataclass(frozen=True)
class LimitEstimate:
    """Trailing-window mean with a half-window self-consistency spread."""

    value: float
    half_window_value: float
    spread: float


@dataclass(frozen=True)
class Claim:
    id: str
    detail: str
    kind: str  # "limit" | "bound"
    predicted: float | None
    measured: float
    tolerance: float
    passed: bool
    spread: float | None = None
    slope: float | None = None
    note: str = ""


@dataclass(frozen=True)
class VerificationReport:
    title: str
    claims: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def filter_claims(self, ids) -> "VerificationReport":
        wanted = set(ids)
        return replace(self, claims=tuple(c for c in self.claims if c.id in wanted))

    def to_text(self) -> str:
        lines = [f"# report {self.title}"]
        for key in sorted(self.metadata):
            lines.append(f"# {key} = {self.metadata[key]!r}")
        for c in self.claims:
            lines.append(
                f"claim id={c.id} detail={c.detail} kind={c.kind}"
                f" predicted={_fmt(c.predicted)} measured={_fmt(c.measured)}"
                f" spread={_fmt(c.spread)} slope={_fmt(c.slope)}"
                f" tol={_fmt(c.tolerance)} pass={'true' if c.passed else 'false'}"
                f" note={c.note or '-'}"
            )
        n_pass = sum(c.passed for c in self.claims)
        lines.append(
            f"summary {self.title} passed={n_pass}/{len(self.claims)}"
            f" pass={'true' if self.passed else 'false'}"
        )
        return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    return "none" if x is None else repr(float(x))


def estimate_limit(times, values, window_decades: float = 1.0) -> LimitEstimate:
    """Mean over the trailing window of log-time, with a half-window check.

    Requires at least MIN_TAIL_SAMPLES samples inside the full window.
    """
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if t.size != y.size or t.size == 0:
        raise ValueError("times and values must align and be nonempty")
    t_max = t[-1]
    full = t >= t_max / 10.0**window_decades
    if int(np.count_nonzero(full)) < MIN_TAIL_SAMPLES:
        raise InsufficientTail(
            f"need >= {MIN_TAIL_SAMPLES} samples in the trailing "
            f"{window_decades} decade(s), got {int(np.count_nonzero(full))}"
        )
    half = t >= t_max / 10.0 ** (window_decades / 2.0)
    value = float(np.mean(y[full]))
    half_value = float(np.mean(y[half]))
    return LimitEstimate(value=value, half_window_value=half_value,
                         spread=abs(value - half_value))


def tail_slope(times, log_values, window_decades: float = 1.0,
               t_min: float = TAIL_T_MIN) -> float | None:
    """Least-squares slope of log value against log t over the tail window.

    Entries that are not finite (empty bands, below-floor) are dropped;
    returns None when fewer than two finite points remain (vacuous case).
    """
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(log_values, dtype=np.float64)
    sel = (t >= max(t[-1] / 10.0**window_decades, t_min)) & np.isfinite(y) & (t > 0)
    if int(np.count_nonzero(sel)) < 2:
        return None
    x = np.log(t[sel])
    z = y[sel]
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return None
    return float(np.dot(x, z - z.mean()) / denom)


# -- predicted constants ----------------------------------------------------

def predicted_coefficient_limit(gamma: float, nu: float) -> float:
    """lim (1+t) b."""
    return 1.0 / (2.0 * nu**2 * gamma)


def predicted_base_mass_limit(gamma: float, nu: float) -> float:
    """lim (1+t)^{1/gamma} |u_nu|^2, which is also |u_inf|^2."""
    return 1.0 / (nu**2 * (2.0 * nu**2 * gamma) ** (1.0 / gamma))


def predicted_energy_norm_limit(gamma: float, nu: float) -> float:
    """lim (1+t)^{1/gamma} |A^{1/2}u|^2."""
    return (2.0 * nu**2 * gamma) ** (-1.0 / gamma)


def predicted_operator_norm_limit(gamma: float, nu: float) -> float:
    """lim (1+t)^{1/gamma} |Au|^2."""
    return nu**2 * (2.0 * nu**2 * gamma) ** (-1.0 / gamma)


def predicted_velocity_limit(gamma: float, nu: float) -> float:
    """lim (1+t)^{2+1/gamma} |u'|^2."""
    return nu**2 * (2.0 * nu**2 * gamma) ** (-(2.0 + 1.0 / gamma))


def predicted_energy_velocity_limit(gamma: float, nu: float) -> float:
    """lim (1+t)^{2+1/gamma} |A^{1/2}u'|^2."""
    return nu**4 * (2.0 * nu**2 * gamma) ** (-(2.0 + 1.0 / gamma))


# -- claim builders -----------------------------------------------------------

def _limit_claim(cid: str, detail: str, trace: Trace, series: np.ndarray,
                 predicted: float, tol: float,
                 window_decades: float = 1.0) -> Claim:
    est = estimate_limit(trace.t, series, window_decades)
    scale = abs(predicted)
    ok = (abs(est.value - predicted) <= tol * scale
          and est.spread <= 0.5 * tol * scale)
    return Claim(id=cid, detail=detail, kind="limit", predicted=predicted,
                 measured=est.value, tolerance=tol, passed=ok,
                 spread=est.spread)


def _bound_claim(cid: str, detail: str, trace: Trace, log_series: np.ndarray,
                 slope_tol: float, two_sided: bool,
                 window_decades: float = 1.0, note: str = "") -> Claim:
    finite_ok = not np.any(np.isposinf(log_series)) and not np.any(np.isnan(log_series))
    slope = tail_slope(trace.t, log_series, window_decades)
    if slope is None:
        # nothing measurable on the tail: vacuous boundedness
        return Claim(id=cid, detail=detail, kind="bound", predicted=None,
                     measured=NEG_INF, tolerance=slope_tol, passed=finite_ok,
                     slope=None, note=note or "vacuous")
    lo = -slope_tol if two_sided else -math.inf
    sup = float(np.max(log_series[np.isfinite(log_series)]))
    ok = finite_ok and (lo <= slope <= slope_tol)
    return Claim(id=cid, detail=detail, kind="bound", predicted=None,
                 measured=sup, tolerance=slope_tol, passed=ok, slope=slope,
                 note=note)


def _norm_series(trace: Trace, h: float, of_velocity: bool = False) -> np.ndarray:
    x = trace.v if of_velocity else trace.u
    w = trace.lam2 ** h
    return np.einsum("k,nk->n", w, x**2)


# -- verifiers ----------------------------------------------------------------

def verify_theorem_A(trace: Trace, slope_tol: float = DEFAULT_SLOPE_TOL) -> VerificationReport:
    """Two-sided decay of the energy norms and the upper velocity bound."""
    gamma = trace.problem.gamma
    wt = (1.0 + trace.t) ** (1.0 / gamma)
    wv = (1.0 + trace.t) ** (2.0 + 1.0 / gamma)
    claims = []
    with np.errstate(divide="ignore"):
        for cid, detail, series, two_sided in (
            ("h1", "energy_norm_decay", wt * _norm_series(trace, 1.0), True),
            ("h11", "operator_norm_decay", wt * _norm_series(trace, 2.0), True),
            ("h12", "velocity_decay", wv * _norm_series(trace, 0.0, True), False),
        ):
            log_series = np.log(series, where=series > 0,
                                out=np.full_like(series, NEG_INF))
            cl = _bound_claim(cid, detail, trace, log_series, slope_tol, two_sided)
            finite = series[series > 0]
            k1 = float(np.min(finite)) if finite.size else 0.0
            k2 = float(np.max(finite)) if finite.size else 0.0
            positive_ok = (k1 > 0.0) if two_sided else True
            claims.append(replace(
                cl, passed=cl.passed and positive_ok,
                note=f"K1_hat={k1!r} K2_hat={k2!r}"))
    return VerificationReport("theorem_A", tuple(claims),
                              metadata={"gamma": gamma, "nu": trace.nu})


def verify_theorem_1(trace: Trace, lambdas,
                     slope_tol: float = DEFAULT_SLOPE_TOL) -> VerificationReport:
    """Boundedness of the high-band weighted functionals for each band."""
    claims = []
    for lam in lambdas:
        for h in (0, 1):
            vals = theorem1_functionals(trace, lam, h)
            log_d1 = np.asarray([w.log_value for w in vals.d1])
            claims.append(_bound_claim(
                "D1", f"band_energy_lam={lam!r}_h={h}", trace, log_d1,
                slope_tol, two_sided=False))
            if h == 0:
                log_d2 = np.asarray([w.log_value for w in vals.d2])
                log_d3 = np.asarray([w.log_value for w in vals.d3])
                claims.append(_bound_claim(
                    "D2", f"band_velocity_lam={lam!r}", trace, log_d2,
                    slope_tol, two_sided=False))
                claims.append(_bound_claim(
                    "D3", f"band_accel_lam={lam!r}", trace, log_d3,
                    slope_tol, two_sided=False))
    return VerificationReport("theorem_1", tuple(claims),
                              metadata={"lambdas": list(map(float, lambdas))})


def _default_tol(gamma: float, tol: float | None) -> float:
    if tol is not None:
        return tol
    # slower transients for small exponents
    return 0.05 if gamma < 0.5 else 0.02


def verify_theorem_2(trace: Trace, tol: float | None = None,
                     slope_tol: float = DEFAULT_SLOPE_TOL,
                     off_mass_tol: float = 1e-3,
                     window_decades: float = 1.0) -> VerificationReport:
    """Limit constants of the renormalized solution and its derivatives.

    Raises InsufficientTail unless the trace spans at least two decades
    beyond t = 1.
    """
    gamma = trace.problem.gamma
    nu = trace.nu
    if trace.t[-1] < 100.0 * TAIL_T_MIN:
        raise InsufficientTail(
            f"need a tail of >= 2 decades past t={TAIL_T_MIN}, "
            f"got t_end={trace.t[-1]!r}")
    tol = _default_tol(gamma, tol)
    vel_tol = max(tol, 0.05)
    t = trace.t
    wt = (1.0 + t) ** (1.0 / gamma)
    wv = (1.0 + t) ** (2.0 + 1.0 / gamma)
    on = trace.lam == nu
    claims = []

    # decay weight bracket: (1+t) e^{-2 nu^2 gamma B} pinned between constants
    log_b1 = np.log1p(t) - 2.0 * nu**2 * gamma * trace.B
    cl = _bound_claim("B1", "decay_weight_bracket", trace, log_b1, slope_tol,
                      two_sided=True, window_decades=window_decades)
    fin = log_b1[np.isfinite(log_b1)]
    claims.append(replace(
        cl, note=f"K1_hat={math.exp(fin.min())!r} K2_hat={math.exp(fin.max())!r}"))

    claims.append(_limit_claim(
        "B2", "coefficient_limit", trace, (1.0 + t) * trace.b,
        predicted_coefficient_limit(gamma, nu), tol, window_decades))

    base_mass = np.einsum("nk,nk->n", trace.u[:, on], trace.u[:, on])
    claims.append(_limit_claim(
        "B31b", "base_mass_limit", trace, wt * base_mass,
        predicted_base_mass_limit(gamma, nu), tol, window_decades))

    claims.append(_limit_claim(
        "B32b", "energy_norm_limit", trace, wt * _norm_series(trace, 1.0),
        predicted_energy_norm_limit(gamma, nu), tol, window_decades))
    claims.append(_limit_claim(
        "B32b", "operator_norm_limit", trace, wt * _norm_series(trace, 2.0),
        predicted_operator_norm_limit(gamma, nu), tol, window_decades))

    claims.append(_limit_claim(
        "B4b", "velocity_limit", trace, wv * _norm_series(trace, 0.0, True),
        predicted_velocity_limit(gamma, nu), vel_tol, window_decades))
    claims.append(_limit_claim(
        "B4b", "energy_velocity_limit", trace,
        wv * _norm_series(trace, 1.0, True),
        predicted_energy_velocity_limit(gamma, nu), vel_tol, window_decades))

    # acceleration decay, from the equation, excluding the initial layer
    aa = trace.accel()
    acc_sq = np.einsum("nk,nk->n", aa, aa)
    series = (1.0 + t) ** (4.0 + 1.0 / gamma) * acc_sq
    with np.errstate(divide="ignore"):
        log_acc = np.log(series, where=series > 0,
                         out=np.full_like(series, NEG_INF))
    claims.append(_bound_claim("B5", "acceleration_decay", trace, log_acc,
                               slope_tol, two_sided=True,
                               window_decades=window_decades))

    claims.extend(_limit_pair_claims(trace, gamma, nu, tol, off_mass_tol,
                                     window_decades))

    # informational: decay slopes of the weighted off-band remainders
    # (no pass threshold; no rate is predicted for them)
    betas = beta_functionals(trace)
    beta_slopes = {}
    for name, series in (("beta1", betas.beta1), ("beta2", betas.beta2),
                         ("beta3", betas.beta3), ("beta4", betas.beta4)):
        logs = np.asarray([wv.log_value for wv in series])
        beta_slopes[name] = tail_slope(trace.t, logs, window_decades)
    return VerificationReport(
        "theorem_2", tuple(claims),
        metadata={"gamma": gamma, "nu": nu, "epsilon": trace.epsilon,
                  "tolerance": tol, "beta_slopes": beta_slopes})


def _limit_pair_claims(trace: Trace, gamma: float, nu: float, tol: float,
                       off_mass_tol: float, window_decades: float) -> list:
    """Componentwise convergence of the renormalized pair on the nu-band."""
    t = trace.t
    on = trace.lam == nu
    w_u = (1.0 + t) ** (1.0 / (2.0 * gamma))
    w_v = (1.0 + t) ** (1.0 + 1.0 / (2.0 * gamma))
    u_inf, v_inf, spreads = [], [], []
    for k in np.flatnonzero(on):
        eu = estimate_limit(t, w_u * trace.u[:, k], window_decades)
        ev = estimate_limit(t, w_v * trace.v[:, k], window_decades)
        u_inf.append(eu.value)
        v_inf.append(ev.value)
        spreads.append(max(eu.spread, ev.spread))
    u_inf = np.asarray(u_inf)
    v_inf = np.asarray(v_inf)
    norm_sq = float(np.dot(u_inf, u_inf))
    pred_norm = predicted_base_mass_limit(gamma, nu)

    off = ~on
    off_mass = np.einsum("nk,nk->n", trace.u[:, off], trace.u[:, off])
    est_off = estimate_limit(t, (1.0 + t) ** (1.0 / gamma) * off_mass,
                             window_decades)
    ratio = est_off.value / norm_sq if norm_sq > 0 else math.inf
    support_ok = ratio <= off_mass_tol

    scale = float(np.max(np.abs(u_inf))) / (2.0 * gamma)
    resid = float(np.max(np.abs(v_inf + u_inf / (2.0 * gamma))))
    ratio_ok = resid <= tol * scale if scale > 0 else False

    norm_ok = (abs(norm_sq - pred_norm) <= tol * pred_norm
               and max(spreads, default=math.inf) <= 0.5 * tol * math.sqrt(pred_norm))
    return [
        Claim(id="LIM", detail="support_on_base_band", kind="limit",
              predicted=0.0, measured=ratio, tolerance=off_mass_tol,
              passed=support_ok, spread=est_off.spread),
        Claim(id="LIM", detail="velocity_ratio", kind="limit",
              predicted=-1.0 / (2.0 * gamma),
              measured=-1.0 / (2.0 * gamma) + (resid / scale if scale > 0 else math.nan),
              tolerance=tol, passed=ratio_ok,
              note=f"max_component_residual={resid!r}"),
        Claim(id="LIM", detail="limit_norm_sq", kind="limit",
              predicted=pred_norm, measured=norm_sq, tolerance=tol,
              passed=norm_ok, spread=max(spreads, default=None)),
    ]


def verify_propositions(linear_trace: Trace, sigma_M: float,
                        slope_tol: float = DEFAULT_SLOPE_TOL,
                        window_decades: float = 1.0) -> VerificationReport:
    """Boundedness of the weighted functionals of a prescribed-coefficient
    linear run: sl1 (h=1), sl2 (h=1) and the corrected-acceleration
    functional sl3."""
    tr = linear_trace
    if tr.coeff is None:
        raise ValueError("verify_propositions needs a prescribed-coefficient trace")
    t = tr.t
    full = t >= t[-1] / 10.0**window_decades
    if int(np.count_nonzero(full)) < MIN_TAIL_SAMPLES:
        raise InsufficientTail("trailing window has too few samples")
    ssq = sigma_M**2
    lam2 = tr.lam2
    log_b = np.log(tr.b)
    w = 2.0 * ssq * tr.B
    log_lam2 = np.log(lam2)
    zeros = np.zeros_like(lam2)
    wpp = tr.accel() - corrector_ddot_series(tr)

    n = tr.n_samples
    sl1 = np.empty(n)
    sl2 = np.empty(n)
    sl3 = np.empty(n)
    for i in range(n):
        kin = math.log(tr.epsilon) + log_weighted_sq_sum(tr.v[i], log_lam2) - log_b[i]
        pot = log_weighted_sq_sum(tr.u[i], 2.0 * log_lam2)
        sl1[i] = logaddexp(kin, pot) + w[i] if max(kin, pot) > NEG_INF else NEG_INF
        lv = log_weighted_sq_sum(tr.v[i], zeros) - 2.0 * log_b[i]
        sl2[i] = lv + w[i] if lv > NEG_INF else NEG_INF
        lv = log_weighted_sq_sum(wpp[i], zeros) - 4.0 * log_b[i]
        sl3[i] = lv + w[i] if lv > NEG_INF else NEG_INF

    note = "" if tr.coeff.h2b_compliant else "coefficient family not slow-decay compliant"
    claims = (
        _bound_claim("SL1b", "weighted_band_energy_h1", tr, sl1, slope_tol,
                     two_sided=False, window_decades=window_decades, note=note),
        _bound_claim("SL2b", "weighted_velocity_h1", tr, sl2, slope_tol,
                     two_sided=False, window_decades=window_decades, note=note),
        _bound_claim("SL3b", "weighted_corrected_accel", tr, sl3, slope_tol,
                     two_sided=False, window_decades=window_decades, note=note),
    )
    return VerificationReport(
        "propositions_linear", claims,
        metadata={"sigma_M": float(sigma_M), "epsilon": tr.epsilon,
                  "coefficient": tr.coeff.describe()})
