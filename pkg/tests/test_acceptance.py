"""Acceptance suite: every criterion at its stated tolerance, one
pass/fail line per criterion (run with -s to see them on success)."""

import math

import numpy as np
import pytest

import kirchhoffsim as ks
from kirchhoffsim.asymptotics import estimate_limit, tail_slope
from kirchhoffsim.diagnostics import (
    beta_functionals,
    nonuniform_derivative,
    theorem1_functionals,
)
from kirchhoffsim.logspace import logaddexp

EIGS = [1, 2, 3]
U0 = [1, 0.5, 0.25]
U1 = [0, 0, 0]


def report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:>2} {name}: {status} {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


@pytest.fixture(scope="module")
def run_g1():
    p = ks.build_problem(EIGS, 1.0, 0.05, U0, U1)
    return ks.evolve(p, 1e5)


@pytest.fixture(scope="module")
def runs_by_gamma(run_g1):
    out = {1.0: run_g1}
    for gam in (0.5, 2.0):
        p = ks.build_problem(EIGS, gam, 0.05, U0, U1)
        out[gam] = ks.evolve(p, 1e5)
    return out


@pytest.fixture(scope="module")
def run_alt_data():
    p = ks.build_problem(EIGS, 1.0, 0.05, [0.3, 0.7, 0.1], U1)
    return ks.evolve(p, 1e5)


def coefficient_limit(trace):
    return estimate_limit(trace.t, (1 + trace.t) * trace.b)


def norm_series(trace, h, velocity=False):
    x = trace.v if velocity else trace.u
    return np.einsum("k,nk->n", trace.lam2**h, x**2)


def test_criterion_1_coefficient_limit(runs_by_gamma):
    details = []
    ok = True
    for gam, pred in ((1.0, 0.5), (0.5, 1.0), (2.0, 0.25)):
        est = coefficient_limit(runs_by_gamma[gam])
        good = (abs(est.value - pred) <= 0.02 * pred
                and est.spread <= 0.01 * pred)
        ok = ok and good
        details.append(f"gamma={gam}: {est.value:.5f} (pred {pred}, "
                       f"spread {est.spread:.1e})")
    report(1, "coefficient limit", ok, "; ".join(details))


def test_criterion_2_norm_limits(run_g1):
    t = run_g1.t
    wt = 1 + t
    on = run_g1.lam == 1.0
    checks = {
        "A12": estimate_limit(t, wt * norm_series(run_g1, 1.0)),
        "A": estimate_limit(t, wt * norm_series(run_g1, 2.0)),
        "base": estimate_limit(
            t, wt * np.einsum("nk,nk->n", run_g1.u[:, on], run_g1.u[:, on])),
    }
    ok = all(abs(est.value - 0.5) <= 0.01 for est in checks.values())
    detail = " ".join(f"{k}={est.value:.5f}" for k, est in checks.items())
    report(2, "norm limits (pred 0.5 each)", ok, detail)


def test_criterion_3_velocity_limits(run_g1):
    t = run_g1.t
    wv = (1 + t) ** 3
    est1 = estimate_limit(t, wv * norm_series(run_g1, 0.0, velocity=True))
    est2 = estimate_limit(t, wv * norm_series(run_g1, 1.0, velocity=True))
    ok = (abs(est1.value - 0.125) <= 0.05 * 0.125
          and abs(est2.value - 0.125) <= 0.05 * 0.125)
    report(3, "velocity limits (pred 0.125 each)", ok,
           f"|u'|2={est1.value:.5f} |A12u'|2={est2.value:.5f}")


def test_criterion_4_data_independence(run_g1, run_alt_data):
    pairs = []
    ok = True
    for label, h, vel, weight_pow in (("tb", None, False, None),
                                      ("A12", 1.0, False, 1),
                                      ("du", 0.0, True, 3)):
        for tr in (run_g1, run_alt_data):
            t = tr.t
            if label == "tb":
                series = (1 + t) * tr.b
            else:
                series = (1 + t) ** weight_pow * norm_series(tr, h, vel)
            pairs.append(estimate_limit(t, series).value)
    for i in range(0, len(pairs), 2):
        a, b = pairs[i], pairs[i + 1]
        ok = ok and abs(a - b) <= 0.02 * max(abs(a), abs(b))
    report(4, "data independence of limits", ok,
           " ".join(f"{pairs[i]:.5f}~{pairs[i+1]:.5f}"
                    for i in range(0, len(pairs), 2)))


def test_criterion_5_limit_pair(run_g1):
    rep = ks.verify_theorem_2(run_g1)
    lim = {c.detail: c for c in rep.claims if c.id == "LIM"}
    support = lim["support_on_base_band"]
    ratio = lim["velocity_ratio"]
    norm = lim["limit_norm_sq"]
    ok = support.passed and ratio.passed and norm.passed
    report(5, "renormalized limit pair", ok,
           f"off-band mass ratio={support.measured:.2e} (<=1e-3), "
           f"norm={norm.measured:.5f} (pred {norm.predicted}), "
           f"ratio check within 2%")


def test_criterion_6_acceleration_decay(run_g1):
    acc = run_g1.accel()
    series = (1 + run_g1.t) ** 5 * np.einsum("nk,nk->n", acc, acc)
    with np.errstate(divide="ignore"):
        logs = np.log(series)
    slope = tail_slope(run_g1.t, logs, window_decades=1.0)
    ok = slope is not None and -0.05 <= slope <= 0.05
    report(6, "acceleration decay slope", ok, f"slope={slope:.4f}")


def test_criterion_7_band_functionals(run_g1):
    ok = True
    details = []
    for h in (0, 1):
        vals = theorem1_functionals(run_g1, 2.0, h)
        for name, series in (("D1", vals.d1), ("D2", vals.d2),
                             ("D3", vals.d3)):
            if h == 1 and name != "D1":
                continue
            logs = np.array([w.log_value for w in series])
            assert not np.any(np.isposinf(logs)), "overflow in log space"
            slope = tail_slope(run_g1.t, logs, window_decades=1.0)
            good = slope is not None and slope <= 0.05
            ok = ok and good
            details.append(f"{name}(h={h})={slope:.4f}")
    report(7, "band functional tail slopes", ok, " ".join(details))


def test_criterion_8_linear_propositions():
    spec = ks.Spectrum(np.array([1.0, 2.0]))
    coeff = ks.power_coefficient(1.0, 1.0)
    tr = ks.evolve_linear(spec, coeff, 0.05, [1.0, 0.5], [0.0, 0.3], 1e4)
    rep = ks.verify_propositions(tr, sigma_M=1.0)
    slopes = {c.id: c.slope for c in rep.claims}
    report(8, "linear weighted functionals bounded", rep.passed,
           " ".join(f"{k}={v:.4f}" for k, v in slopes.items()))


def test_criterion_9_oracle_equivalence():
    # stepper vs adaptive high-order reference
    p = ks.build_problem([1, 2], 1.0, 0.1, [1, 0.5], [0, 0])
    ref = ks.reference_solve(p, 10.0, 1e-11)
    tr = ks.evolve(p, 10.0, ks.StepController(eta_b=2e-4))
    num = np.hstack([tr.u, tr.v])
    exact = np.hstack([ref.u, ref.v])
    scale = np.maximum(np.linalg.norm(exact, axis=1), 1e-300)
    err_ref = float(np.max(np.linalg.norm(num - exact, axis=1) / scale))

    # constant-coefficient single mode vs the two-exponential closed form
    spec = ks.Spectrum(np.array([1.0]))
    trc = ks.evolve_linear(spec, ks.constant_coefficient(1.0), 0.1,
                           [1.0], [0.0], 1.0)
    s = math.sqrt(1 - 0.4)
    r1, r2 = (-1 + s) / 0.2, (-1 - s) / 0.2
    c1, c2 = -r2 / (r1 - r2), r1 / (r1 - r2)
    uex = c1 * np.exp(r1 * trc.t) + c2 * np.exp(r2 * trc.t)
    err_cf = float(np.max(np.abs(trc.u[:, 0] - uex)))

    exact_limit = ks.limit_ode_solution(4.0, 1.0, 1.0, 1.0)
    err_ode = abs(exact_limit - 1.0 / 3.0)

    ok = err_ref <= 1e-6 and err_cf <= 1e-9 and err_ode <= 1e-15
    report(9, "oracle equivalence", ok,
           f"ref={err_ref:.2e} (<=1e-6) closed-form={err_cf:.2e} (<=1e-9) "
           f"limit-ode={err_ode:.1e}")


def test_criterion_10_property_suite(run_g1):
    checks = {}

    e = run_g1.lyapunov_energy()
    checks["lyapunov"] = bool(np.all(np.diff(e) <= 1e-8 * e[:-1]))

    p0 = ks.build_problem([1, 2, 3], 1.0, 0.05, [1, 0, 0.5], [0.2, 0, 0])
    trz = ks.evolve(p0, 100.0)
    checks["zero_modes"] = bool(
        np.all(trz.u[:, 1] == 0.0) and np.all(trz.v[:, 1] == 0.0))

    pa = ks.build_problem([1, 2], 1.0, 0.1, [1, 0.5], [0.1, -0.3])
    pb = ks.build_problem([1, 2], 1.0, 0.1, [-1, -0.5], [-0.1, 0.3])
    ta, tb = ks.evolve(pa, 50.0), ks.evolve(pb, 50.0)
    err_odd = max(np.max(np.abs(ta.u + tb.u)), np.max(np.abs(ta.v + tb.v)))
    checks["odd_symmetry"] = err_odd <= 1e-12

    # energy-identity residuals shrink at second order under refinement
    spec = ks.Spectrum(np.array([1.0, 2.0]))
    co = ks.constant_coefficient(0.8)

    def identity_residuals(spd):
        tr = ks.evolve_linear(
            spec, co, 0.1, [1.0, 0.4], [0.2, -0.3], 5.0,
            sampler=ks.SamplingPolicy(samples_per_decade=spd, t_first=0.05))
        lam2, b, B, t = tr.lam2, tr.b, tr.B, tr.t
        alpha = 0.3
        w = np.exp(2 * alpha * B)
        uv = np.einsum("nk,nk->n", tr.u, tr.v)
        u2 = np.einsum("nk,nk->n", tr.u, tr.u)
        v2 = np.einsum("nk,nk->n", tr.v, tr.v)
        mv2 = np.einsum("k,nk->n", lam2, tr.u**2)
        cross = np.einsum("k,nk->n", lam2, tr.u * tr.v)
        D = w * (0.1 * uv + 0.5 * u2)
        E = w * (0.1 * v2 / b + mv2)
        F = w * v2 / b**2
        bdot = tr.b_dot()
        rhs = {
            "D": 2 * alpha * b * D - b * w * mv2 + 0.1 * w * v2,
            "E": (-w * (v2 / b) * (2 + 0.1 * bdot / b - 2 * alpha * 0.1 * b)
                  + 2 * alpha * b * w * mv2),
            "F": (-(1 / 0.1) * F * (2 + 0.2 * bdot / b - 2 * alpha * 0.1 * b)
                  - (2 / 0.1) * w * (1 / b) * cross),
        }
        lhs = {"D": D, "E": E, "F": F}
        out = {}
        for key in lhs:
            fd = nonuniform_derivative(t, lhs[key])[1:]
            target = rhs[key][2:-1]
            out[key] = np.max(np.abs(fd - target)) / np.max(np.abs(target))
        return out

    coarse, fine = identity_residuals(64), identity_residuals(128)
    checks["identity_refinement"] = all(
        coarse[k] / fine[k] >= 3.0 for k in ("D", "E", "F"))

    betas = beta_functionals(run_g1)
    nu = run_g1.nu
    g = np.einsum("k,nk->n", run_g1.lam2, run_g1.u**2)
    worst = 0.0
    for i in range(run_g1.n_samples):
        lhs = logaddexp(math.log(nu**2) + betas.beta0[i].log_value,
                        betas.beta1[i].log_value)
        rhs = 2 * nu**2 * run_g1.B[i] + math.log(g[i])
        worst = max(worst, abs(lhs - rhs))
    checks["beta_consistency"] = worst <= 1e-12

    ok = all(checks.values())
    report(10, "property suite", ok,
           " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))


def test_criterion_11_epsilon_stability(run_g1):
    values = [coefficient_limit(run_g1).value]
    for eps in (0.1, 0.01):
        p = ks.build_problem(EIGS, 1.0, eps, U0, U1)
        values.append(coefficient_limit(ks.evolve(p, 1e5)).value)
    spread = (max(values) - min(values)) / min(values)
    report(11, "epsilon-independence of the limit", spread <= 0.02,
           f"values={[round(v, 6) for v in values]} rel spread={spread:.2e}")
