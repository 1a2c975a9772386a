"""Hot integration loops.

Single-source kernels: the same function bodies run compiled under numba's
@njit (the default when numba imports) or interpreted as plain
Python/NumPy. Set KIRCHHOFFSIM_NO_NUMBA=1 to force the interpreted
fallback; the arithmetic is identical either way, only speed differs.

Each step advances every mode EXACTLY for the frozen-coefficient system
eps*y'' + y' + bbar*lam^2*y = 0 (characteristic roots of
eps*r^2 + r + bbar*lam^2 = 0), so the fast e^{-t/eps} scale never
restricts dt; the step size is controlled purely by the slow relative
drift of the coefficient.
"""

import math
import os

import numpy as np

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_BLOWUP = 2

KIND_SELF = 0      # coefficient fed back from the state: b = (sum lam^2 u^2)^gamma
KIND_POWER = 1     # b(t) = K / (1 + t)^p
KIND_CONSTANT = 2  # b(t) = K

# e^x and e^-x both stay comfortably representable below this; above it the
# two real roots are separated enough that direct exponentials cannot cancel.
_SPLIT = 20.0


def _numba_enabled() -> bool:
    flag = os.environ.get("KIRCHHOFFSIM_NO_NUMBA", "").strip().lower()
    if flag in ("1", "true", "yes", "on"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USING_NUMBA = _numba_enabled()


def _jit(fn):
    if USING_NUMBA:
        from numba import njit

        return njit(cache=True, nogil=True)(fn)
    return fn


@_jit
def _coeff_value(kind, cK, cp, t):
    if kind == KIND_POWER:
        return cK / (1.0 + t) ** cp
    return cK


@_jit
def _coeff_db(kind, cK, cp, t, dt):
    # exact integral of a prescribed b over [t, t+dt]
    if kind == KIND_CONSTANT:
        return cK * dt
    if cp > 1.0 - 1e-12:
        return cK * math.log1p(dt / (1.0 + t))
    q = 1.0 - cp
    return cK * ((1.0 + t + dt) ** q - (1.0 + t) ** q) / q


@_jit
def _grip(lam2, u):
    g = 0.0
    for k in range(lam2.shape[0]):
        g += lam2[k] * u[k] * u[k]
    return g


@_jit
def _grip_rate(lam2, u, v, g, gamma):
    # |b'|/b = 2*gamma*|sum lam^2 u u'| / sum lam^2 u^2
    if g <= 0.0:
        return 0.0
    s = 0.0
    for k in range(lam2.shape[0]):
        s += lam2[k] * u[k] * v[k]
    return 2.0 * gamma * abs(s) / g


@_jit
def _osc_rate(lam2, b, eps):
    # fastest underdamped angular frequency; 0 once every mode is overdamped.
    # b' passes through zero at its oscillation extrema, so the drift rate
    # alone would let dt spike there; bounding dt by the phase keeps the
    # step sequence refining uniformly with eta_b.
    wmax = 0.0
    for k in range(lam2.shape[0]):
        disc = 4.0 * eps * b * lam2[k] - 1.0
        if disc > 0.0:
            w = 0.5 * math.sqrt(disc) / eps
            if w > wmax:
                wmax = w
    return wmax


@_jit
def _advance(lam2, u, v, bbar, eps, dt, uo, vo):
    # exact propagator of eps*y'' + y' + bbar*lam2[k]*y = 0 over dt, per mode
    m = -0.5 / eps
    for k in range(lam2.shape[0]):
        uk = u[k]
        vk = v[k]
        if uk == 0.0 and vk == 0.0:
            uo[k] = 0.0
            vo[k] = 0.0
            continue
        q = bbar * lam2[k]
        disc = 1.0 - 4.0 * eps * q
        if disc >= 0.0:
            s = math.sqrt(disc)
            d = 0.5 * s / eps
            x = d * dt
            if x < _SPLIT:
                # near-degenerate roots: expm1-based sinh avoids cancellation
                em = math.exp(m * dt)
                cc = em * 0.5 * (math.exp(x) + math.exp(-x))
                if d > 0.0:
                    sc = em * 0.5 * (math.expm1(x) - math.expm1(-x)) / d
                else:
                    sc = em * dt
            else:
                # well-separated real roots; slow root via the product form
                r2 = (-1.0 - s) / (2.0 * eps)
                r1 = (q / eps) / r2
                e1 = math.exp(r1 * dt)
                e2 = math.exp(r2 * dt)
                cc = 0.5 * (e1 + e2)
                sc = 0.5 * (e1 - e2) / d
        else:
            w = 0.5 * math.sqrt(-disc) / eps
            em = math.exp(m * dt)
            wd = w * dt
            cc = em * math.cos(wd)
            sc = em * math.sin(wd) / w
        uo[k] = cc * uk + sc * (vk - m * uk)
        vo[k] = cc * vk + sc * (m * vk - (q / eps) * uk)


@_jit
def _try_step(lam2, u, v, t, b, g, gamma, eps, kind, cK, cp,
              eta_b, dt_min, cap_soft, cap_hard, up, vp, un, vn):
    """Attempt one step, shrinking dt until the coefficient drift is resolved.

    Returns (status, dt_used, dt_ctrl, b_new, g_new, dB). dt_ctrl is the
    controller's own scale (pre-clipping) for the growth cap of the next
    step. For the self-consistent coefficient a predictor pass with b
    frozen supplies the midpoint value bbar = (b + b_pred)/2; a step is
    accepted only if the realized relative change of b stays within
    2*eta_b.
    """
    if kind == KIND_SELF:
        rate = _grip_rate(lam2, u, v, g, gamma)
        osc = 0.25 * _osc_rate(lam2, b, eps)
        if osc > rate:
            rate = osc
    elif kind == KIND_POWER:
        rate = cp / (1.0 + t)
    else:
        rate = 0.0
    dt_ctrl = cap_soft
    if rate > 0.0 and eta_b / rate < cap_soft:
        dt_ctrl = eta_b / rate
    dt = dt_ctrl
    if dt > cap_hard:
        dt = cap_hard
    while True:
        # a clipped landing step may be arbitrarily short; underflow means
        # the rejection loop itself pushed dt below dt_min
        if dt < dt_min and dt < cap_hard:
            return STATUS_UNDERFLOW, dt, dt_ctrl, b, g, 0.0
        if kind == KIND_SELF:
            _advance(lam2, u, v, b, eps, dt, up, vp)
            gp = _grip(lam2, up)
            bp = gp**gamma
            bbar = 0.5 * (b + bp)
            _advance(lam2, u, v, bbar, eps, dt, un, vn)
            gn = _grip(lam2, un)
            bn = gn**gamma
            den = b if b > 0.0 else 1.0
            if abs(bn - b) <= 2.0 * eta_b * den:
                dB = 0.5 * dt * (b + bn)
                return STATUS_OK, dt, dt_ctrl, bn, gn, dB
            dt *= 0.5
            dt_ctrl = dt
        else:
            bbar = _coeff_value(kind, cK, cp, t + 0.5 * dt)
            _advance(lam2, u, v, bbar, eps, dt, un, vn)
            gn = _grip(lam2, un)
            bn = _coeff_value(kind, cK, cp, t + dt)
            dB = _coeff_db(kind, cK, cp, t, dt)
            return STATUS_OK, dt, dt_ctrl, bn, gn, dB


@_jit
def _evolve_loop(lam2, u_init, v_init, gamma, eps, kind, cK, cp,
                 eta_b, dt_min, dt_max_factor, flush, g_limit,
                 polish_window, polish_dt,
                 t_end, targets,
                 out_t, out_u, out_v, out_b, out_B, out_fl):
    """March to t_end recording the state whenever a sample target is hit.

    targets must be strictly increasing and end exactly at t_end.
    polish_window / polish_dt are absolute times (multiples of eps,
    pre-scaled by the caller); polish_window = 0 disables polishing.
    Returns (n_samples, status, t_final, B_final).
    """
    n = lam2.shape[0]
    u = u_init.copy()
    v = v_init.copy()
    up = np.empty(n)
    vp = np.empty(n)
    un = np.empty(n)
    vn = np.empty(n)
    flushed = np.zeros(n, np.bool_)

    t = 0.0
    B_acc = 0.0
    g = _grip(lam2, u)
    if kind == KIND_SELF:
        b = g**gamma
    else:
        b = _coeff_value(kind, cK, cp, 0.0)

    out_t[0] = 0.0
    for k in range(n):
        out_u[0, k] = u[k]
        out_v[0, k] = v[k]
        out_fl[0, k] = False
    out_b[0] = b
    out_B[0] = 0.0
    ns = 1

    it = 0
    ntarg = targets.shape[0]
    dt_prev = 1e300
    while t < t_end:
        while it < ntarg and targets[it] <= t:
            it += 1
        if it >= ntarg:
            break
        cap_soft = dt_max_factor * (1.0 + t)
        if 2.0 * dt_prev < cap_soft:
            cap_soft = 2.0 * dt_prev
        # polish: resolve the last stretch before a sample with dt ~ eps so
        # the velocity re-slaves onto the slow manifold before recording
        # (the equation-based u'' diagnostic needs it)
        aim = targets[it]
        gap = aim - t
        # enter the window only while the remaining pre-window segment is at
        # least one polish step long, so the entry landing cannot degenerate
        # into float-dust steps
        approaching = polish_window > 0.0 and gap > polish_window + polish_dt
        if approaching:
            cap_hard = gap - polish_window
        else:
            cap_hard = gap
            if polish_window > 0.0 and polish_dt < cap_soft:
                cap_soft = polish_dt
        status, dt, dt_ctrl, bn, gn, dB = _try_step(
            lam2, u, v, t, b, g, gamma, eps, kind, cK, cp,
            eta_b, dt_min, cap_soft, cap_hard, up, vp, un, vn)
        if status != STATUS_OK:
            return ns, status, t, B_acc
        hit_cap = dt >= cap_hard
        landed = hit_cap and not approaching
        if landed:
            t = aim
        elif hit_cap:
            t = aim - polish_window
        else:
            t = t + dt
        B_acc += dB
        for k in range(n):
            uk = un[k]
            vk = vn[k]
            if (uk != 0.0 or vk != 0.0) and abs(uk) < flush and abs(vk) < flush:
                uk = 0.0
                vk = 0.0
                flushed[k] = True
            u[k] = uk
            v[k] = vk
        b = bn
        g = gn
        if gn > g_limit:
            return ns, STATUS_BLOWUP, t, B_acc
        dt_prev = dt_ctrl
        if landed:
            out_t[ns] = t
            for k in range(n):
                out_u[ns, k] = u[k]
                out_v[ns, k] = v[k]
                out_fl[ns, k] = flushed[k]
            out_b[ns] = b
            out_B[ns] = B_acc
            ns += 1
            it += 1
    return ns, STATUS_OK, t, B_acc
