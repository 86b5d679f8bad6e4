"""Pure-Python simulation kernels, arithmetic-order twin of _kernels.pyx.

Every accumulation here runs left to right over unboxed floats so the
compiled extension (built without FP contraction) produces bit-identical
trajectories. Keep the two files in lockstep; the parity test asserts
exact equality.
"""
from __future__ import annotations

import math

import numpy as np

IMPL = "python"

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_DEGENERATE = 2

NL_ZERO = 0
NL_SATURATION = 1
NL_DEADZONE = 2
NL_PWL = 3
NL_GAIN_TABLE = 4
NL_GAIN_SWITCH = 5

_STATE_CAP = 1e12


def _phi(code: int, params, phase: float, u: float) -> float:
    # phase is the step index for NL_GAIN_TABLE and the time for NL_GAIN_SWITCH
    if code == NL_ZERO:
        return 0.0
    if code == NL_SATURATION:
        limit = params[0]
        if u > limit:
            return limit
        if u < -limit:
            return -limit
        return u
    if code == NL_DEADZONE:
        w = params[0]
        if u > w:
            return u - w
        if u < -w:
            return u + w
        return 0.0
    if code == NL_PWL:
        npts = int(params[0])
        xs = params[1:1 + npts]
        ys = params[1 + npts:1 + 2 * npts]
        if u <= xs[0]:
            return ys[0]
        if u >= xs[npts - 1]:
            return ys[npts - 1]
        lo, hi = 0, npts - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xs[mid] <= u:
                lo = mid
            else:
                hi = mid
        return ys[lo] + (ys[lo + 1] - ys[lo]) * (u - xs[lo]) / (xs[lo + 1] - xs[lo])
    if code == NL_GAIN_TABLE:
        p = int(params[0])
        return params[1 + int(phase) % p] * u
    if code == NL_GAIN_SWITCH:
        period = params[0]
        ng = int(params[1])
        j = int((phase % period) / period * ng)
        if j >= ng:
            j = ng - 1
        return params[2 + j] * u
    raise ValueError(f"unknown nonlinearity code {code}")


def _finite(x) -> bool:
    for v in x:
        if not (-_STATE_CAP < v < _STATE_CAP):
            return False
    return True


def discrete_loop(A, B, C, x0, r1_table, r2_table, nl_code, nl_params,
                  n_steps, record_states=False):
    """y1 = Cx; u2 = y1 + r2[n]; y2 = phi(n, u2); u1 = r1[n] - y2; x+ = Ax + B u1."""
    n = len(x0)
    a = [[float(A[i][j]) for j in range(n)] for i in range(n)]
    b = [float(v) for v in B]
    c = [float(v) for v in C]
    x = [float(v) for v in x0]
    r1 = [float(v) for v in r1_table]
    r2 = [float(v) for v in r2_table]
    p1, p2 = len(r1), len(r2)
    params = [float(v) for v in nl_params]
    code = int(nl_code)

    y1o = np.empty(n_steps)
    y2o = np.empty(n_steps)
    u1o = np.empty(n_steps)
    u2o = np.empty(n_steps)
    xs = np.empty((n_steps, n)) if record_states else None
    status = STATUS_OK
    fail_step = -1
    xn = [0.0] * n

    for step in range(n_steps):
        y1 = 0.0
        for i in range(n):
            y1 += c[i] * x[i]
        u2 = y1 + r2[step % p2]
        y2 = _phi(code, params, step, u2)
        u1 = r1[step % p1] - y2
        y1o[step] = y1
        y2o[step] = y2
        u1o[step] = u1
        u2o[step] = u2
        if record_states:
            for i in range(n):
                xs[step, i] = x[i]
        for i in range(n):
            acc = 0.0
            row = a[i]
            for j in range(n):
                acc += row[j] * x[j]
            xn[i] = acc + b[i] * u1
        x, xn = xn, x
        if not _finite(x):
            status = STATUS_NONFINITE
            fail_step = step
            break

    x_final = np.array(x)
    return y1o, y2o, u1o, u2o, xs, x_final, status, fail_step


def lyapunov_loop(A, B, C, x0, r2_table, nl_code, nl_params,
                  n_steps, discard, d0, dir0):
    """Two-trajectory largest exponent; the phase counter runs through discard."""
    n = len(x0)
    a = [[float(A[i][j]) for j in range(n)] for i in range(n)]
    b = [float(v) for v in B]
    c = [float(v) for v in C]
    x = [float(v) for v in x0]
    r2 = [float(v) for v in r2_table]
    p2 = len(r2)
    params = [float(v) for v in nl_params]
    code = int(nl_code)
    d0 = float(d0)

    xn = [0.0] * n
    for step in range(discard):
        y1 = 0.0
        for i in range(n):
            y1 += c[i] * x[i]
        y2 = _phi(code, params, step, y1 + r2[step % p2])
        for i in range(n):
            acc = 0.0
            row = a[i]
            for j in range(n):
                acc += row[j] * x[j]
            xn[i] = acc - b[i] * y2
        x, xn = xn, x
        if not _finite(x):
            return 0.0, STATUS_NONFINITE, step

    nrm = 0.0
    for v in dir0:
        nrm += float(v) * float(v)
    nrm = math.sqrt(nrm)
    xp = [x[i] + float(dir0[i]) / nrm * d0 for i in range(n)]
    xpn = [0.0] * n
    acc_log = 0.0
    for step in range(discard, discard + n_steps):
        r2v = r2[step % p2]
        y1 = 0.0
        for i in range(n):
            y1 += c[i] * x[i]
        y2 = _phi(code, params, step, y1 + r2v)
        for i in range(n):
            acc = 0.0
            row = a[i]
            for j in range(n):
                acc += row[j] * x[j]
            xn[i] = acc - b[i] * y2
        x, xn = xn, x
        y1p = 0.0
        for i in range(n):
            y1p += c[i] * xp[i]
        y2p = _phi(code, params, step, y1p + r2v)
        for i in range(n):
            acc = 0.0
            row = a[i]
            for j in range(n):
                acc += row[j] * xp[j]
            xpn[i] = acc - b[i] * y2p
        xp, xpn = xpn, xp
        d1 = 0.0
        for i in range(n):
            dv = xp[i] - x[i]
            d1 += dv * dv
        d1 = math.sqrt(d1)
        if d1 == 0.0:
            return 0.0, STATUS_DEGENERATE, step
        acc_log += math.log(d1 / d0)
        scale = d0 / d1
        for i in range(n):
            xp[i] = x[i] + (xp[i] - x[i]) * scale
        if not _finite(x):
            return 0.0, STATUS_NONFINITE, step

    return acc_log / n_steps, STATUS_OK, -1


def rk4_loop(A, B, C, x0, t0, h, n_steps, r1_params, r2_params,
             nl_code, nl_params, record_from, record_every):
    """Fixed-step RK4 of x' = Ax + B(r1 - y2), y2 = phi(t, Cx + r2(t)).

    Forcings are c0 + amp sin(w t + ph). Outputs are recorded after each
    step at the accumulated time, starting at step record_from.
    """
    n = len(x0)
    a = [[float(A[i][j]) for j in range(n)] for i in range(n)]
    b = [float(v) for v in B]
    c = [float(v) for v in C]
    x = [float(v) for v in x0]
    params = [float(v) for v in nl_params]
    code = int(nl_code)
    r1c0, r1a, r1w, r1p = (float(v) for v in r1_params)
    r2c0, r2a, r2w, r2p = (float(v) for v in r2_params)
    h = float(h)
    t = float(t0)
    h2 = h / 2.0
    h6 = h / 6.0

    if record_from < n_steps:
        n_rec = (n_steps - record_from + record_every - 1) // record_every
    else:
        n_rec = 0
    y1o = np.empty(n_rec)
    y2o = np.empty(n_rec)
    u1o = np.empty(n_rec)
    u2o = np.empty(n_rec)
    status = STATUS_OK
    fail_step = -1

    k1 = [0.0] * n
    k2 = [0.0] * n
    k3 = [0.0] * n
    k4 = [0.0] * n
    xt = [0.0] * n

    def r1_at(tv: float) -> float:
        if r1a == 0.0:
            return r1c0
        return r1c0 + r1a * math.sin(r1w * tv + r1p)

    def r2_at(tv: float) -> float:
        if r2a == 0.0:
            return r2c0
        return r2c0 + r2a * math.sin(r2w * tv + r2p)

    def rhs(tv: float, xv, out) -> None:
        y1 = 0.0
        for i in range(n):
            y1 += c[i] * xv[i]
        y2 = _phi(code, params, tv, y1 + r2_at(tv))
        u1 = r1_at(tv) - y2
        for i in range(n):
            acc = 0.0
            row = a[i]
            for j in range(n):
                acc += row[j] * xv[j]
            out[i] = acc + b[i] * u1
    rec = 0
    for step in range(n_steps):
        rhs(t, x, k1)
        for i in range(n):
            xt[i] = x[i] + h2 * k1[i]
        rhs(t + h2, xt, k2)
        for i in range(n):
            xt[i] = x[i] + h2 * k2[i]
        rhs(t + h2, xt, k3)
        for i in range(n):
            xt[i] = x[i] + h * k3[i]
        rhs(t + h, xt, k4)
        for i in range(n):
            s = k1[i] + 2.0 * k2[i]
            s = s + 2.0 * k3[i]
            s = s + k4[i]
            x[i] = x[i] + h6 * s
        t += h
        if not _finite(x):
            status = STATUS_NONFINITE
            fail_step = step
            break
        if step >= record_from and (step - record_from) % record_every == 0:
            y1 = 0.0
            for i in range(n):
                y1 += c[i] * x[i]
            u2 = y1 + r2_at(t)
            y2 = _phi(code, params, t, u2)
            u1 = r1_at(t) - y2
            y1o[rec] = y1
            y2o[rec] = y2
            u1o[rec] = u1
            u2o[rec] = u2
            rec += 1

    if rec < n_rec:
        y1o = y1o[:rec]
        y2o = y2o[:rec]
        u1o = u1o[:rec]
        u2o = u2o[:rec]
    x_final = np.array(x)
    return y1o, y2o, u1o, u2o, x_final, t, status, fail_step
