# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels; arithmetic-order twin of _kernels_py.py.

The build disables FP contraction so these loops are bit-identical to the
pure-Python fallback. Any change here must be mirrored there.
"""
import numpy as np

cimport cython
from libc.math cimport log, sin, sqrt

IMPL = "cython"

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_DEGENERATE = 2

NL_ZERO = 0
NL_SATURATION = 1
NL_DEADZONE = 2
NL_PWL = 3
NL_GAIN_TABLE = 4
NL_GAIN_SWITCH = 5

cdef int _ST_OK = 0
cdef int _ST_NONFINITE = 1
cdef int _ST_DEGENERATE = 2

cdef double _STATE_CAP = 1e12


cdef inline double _phi(int code, double* params, double phase, double u) nogil:
    cdef double limit, w, period
    cdef int npts, lo, hi, mid, p, ng, j
    if code == 0:
        return 0.0
    if code == 1:
        limit = params[0]
        if u > limit:
            return limit
        if u < -limit:
            return -limit
        return u
    if code == 2:
        w = params[0]
        if u > w:
            return u - w
        if u < -w:
            return u + w
        return 0.0
    if code == 3:
        npts = <int>params[0]
        if u <= params[1]:
            return params[1 + npts]
        if u >= params[npts]:
            return params[2 * npts]
        lo = 0
        hi = npts - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if params[1 + mid] <= u:
                lo = mid
            else:
                hi = mid
        return params[1 + npts + lo] + (params[2 + npts + lo] - params[1 + npts + lo]) \
            * (u - params[1 + lo]) / (params[2 + lo] - params[1 + lo])
    if code == 4:
        p = <int>params[0]
        return params[1 + (<long>phase) % p] * u
    if code == 5:
        period = params[0]
        ng = <int>params[1]
        j = <int>((phase % period) / period * ng)
        if j >= ng:
            j = ng - 1
        return params[2 + j] * u
    return 0.0


cdef inline bint _finite(double* x, int n) nogil:
    cdef int i
    for i in range(n):
        if not (-_STATE_CAP < x[i] < _STATE_CAP):
            return False
    return True


def discrete_loop(A, B, C, x0, r1_table, r2_table, nl_code, nl_params,
                  n_steps, record_states=False):
    """y1 = Cx; u2 = y1 + r2[n]; y2 = phi(n, u2); u1 = r1[n] - y2; x+ = Ax + B u1."""
    cdef int n = len(x0)
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(C, dtype=np.float64)
    xbuf = np.array(x0, dtype=np.float64)
    xnbuf = np.zeros(n)
    cdef double[::1] xv = xbuf
    cdef double[::1] xnv = xnbuf
    cdef double[::1] r1 = np.ascontiguousarray(r1_table, dtype=np.float64)
    cdef double[::1] r2 = np.ascontiguousarray(r2_table, dtype=np.float64)
    cdef long p1 = r1.shape[0]
    cdef long p2 = r2.shape[0]
    pbuf = np.ascontiguousarray(nl_params, dtype=np.float64)
    if pbuf.shape[0] == 0:
        pbuf = np.zeros(1)
    cdef double[::1] pv = pbuf
    cdef double* params = &pv[0]
    cdef int code = int(nl_code)
    cdef long steps = int(n_steps)
    cdef bint rec_states = bool(record_states)

    y1o = np.empty(steps)
    y2o = np.empty(steps)
    u1o = np.empty(steps)
    u2o = np.empty(steps)
    xs = np.empty((steps, n)) if rec_states else None
    cdef double[::1] y1v = y1o
    cdef double[::1] y2v = y2o
    cdef double[::1] u1v = u1o
    cdef double[::1] u2v = u2o
    cdef double[:, ::1] xsv = xs if rec_states else np.empty((1, n))

    cdef double* x = &xv[0]
    cdef double* xn = &xnv[0]
    cdef double* tmp

    cdef int status = _ST_OK
    cdef long fail_step = -1
    cdef long step
    cdef int i, j
    cdef double y1, u2, y2, u1, acc

    with nogil:
        for step in range(steps):
            y1 = 0.0
            for i in range(n):
                y1 += c[i] * x[i]
            u2 = y1 + r2[step % p2]
            y2 = _phi(code, params, <double>step, u2)
            u1 = r1[step % p1] - y2
            y1v[step] = y1
            y2v[step] = y2
            u1v[step] = u1
            u2v[step] = u2
            if rec_states:
                for i in range(n):
                    xsv[step, i] = x[i]
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += a[i, j] * x[j]
                xn[i] = acc + b[i] * u1
            tmp = x
            x = xn
            xn = tmp
            if not _finite(x, n):
                status = _ST_NONFINITE
                fail_step = step
                break

    x_final = np.empty(n)
    cdef double[::1] xf = x_final
    for i in range(n):
        xf[i] = x[i]
    return y1o, y2o, u1o, u2o, xs, x_final, status, fail_step


def lyapunov_loop(A, B, C, x0, r2_table, nl_code, nl_params,
                  n_steps, discard, d0_in, dir0):
    """Two-trajectory largest exponent; the phase counter runs through discard."""
    cdef int n = len(x0)
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(C, dtype=np.float64)
    xbuf = np.array(x0, dtype=np.float64)
    xnbuf = np.zeros(n)
    xpbuf = np.zeros(n)
    xpnbuf = np.zeros(n)
    cdef double[::1] xv = xbuf
    cdef double[::1] xnv = xnbuf
    cdef double[::1] xpv = xpbuf
    cdef double[::1] xpnv = xpnbuf
    cdef double[::1] r2 = np.ascontiguousarray(r2_table, dtype=np.float64)
    cdef long p2 = r2.shape[0]
    pbuf = np.ascontiguousarray(nl_params, dtype=np.float64)
    if pbuf.shape[0] == 0:
        pbuf = np.zeros(1)
    cdef double[::1] pv = pbuf
    cdef double* params = &pv[0]
    cdef int code = int(nl_code)
    cdef long steps = int(n_steps)
    cdef long burn = int(discard)
    cdef double d0 = float(d0_in)
    cdef double[::1] dirv = np.ascontiguousarray(dir0, dtype=np.float64)

    cdef double* x = &xv[0]
    cdef double* xn = &xnv[0]
    cdef double* xp = &xpv[0]
    cdef double* xpn = &xpnv[0]
    cdef double* tmp

    cdef long step
    cdef int i, j
    cdef double y1, y2, y1p, y2p, acc, r2v, d1, dv, scale, nrm
    cdef double acc_log = 0.0
    cdef int status = _ST_OK
    cdef long fail_step = -1

    with nogil:
        for step in range(burn):
            y1 = 0.0
            for i in range(n):
                y1 += c[i] * x[i]
            y2 = _phi(code, params, <double>step, y1 + r2[step % p2])
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += a[i, j] * x[j]
                xn[i] = acc - b[i] * y2
            tmp = x
            x = xn
            xn = tmp
            if not _finite(x, n):
                status = _ST_NONFINITE
                fail_step = step
                break

        if status == _ST_OK:
            nrm = 0.0
            for i in range(n):
                nrm += dirv[i] * dirv[i]
            nrm = sqrt(nrm)
            for i in range(n):
                xp[i] = x[i] + dirv[i] / nrm * d0

            for step in range(burn, burn + steps):
                r2v = r2[step % p2]
                y1 = 0.0
                for i in range(n):
                    y1 += c[i] * x[i]
                y2 = _phi(code, params, <double>step, y1 + r2v)
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc += a[i, j] * x[j]
                    xn[i] = acc - b[i] * y2
                tmp = x
                x = xn
                xn = tmp
                y1p = 0.0
                for i in range(n):
                    y1p += c[i] * xp[i]
                y2p = _phi(code, params, <double>step, y1p + r2v)
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc += a[i, j] * xp[j]
                    xpn[i] = acc - b[i] * y2p
                tmp = xp
                xp = xpn
                xpn = tmp
                d1 = 0.0
                for i in range(n):
                    dv = xp[i] - x[i]
                    d1 += dv * dv
                d1 = sqrt(d1)
                if d1 == 0.0:
                    status = _ST_DEGENERATE
                    fail_step = step
                    break
                acc_log += log(d1 / d0)
                scale = d0 / d1
                for i in range(n):
                    xp[i] = x[i] + (xp[i] - x[i]) * scale
                if not _finite(x, n):
                    status = _ST_NONFINITE
                    fail_step = step
                    break

    if status != _ST_OK:
        return 0.0, status, fail_step
    return acc_log / steps, STATUS_OK, -1


def rk4_loop(A, B, C, x0, t0, h_in, n_steps, r1_params, r2_params,
             nl_code, nl_params, record_from, record_every):
    """Fixed-step RK4 of x' = Ax + B(r1 - y2), y2 = phi(t, Cx + r2(t)).

    Forcings are c0 + amp sin(w t + ph). Outputs are recorded after each
    step at the accumulated time, starting at step record_from.
    """
    cdef int n = len(x0)
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(C, dtype=np.float64)
    xbuf = np.array(x0, dtype=np.float64)
    cdef double[::1] xv = xbuf
    cdef double* x = &xv[0]
    pbuf = np.ascontiguousarray(nl_params, dtype=np.float64)
    if pbuf.shape[0] == 0:
        pbuf = np.zeros(1)
    cdef double[::1] pv = pbuf
    cdef double* params = &pv[0]
    cdef int code = int(nl_code)
    cdef double r1c0 = float(r1_params[0])
    cdef double r1a = float(r1_params[1])
    cdef double r1w = float(r1_params[2])
    cdef double r1p = float(r1_params[3])
    cdef double r2c0 = float(r2_params[0])
    cdef double r2a = float(r2_params[1])
    cdef double r2w = float(r2_params[2])
    cdef double r2p = float(r2_params[3])
    cdef double h = float(h_in)
    cdef double t = float(t0)
    cdef double h2 = h / 2.0
    cdef double h6 = h / 6.0
    cdef long steps = int(n_steps)
    cdef long rec_from = int(record_from)
    cdef long rec_every = int(record_every)

    cdef long n_rec
    if rec_from < steps:
        n_rec = (steps - rec_from + rec_every - 1) // rec_every
    else:
        n_rec = 0
    y1o = np.empty(n_rec)
    y2o = np.empty(n_rec)
    u1o = np.empty(n_rec)
    u2o = np.empty(n_rec)
    cdef double[::1] y1v = y1o
    cdef double[::1] y2v = y2o
    cdef double[::1] u1v = u1o
    cdef double[::1] u2v = u2o

    k1buf = np.zeros(n)
    k2buf = np.zeros(n)
    k3buf = np.zeros(n)
    k4buf = np.zeros(n)
    xtbuf = np.zeros(n)
    cdef double[::1] k1v = k1buf
    cdef double[::1] k2v = k2buf
    cdef double[::1] k3v = k3buf
    cdef double[::1] k4v = k4buf
    cdef double[::1] xtv = xtbuf
    cdef double* k1 = &k1v[0]
    cdef double* k2 = &k2v[0]
    cdef double* k3 = &k3v[0]
    cdef double* k4 = &k4v[0]
    cdef double* xt = &xtv[0]

    cdef int status = _ST_OK
    cdef long fail_step = -1
    cdef long rec = 0
    cdef long step
    cdef int i, j
    cdef double y1, y2, u1, u2, acc, s, tv, r1v, r2v

    with nogil:
        for step in range(steps):
            # k1 at t
            tv = t
            if r2a == 0.0:
                r2v = r2c0
            else:
                r2v = r2c0 + r2a * sin(r2w * tv + r2p)
            if r1a == 0.0:
                r1v = r1c0
            else:
                r1v = r1c0 + r1a * sin(r1w * tv + r1p)
            y1 = 0.0
            for i in range(n):
                y1 += c[i] * x[i]
            y2 = _phi(code, params, tv, y1 + r2v)
            u1 = r1v - y2
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += a[i, j] * x[j]
                k1[i] = acc + b[i] * u1
            # k2 at t + h/2
            tv = t + h2
            for i in range(n):
                xt[i] = x[i] + h2 * k1[i]
            if r2a == 0.0:
                r2v = r2c0
            else:
                r2v = r2c0 + r2a * sin(r2w * tv + r2p)
            if r1a == 0.0:
                r1v = r1c0
            else:
                r1v = r1c0 + r1a * sin(r1w * tv + r1p)
            y1 = 0.0
            for i in range(n):
                y1 += c[i] * xt[i]
            y2 = _phi(code, params, tv, y1 + r2v)
            u1 = r1v - y2
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += a[i, j] * xt[j]
                k2[i] = acc + b[i] * u1
            # k3 at t + h/2 (same forcing values as k2)
            for i in range(n):
                xt[i] = x[i] + h2 * k2[i]
            y1 = 0.0
            for i in range(n):
                y1 += c[i] * xt[i]
            y2 = _phi(code, params, tv, y1 + r2v)
            u1 = r1v - y2
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += a[i, j] * xt[j]
                k3[i] = acc + b[i] * u1
            # k4 at t + h
            tv = t + h
            for i in range(n):
                xt[i] = x[i] + h * k3[i]
            if r2a == 0.0:
                r2v = r2c0
            else:
                r2v = r2c0 + r2a * sin(r2w * tv + r2p)
            if r1a == 0.0:
                r1v = r1c0
            else:
                r1v = r1c0 + r1a * sin(r1w * tv + r1p)
            y1 = 0.0
            for i in range(n):
                y1 += c[i] * xt[i]
            y2 = _phi(code, params, tv, y1 + r2v)
            u1 = r1v - y2
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += a[i, j] * xt[j]
                k4[i] = acc + b[i] * u1

            for i in range(n):
                s = k1[i] + 2.0 * k2[i]
                s = s + 2.0 * k3[i]
                s = s + k4[i]
                x[i] = x[i] + h6 * s
            t += h
            if not _finite(x, n):
                status = _ST_NONFINITE
                fail_step = step
                break
            if step >= rec_from and (step - rec_from) % rec_every == 0:
                if r2a == 0.0:
                    r2v = r2c0
                else:
                    r2v = r2c0 + r2a * sin(r2w * t + r2p)
                if r1a == 0.0:
                    r1v = r1c0
                else:
                    r1v = r1c0 + r1a * sin(r1w * t + r1p)
                y1 = 0.0
                for i in range(n):
                    y1 += c[i] * x[i]
                u2 = y1 + r2v
                y2 = _phi(code, params, t, u2)
                u1 = r1v - y2
                y1v[rec] = y1
                y2v[rec] = y2
                u1v[rec] = u1
                u2v[rec] = u2
                rec += 1

    if rec < n_rec:
        y1o = y1o[:rec]
        y2o = y2o[:rec]
        u1o = u1o[:rec]
        u2o = u2o[:rec]
    x_final = np.array(xbuf)
    return y1o, y2o, u1o, u2o, x_final, t, status, fail_step
