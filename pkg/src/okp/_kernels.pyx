# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-item decision loops.

Each function is a straight transliteration of the corresponding
stepwise machine in okp.algorithms / okp.conversion, with identical
operation order and the same libm calls, so decisions agree bit for bit
with the pure Python backend (enforced by the cross-backend tests).
"""

import numpy as np

from libc.math cimport ceil, exp, fabs, log, log1p, nearbyint, pow


cdef inline bint feq(double a, double b) nogil:
    cdef double d = a - b
    cdef double m, mb, tol
    if d < 0.0:
        d = -d
    m = fabs(a)
    mb = fabs(b)
    if mb > m:
        m = mb
    tol = 1e-12 * m
    if tol < 1e-15:
        tol = 1e-15
    return d <= tol


def ta_run(double[::1] v, double[::1] w, double lo, double hi, double[::1] x):
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double alpha = 1.0 + log(hi / lo)
    cdef double zbreak = 1.0 / alpha
    cdef double z = 0.0
    cdef double phi, inv, xi, room
    for i in range(n):
        phi = lo if z < zbreak else lo * exp(alpha * z - 1.0)
        if v[i] < phi:
            x[i] = 0.0
            continue
        inv = 1.0 if v[i] >= hi else (1.0 + log(v[i] / lo)) / alpha
        xi = inv - z
        if xi < 0.0:
            xi = 0.0
        if xi > w[i]:
            xi = w[i]
        room = 1.0 - z
        if xi > room:
            xi = room
        z = z + xi
        x[i] = xi


def ppn_run(double[::1] v, double[::1] w, double vhat, bint strict, double[::1] x):
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double z = 0.0
    cdef double xi, room
    cdef bint eq, ok
    for i in range(n):
        eq = feq(v[i], vhat)
        if strict:
            ok = v[i] > vhat and not eq
        else:
            ok = v[i] > vhat or eq
        if not ok:
            x[i] = 0.0
            continue
        xi = w[i]
        room = 1.0 - z
        if xi > room:
            xi = room
        if xi < 0.0:
            xi = 0.0
        z += xi
        x[i] = xi


def ppb_run(double[::1] v, double[::1] w, double vhat, double[::1] x):
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double z = 0.0
    cdef double at_mass = 0.0
    cdef double temp, xi, room
    for i in range(n):
        if feq(v[i], vhat):
            temp = 1.0 - at_mass
            if w[i] < temp:
                temp = w[i]
            if temp < 0.0:
                temp = 0.0
            at_mass += temp
            xi = temp / 2.0
        elif v[i] > vhat:
            xi = w[i] / 2.0
        else:
            x[i] = 0.0
            continue
        room = 1.0 - z
        if xi > room:
            xi = room
        if xi < 0.0:
            xi = 0.0
        z += xi
        x[i] = xi


cdef inline double reserve_step(double vi, double wi, double vhat,
                                double* omega, double* tilde, double* s) nogil:
    cdef double m, q, xi, room
    if feq(vi, vhat):
        m = 1.0 - omega[0]
        if wi < m:
            m = wi
        if m < 0.0:
            m = 0.0
        omega[0] += m
        q = m / (1.0 + omega[0])
        xi = q - s[0] * q
    elif vi > vhat:
        tilde[0] += wi
        xi = wi / (1.0 + omega[0])
    else:
        return 0.0
    room = 1.0 - s[0]
    if xi > room:
        xi = room
    if xi < 0.0:
        xi = 0.0
    s[0] = s[0] + xi
    return xi


def ppa_run(double[::1] v, double[::1] w, double vhat, double[::1] x,
            double[::1] omega_out, double[::1] s_out, double[::1] tilde_out,
            bint record):
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double omega = 0.0, tilde = 0.0, s = 0.0
    for i in range(n):
        x[i] = reserve_step(v[i], w[i], vhat, &omega, &tilde, &s)
        if record:
            omega_out[i] = omega
            s_out[i] = s
            tilde_out[i] = tilde


cdef inline double ta_step(double vi, double wi, double lo, double hi,
                           double alpha, double zbreak, double* z) nogil:
    cdef double phi, inv, xi, room
    phi = lo if z[0] < zbreak else lo * exp(alpha * z[0] - 1.0)
    if vi < phi:
        return 0.0
    inv = 1.0 if vi >= hi else (1.0 + log(vi / lo)) / alpha
    xi = inv - z[0]
    if xi < 0.0:
        xi = 0.0
    if xi > wi:
        xi = wi
    room = 1.0 - z[0]
    if xi > room:
        xi = room
    z[0] = z[0] + xi
    return xi


cdef inline double interval_step(double vi, double wi, double lo, double hi,
                                 double alpha, double zbreak,
                                 double* iz, double* s) nogil:
    cdef double xi, xt, room
    if vi > hi and not feq(vi, hi):
        xi = wi / (alpha + 1.0)
    elif vi < lo and not feq(vi, lo):
        return 0.0
    else:
        xt = ta_step(vi, wi, lo, hi, alpha, zbreak, iz)
        xi = xt * (alpha / (alpha + 1.0))
    room = 1.0 - s[0]
    if xi > room:
        xi = room
    if xi < 0.0:
        xi = 0.0
    s[0] = s[0] + xi
    return xi


def ipa_run(double[::1] v, double[::1] w, double lo, double hi, double[::1] x):
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double alpha = 1.0 + log(hi / lo)
    cdef double zbreak = 1.0 / alpha
    cdef double iz = 0.0, s = 0.0
    for i in range(n):
        x[i] = interval_step(v[i], w[i], lo, hi, alpha, zbreak, &iz, &s)


def ma_point_run(double[::1] v, double[::1] w, double lam, double vhat,
                 double lo, double hi, double[::1] x):
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double alpha = 1.0 + log(hi / lo)
    cdef double zbreak = 1.0 / alpha
    cdef double omega = 0.0, tilde = 0.0, ps = 0.0
    cdef double rz = 0.0
    cdef double s = 0.0
    cdef double xp, xr, xi, room
    for i in range(n):
        xp = reserve_step(v[i], w[i], vhat, &omega, &tilde, &ps)
        xr = ta_step(v[i], w[i], lo, hi, alpha, zbreak, &rz)
        xi = lam * xp + (1.0 - lam) * xr
        room = 1.0 - s
        if xi > room:
            xi = room
        if xi < 0.0:
            xi = 0.0
        s += xi
        x[i] = xi


def ma_interval_run(double[::1] v, double[::1] w, double lam,
                    double plo, double phi_hi, double lo, double hi,
                    double[::1] x):
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double palpha = 1.0 + log(phi_hi / plo)
    cdef double pzbreak = 1.0 / palpha
    cdef double alpha = 1.0 + log(hi / lo)
    cdef double zbreak = 1.0 / alpha
    cdef double piz = 0.0, ps = 0.0
    cdef double rz = 0.0
    cdef double s = 0.0
    cdef double xp, xr, xi, room
    for i in range(n):
        xp = interval_step(v[i], w[i], plo, phi_hi, palpha, pzbreak, &piz, &ps)
        xr = ta_step(v[i], w[i], lo, hi, alpha, zbreak, &rz)
        xi = lam * xp + (1.0 - lam) * xr
        room = 1.0 - s
        if xi > room:
            xi = room
        if xi < 0.0:
            xi = 0.0
        s += xi
        x[i] = xi


cdef inline Py_ssize_t bucket_of(double value, double lo, double delta,
                                 double logd, Py_ssize_t k) nogil:
    cdef double raw = log(value / lo) / logd
    cdef double near = nearbyint(raw)
    cdef double edge, tol
    cdef Py_ssize_t j, nearind
    nearind = <Py_ssize_t> near
    if 0 <= nearind <= k:
        edge = lo * pow(1.0 + delta, near)
        tol = fabs(value)
        if edge > tol:
            tol = edge
        if fabs(value - edge) <= 1e-12 * tol:
            return nearind
    j = <Py_ssize_t> ceil(raw)
    if j < 0:
        j = 0
    if j > k:
        j = k
    return j


def conv_run(double[::1] v, double[::1] w, double[::1] inner_x,
             double lo, Py_ssize_t k, double delta, double factor,
             double[::1] x):
    cdef double[::1] acc = np.zeros(k + 1)
    cdef double[::1] ref = np.zeros(k + 1)
    cdef double logd = log1p(delta)
    cdef Py_ssize_t i, j, n = v.shape[0]
    cdef double z = 0.0
    for i in range(n):
        j = bucket_of(v[i], lo, delta, logd, k)
        ref[j] += inner_x[i] * v[i]
        if acc[j] < ref[j] * factor:
            acc[j] += w[i] * v[i]
            z += w[i]
            x[i] = w[i]
        else:
            x[i] = 0.0
