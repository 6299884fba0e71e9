# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled angular-flow kernel; mirrors ``_kernels_py`` step for step."""

from libc.math cimport sqrt, sin, cos, fabs, isfinite, pow

import numpy as np

cdef enum:
    OK = 0
    THETA_NONMONOTONE = 1
    STEP_UNDERFLOW = 2
    NONFINITE = 3
    SMALL_R = 4
    MAX_STEPS = 5

cdef double THETADOT_MAX = -1e-8
cdef double R_MIN = 1e-6

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline double ipow(double x, long n) nogil:
    cdef double out = 1.0
    while n > 0:
        if n & 1:
            out *= x
        x *= x
        n >>= 1
    return out


cdef struct Sys:
    double a, b, eps, sb, ab
    long n
    long long *e
    double *c


cdef inline void rhs(Sys *S, double th, double r, double Z, double *k) nogil:
    cdef double phi = S.sb * th
    cdef double c = cos(phi), s = sin(phi)
    cdef double x = S.sb * r * s - S.a * Z
    cdef double y = S.a * S.a * Z - S.b * r * c
    cdef double z = r * c + Z
    cdef double F = 0.0
    cdef long m
    for m in range(S.n):
        F += S.c[m] * ipow(x, S.e[3 * m]) * ipow(y, S.e[3 * m + 1]) * ipow(z, S.e[3 * m + 2])
    cdef double eF = S.eps * F
    cdef double rdot = eF * (S.a * s - S.sb * c) / (S.sb * S.ab)
    cdef double thdot = -1.0 + eF * (S.a * c + S.sb * s) / (S.b * r * S.ab)
    cdef double Zdot = eF / S.ab - S.a * Z
    k[0] = rdot / thdot
    k[1] = Zdot / thdot
    k[2] = 1.0 / thdot
    k[3] = thdot


def theta_flow(double a, double b, double eps, exps, coeffs, double r0, double Z0,
               double theta_end, double rtol, double atol, double h_max, long max_steps):
    """Flow ``(r, Z, t)`` from angle 0 to ``theta_end``; returns ``(status, r, Z, t, nsteps)``."""
    cdef long long[::1] e = np.ascontiguousarray(np.asarray(exps, dtype=np.int64).reshape(-1), dtype=np.int64)
    cdef double[::1] cf = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Sys S
    S.a = a
    S.b = b
    S.eps = eps
    S.sb = sqrt(b)
    S.ab = a * a + b
    S.n = cf.shape[0]
    S.e = &e[0] if e.shape[0] > 0 else NULL
    S.c = &cf[0] if cf.shape[0] > 0 else NULL

    cdef double direction = 1.0 if theta_end > 0 else -1.0
    cdef double span = fabs(theta_end)
    cdef double th = 0.0, r = r0, Z = Z0, t = 0.0
    cdef double h = min(h_max, span / 50.0)
    cdef long nsteps = 0
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double k7[4]
    cdef double y0[3]
    cdef double y1[3]
    cdef double rem, hs, err, acc, ev, sc, fac
    cdef bint last
    cdef int m, status = OK

    with nogil:
        rhs(&S, th, r, Z, k1)
        if k1[3] >= THETADOT_MAX:
            status = THETA_NONMONOTONE
        while status == OK and direction * (theta_end - th) > 0:
            if nsteps >= max_steps:
                status = MAX_STEPS
                break
            rem = fabs(theta_end - th)
            last = h >= rem
            if last:
                h = rem
            if h <= 1e-14 * max(1.0, fabs(th)):
                status = STEP_UNDERFLOW
                break
            hs = direction * h

            rhs(&S, th + C2 * hs, r + hs * A21 * k1[0], Z + hs * A21 * k1[1], k2)
            rhs(&S, th + C3 * hs,
                r + hs * (A31 * k1[0] + A32 * k2[0]),
                Z + hs * (A31 * k1[1] + A32 * k2[1]), k3)
            rhs(&S, th + C4 * hs,
                r + hs * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
                Z + hs * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]), k4)
            rhs(&S, th + C5 * hs,
                r + hs * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
                Z + hs * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]), k5)
            rhs(&S, th + hs,
                r + hs * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
                Z + hs * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]), k6)
            if (k1[3] >= THETADOT_MAX or k2[3] >= THETADOT_MAX or k3[3] >= THETADOT_MAX
                    or k4[3] >= THETADOT_MAX or k5[3] >= THETADOT_MAX or k6[3] >= THETADOT_MAX):
                status = THETA_NONMONOTONE
                break

            y0[0] = r
            y0[1] = Z
            y0[2] = t
            for m in range(3):
                y1[m] = y0[m] + hs * (B1 * k1[m] + B3 * k3[m] + B4 * k4[m] + B5 * k5[m] + B6 * k6[m])
            if not (isfinite(y1[0]) and isfinite(y1[1]) and isfinite(y1[2])):
                status = NONFINITE
                break
            if y1[0] < R_MIN:
                status = SMALL_R
                break
            rhs(&S, th + hs, y1[0], y1[1], k7)
            if k7[3] >= THETADOT_MAX:
                status = THETA_NONMONOTONE
                break

            acc = 0.0
            for m in range(3):
                ev = hs * (E1 * k1[m] + E3 * k3[m] + E4 * k4[m] + E5 * k5[m] + E6 * k6[m] + E7 * k7[m])
                sc = atol + rtol * max(fabs(y0[m]), fabs(y1[m]))
                acc += (ev / sc) * (ev / sc)
            err = sqrt(acc / 3.0)

            if err <= 1.0:
                th = theta_end if last else th + hs
                r = y1[0]
                Z = y1[1]
                t = y1[2]
                for m in range(4):
                    k1[m] = k7[m]
                nsteps += 1
                if err == 0.0:
                    fac = 10.0
                else:
                    fac = min(10.0, max(0.2, 0.9 * pow(err, -0.2)))
            else:
                fac = max(0.2, 0.9 * pow(err, -0.2))
            h = min(h_max, h * fac)
    return status, r, Z, t, nsteps
