"""Pure-Python twin of the compiled angular-flow kernel.

Integrates the perturbed system in Jordan cylindrical coordinates with the
angle as independent variable::

    dr/dtheta = rdot / thetadot,   dZ/dtheta = Zdot / thetadot,   dt/dtheta = 1 / thetadot

using a Dormand-Prince 5(4) pair with RMS error control.  The compiled
module implements the same algorithm step for step, so both backends
agree to rounding.
"""

import math

import numpy as np

OK = 0
THETA_NONMONOTONE = 1
STEP_UNDERFLOW = 2
NONFINITE = 3
SMALL_R = 4
MAX_STEPS = 5

#: thetadot must stay below this (the unperturbed value is -1)
THETADOT_MAX = -1e-8
R_MIN = 1e-6

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


def _ipow(x, n):
    out = 1.0
    while n > 0:
        if n & 1:
            out *= x
        x *= x
        n >>= 1
    return out


class _Rhs:
    def __init__(self, a, b, eps, exps, coeffs):
        self.a, self.b, self.eps = a, b, eps
        self.sb = math.sqrt(b)
        self.ab = a * a + b
        self.terms = [(int(e[0]), int(e[1]), int(e[2]), float(c)) for e, c in zip(exps, coeffs)]

    def __call__(self, th, r, Z):
        """Return ``(dr, dZ, dt, thetadot)`` at angle ``th``."""
        a, b, sb, ab = self.a, self.b, self.sb, self.ab
        phi = sb * th
        c, s = math.cos(phi), math.sin(phi)
        x = sb * r * s - a * Z
        y = a * a * Z - b * r * c
        z = r * c + Z
        F = 0.0
        for i, j, k, coef in self.terms:
            F += coef * _ipow(x, i) * _ipow(y, j) * _ipow(z, k)
        eF = self.eps * F
        rdot = eF * (a * s - sb * c) / (sb * ab)
        thdot = -1.0 + eF * (a * c + sb * s) / (b * r * ab)
        Zdot = eF / ab - a * Z
        return rdot / thdot, Zdot / thdot, 1.0 / thdot, thdot


def theta_flow(a, b, eps, exps, coeffs, r0, Z0, theta_end, rtol, atol, h_max, max_steps):
    """Flow ``(r, Z, t)`` from angle 0 to ``theta_end``.

    Returns ``(status, r, Z, t, nsteps)``; on a nonzero status the state
    is the last accepted one.
    """
    rhs = _Rhs(a, b, eps, np.asarray(exps).reshape(-1, 3), np.asarray(coeffs, dtype=float))
    direction = 1.0 if theta_end > 0 else -1.0
    span = abs(theta_end)
    th, r, Z, t = 0.0, float(r0), float(Z0), 0.0
    h = min(h_max, span / 50.0)
    nsteps = 0

    k1 = rhs(th, r, Z)
    if k1[3] >= THETADOT_MAX:
        return THETA_NONMONOTONE, r, Z, t, nsteps
    while direction * (theta_end - th) > 0:
        if nsteps >= max_steps:
            return MAX_STEPS, r, Z, t, nsteps
        rem = abs(theta_end - th)
        last = h >= rem
        if last:
            h = rem
        if h <= 1e-14 * max(1.0, abs(th)):
            return STEP_UNDERFLOW, r, Z, t, nsteps
        hs = direction * h

        k2 = rhs(th + C2 * hs, r + hs * A21 * k1[0], Z + hs * A21 * k1[1])
        k3 = rhs(th + C3 * hs,
                 r + hs * (A31 * k1[0] + A32 * k2[0]),
                 Z + hs * (A31 * k1[1] + A32 * k2[1]))
        k4 = rhs(th + C4 * hs,
                 r + hs * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
                 Z + hs * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]))
        k5 = rhs(th + C5 * hs,
                 r + hs * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
                 Z + hs * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]))
        k6 = rhs(th + hs,
                 r + hs * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
                 Z + hs * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]))
        ks = (k1, k2, k3, k4, k5, k6)
        if any(k[3] >= THETADOT_MAX for k in ks):
            return THETA_NONMONOTONE, r, Z, t, nsteps

        new = []
        for m, y0 in ((0, r), (1, Z), (2, t)):
            new.append(y0 + hs * (B1 * k1[m] + B3 * k3[m] + B4 * k4[m] + B5 * k5[m] + B6 * k6[m]))
        rn, Zn, tn = new
        if not (math.isfinite(rn) and math.isfinite(Zn) and math.isfinite(tn)):
            return NONFINITE, r, Z, t, nsteps
        if rn < R_MIN:
            return SMALL_R, r, Z, t, nsteps
        k7 = rhs(th + hs, rn, Zn)
        if k7[3] >= THETADOT_MAX:
            return THETA_NONMONOTONE, r, Z, t, nsteps

        acc = 0.0
        for m, y0, y1 in ((0, r, rn), (1, Z, Zn), (2, t, tn)):
            e = hs * (E1 * k1[m] + E3 * k3[m] + E4 * k4[m] + E5 * k5[m] + E6 * k6[m] + E7 * k7[m])
            sc = atol + rtol * max(abs(y0), abs(y1))
            acc += (e / sc) ** 2
        err = math.sqrt(acc / 3.0)

        if err <= 1.0:
            th = theta_end if last else th + hs
            r, Z, t = rn, Zn, tn
            k1 = k7
            nsteps += 1
            fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = min(h_max, h * fac)
    return OK, r, Z, t, nsteps
