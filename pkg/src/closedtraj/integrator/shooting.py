"""Return map on the section ``Y = 0`` and Newton shooting for periodic orbits.

The map integrates the exact angular system (angle as independent
variable) over one revolution.  The angle runs backwards in forward time,
and the revolution is taken in the direction in which the transverse
coordinate ``Z`` contracts: forward time for ``a > 0``, backward for
``a < 0``.  Fixed points are the same either way, but Newton on the
contracting map stays well conditioned.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..errors import (
    NoConvergence,
    NonFinite,
    StepSizeUnderflow,
    ThetaNonMonotone,
)
from ..model import Params, field_perturbed
from . import _kernels_py as codes
from . import kernels
from .ode import integrate
from .trajectory import IntegrationConfig, Trajectory

#: tolerances used for the map regardless of a looser caller config
MAP_RTOL = 1e-12
MAP_ATOL = 1e-14
MAX_STEPS = 200_000


class PeriodicOrbit(NamedTuple):
    r: float
    Z: float
    orbit: Trajectory
    period: float
    residual: float
    iterations: int
    closure: float


def angular_period(params: Params) -> float:
    """Signed angle swept by one return: ``-sign(a) 2 pi / sqrt(b)``."""
    if not params.b > 0:
        raise ValueError(f"b must be positive, got {params.b}")
    if params.a == 0:
        raise ValueError("a must be nonzero")
    return -math.copysign(2.0 * math.pi / math.sqrt(params.b), params.a)


def flow_theta(params: Params, F, eps: float, start, cfg: IntegrationConfig | None = None):
    """One revolution from ``(r, Z)``; returns ``(r', Z', t)`` with ``t`` the signed time."""
    cfg = cfg or IntegrationConfig()
    r0, Z0 = float(start[0]), float(start[1])
    if not r0 > 0:
        raise ValueError("r must be positive")
    theta_end = angular_period(params)
    status, r, Z, t, _ = kernels.theta_flow(
        params.a, params.b, float(eps), F.exponents(), F.coefficients(), r0, Z0, theta_end,
        min(cfg.rel_tol, MAP_RTOL), min(cfg.abs_tol, MAP_ATOL),
        cfg.step_limit(abs(theta_end)), MAX_STEPS,
    )
    if status == codes.OK:
        return r, Z, t
    where = f"(r={r:.6g}, Z={Z:.3g}, t={t:.6g})"
    if status == codes.THETA_NONMONOTONE:
        raise ThetaNonMonotone(f"angular velocity lost its sign near {where}")
    if status == codes.SMALL_R:
        raise ThetaNonMonotone(f"orbit approached the axis r = 0 near {where}")
    if status == codes.NONFINITE:
        raise NonFinite(f"state became non-finite near {where}")
    raise StepSizeUnderflow(f"angular integration stalled (status {status}) near {where}")


def return_map(params: Params, F, eps: float, start, cfg: IntegrationConfig | None = None):
    """``(r, Z) -> (r', Z')`` after one revolution of the perturbed flow."""
    r, Z, _ = flow_theta(params, F, eps, start, cfg)
    return r, Z


def find_periodic_orbit(params: Params, F, eps: float, r_guess: float,
                        cfg: IntegrationConfig | None = None, max_iter: int = 50,
                        tol: float = 1e-9, Z_guess: float = 0.0) -> PeriodicOrbit:
    """Newton iteration on ``return_map(x) - x`` from ``(r_guess, Z_guess)``."""
    if eps == 0:
        raise ValueError("eps = 0: every orbit of the plane is periodic, nothing to isolate")
    if not r_guess > 0:
        raise ValueError("r_guess must be positive")
    cfg = cfg or IntegrationConfig()

    def G(x):
        r, Z = return_map(params, F, eps, x, cfg)
        return np.array([r - x[0], Z - x[1]])

    x = np.array([float(r_guess), float(Z_guess)])
    g = G(x)
    it = 0
    while np.max(np.abs(g)) > tol:
        if it >= max_iter:
            raise NoConvergence(f"no fixed point after {max_iter} iterations, residual {np.max(np.abs(g)):.3e}")
        it += 1
        jac = np.empty((2, 2))
        for col in range(2):
            d = 1e-6 * max(1.0, abs(x[col]))
            xp = x.copy()
            xp[col] += d
            jac[:, col] = (G(xp) - g) / d
        try:
            dx = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Jacobian at r={x[0]:.6g}") from exc
        lam, accepted = 1.0, False
        for _ in range(30):
            xn = x + lam * dx
            if xn[0] > 0:
                try:
                    gn = G(xn)
                except (ThetaNonMonotone, NonFinite, StepSizeUnderflow):
                    gn = None
                if gn is not None and np.max(np.abs(gn)) < np.max(np.abs(g)) * (1 - 1e-4 * lam) + tol:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            raise NoConvergence(f"line search failed at r={x[0]:.6g}, residual {np.max(np.abs(g)):.3e}")
        x, g = xn, gn

    r, Z, t = flow_theta(params, F, eps, x, cfg)
    orbit = periodic_orbit_states(params, F, eps, x, t, cfg)
    p0 = orbit.states[0]
    closure = float(np.max(np.abs(orbit.final - p0)))
    return PeriodicOrbit(float(x[0]), float(x[1]), orbit, abs(t), float(np.max(np.abs(g))), it, closure)


def periodic_orbit_states(params: Params, F, eps: float, start, t_end: float,
                          cfg: IntegrationConfig | None = None) -> Trajectory:
    """Integrate the perturbed field in ``(x, y, z)`` from the section point ``start``."""
    from ..averaging import jordan_transform

    cfg = cfg or IntegrationConfig()
    B, _, _ = jordan_transform(params)
    p0 = B @ np.array([float(start[0]), 0.0, float(start[1])])
    pe = Params(params.a, eps, params.b)
    tight = IntegrationConfig(min(cfg.rel_tol, MAP_RTOL), min(cfg.abs_tol, MAP_ATOL),
                              cfg.max_step, cfg.event_tol)
    return integrate(lambda t, p: field_perturbed(p, pe, F), p0, (0.0, t_end), tight,
                     period=2.0 * math.pi / math.sqrt(params.b))
