"""Numerical cross-checks of the closed-form and averaging predictions.

Every check records what was measured and the tolerance it was held to,
so a report can be reproduced from plain library calls.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate as spi

from . import closed_form as cf
from .averaging import MultiPoly, averaged_function, simple_positive_roots, trig_moment
from .errors import ExistenceViolated, NoConvergence, NonFinite, StepSizeUnderflow, ThetaNonMonotone
from .integrator.ode import integrate
from .integrator.shooting import PeriodicOrbit, find_periodic_orbit
from .integrator.trajectory import IntegrationConfig
from .model import TAU_TANG, Params, RegionLabel, classify_point, field_minus, field_plus, lie_derivative, switching_h

#: endpoint tolerance for numerically integrated arcs
ENDPOINT_TOL = 1e-7
#: closure tolerance for shooting orbits (max-norm, one period)
CLOSURE_TOL = 1e-7
EPS_MAX = 0.05
#: safety factor on the calibrated convergence constant
C_CONV_FACTOR = 3.0


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "measured": float(self.measured), "tolerance": float(self.tolerance)}


@dataclass
class VerificationReport:
    title: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, measured, tolerance) -> Check:
        c = Check(name, bool(passed), float(measured), float(tolerance))
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {"title": self.title, "summary": "pass" if self.passed else "fail",
                "checks": [c.to_dict() for c in self.checks], "info": self.info}


class ConvergenceRow(NamedTuple):
    eps: float
    r_found: float
    error: float
    period: float


@dataclass
class ConvergenceTable:
    r0: float
    rows: list[ConvergenceRow]

    def __post_init__(self):
        e = [row.eps for row in self.rows]
        if any(x <= y for x, y in zip(e, e[1:])):
            raise ValueError("eps must be strictly decreasing across rows")

    @property
    def slope(self) -> float:
        """Least-squares slope of log|r - r0| against log eps."""
        if len(self.rows) < 2:
            raise ValueError("need at least two rows for a slope")
        x = np.log([row.eps for row in self.rows])
        y = np.log([row.error for row in self.rows])
        return float(np.polyfit(x, y, 1)[0])

    @property
    def c_conv(self) -> float:
        return max(row.error / row.eps for row in self.rows)


def verify_pseudo_orbit(params: Params, cfg: IntegrationConfig | None = None,
                        n_samples: int = 1000) -> VerificationReport:
    """Integrate both arcs numerically and test them against the closed forms."""
    if not cf.pseudo_orbit_exists(params):
        raise ExistenceViolated(f"a={params.a}, eps={params.eps} is outside both bands")
    cfg = cfg or IntegrationConfig()
    P, Q = cf.tangency_points(params)
    t_minus, t_plus = cf.transit_times(params)
    rep = VerificationReport(f"pseudo-orbit a={params.a!r} eps={params.eps!r}")
    rep.info.update(P=P.tolist(), Q=Q.tolist(), t_minus=t_minus, t_plus=t_plus)

    outer, d_out = _arc_endpoint_error(field_plus, params, P, Q, t_plus, cfg)
    inner, d_in = _arc_endpoint_error(field_minus, params, P, Q, t_minus, cfg)
    rep.add("outer arc X+ from P reaches Q", d_out <= ENDPOINT_TOL, d_out, ENDPOINT_TOL)
    rep.add("inner arc X- from P reaches Q", d_in <= ENDPOINT_TOL, d_in, ENDPOINT_TOL)

    inside_ok, outside_ok = cf.norm_conditions(params, n_samples)
    inner_max, outer_min = cf.norm_margins(params, n_samples)
    rep.add("inner arc inside, outer arc outside the sphere", inside_ok and outside_ok,
            max(inner_max, -outer_min), 0.0)

    labels = [classify_point(P, params), classify_point(Q, params)]
    lie = max(abs(lie_derivative("plus", P, params)), abs(lie_derivative("plus", Q, params)))
    rep.add("P and Q are tangency points of X+",
            all(lab is RegionLabel.TANGENCY_PLUS for lab in labels), lie, TAU_TANG)

    # each arc must leave P into its own side when run in the direction of its time
    signs = cf.time_signs(params)
    mismatches = 0
    mismatches += int(np.sign(t_minus) != signs.t_minus)
    mismatches += int(np.sign(t_plus) != signs.t_plus)
    mismatches += int(switching_h(inner(0.5 * inner.times[-1])) >= 0)
    mismatches += int(switching_h(outer(0.5 * outer.times[-1])) <= 0)
    rep.add("arc directions agree with the time signs", mismatches == 0, mismatches, 0)
    return rep


def _arc_endpoint_error(fld, params, P, Q, t_end, cfg):
    # Both fields carry the transverse eigenvalue -a; run the arc in the
    # direction where that mode contracts (Q -> P over -t_end otherwise) so
    # rounding is damped rather than amplified by up to exp(|a t_end|).
    if params.a * t_end > 0:
        start, target, span = P, Q, (0.0, t_end)
    else:
        start, target, span = Q, P, (0.0, -t_end)
    traj = integrate(lambda t, p: fld(p, params), start, span, cfg)
    return traj, float(np.max(np.abs(traj.final - target)))


def _calibrate(params, F, r0, eps, cfg) -> float:
    table = convergence_study(params, F, r0, [eps / 3.0, eps / 10.0], cfg)
    return table.c_conv


def verify_limit_cycle(params: Params, F: MultiPoly, eps: float, r0: float,
                       cfg: IntegrationConfig | None = None, c_conv: float | None = None,
                       r_guess: float | None = None, eps_max: float = EPS_MAX) -> VerificationReport:
    """Confirm by shooting that the averaging root ``r0`` carries a limit cycle.

    ``c_conv`` is the measured first-order constant; when omitted it is
    calibrated from two shooting runs at ``eps/3`` and ``eps/10``.  A
    Newton failure from ``r_guess`` is reported as a failed check.
    """
    if not 0 < eps <= eps_max:
        raise ValueError(f"eps must lie in (0, {eps_max}]")
    cfg = cfg or IntegrationConfig()
    guess = r0 if r_guess is None else r_guess
    rep = VerificationReport(f"limit cycle r0={r0!r} eps={eps!r}")
    rep.info.update(r0=r0, eps=eps, r_guess=guess)
    try:
        orb = find_periodic_orbit(params, F, eps, guess, cfg)
    except (NoConvergence, ThetaNonMonotone, NonFinite, StepSizeUnderflow) as exc:
        rep.info["error"] = f"{type(exc).__name__}: {exc}"
        rep.add("shooting converges", False, math.inf, 1e-9)
        return rep
    rep.info.update(r_found=orb.r, Z_found=orb.Z, period=orb.period, iterations=orb.iterations)
    rep.add("shooting converges", True, orb.residual, 1e-9)

    if c_conv is None:
        c_conv = _calibrate(params, F, r0, eps, cfg)
    rep.info["c_conv"] = c_conv
    thresh = C_CONV_FACTOR * c_conv * eps
    err = abs(orb.r - r0)
    rep.add("|r* - r0| within first-order bound", err <= thresh, err, thresh)
    rep.add("orbit closes after one period", orb.closure <= CLOSURE_TOL, orb.closure, CLOSURE_TOL)

    res, bound = plane_residual(params, F, eps, orb)
    rep.add("orbit stays O(eps) close to the plane y + bz = 0", res <= bound, res, bound)
    return rep


def plane_residual(params: Params, F: MultiPoly, eps: float, orb: PeriodicOrbit) -> tuple[float, float]:
    """``max |y + bz|`` along the orbit and its a-priori bound ``2 eps max|F| / |a|``.

    ``y + bz = (a^2 + b) Z`` and ``Z`` obeys ``Z' = -aZ + eps F/(a^2+b)``, so on a
    periodic orbit ``|y + bz| <= eps max|F| / |a|``; the factor 2 absorbs
    sampling of the maximum.
    """
    s = orb.orbit.states
    res = float(np.max(np.abs(s[:, 1] + params.b * s[:, 2])))
    fmax = float(np.max(np.abs(F(s[:, 0], s[:, 1], s[:, 2]))))
    return res, 2.0 * eps * fmax / abs(params.a)


def convergence_study(params: Params, F: MultiPoly, r0: float, eps_list,
                      cfg: IntegrationConfig | None = None) -> ConvergenceTable:
    """Shoot at each ``eps`` (starting from ``r0``) and tabulate ``|r* - r0|``."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(x <= y for x, y in zip(eps_list, eps_list[1:])):
        raise ValueError("eps values must be strictly decreasing")
    rows = []
    for e in eps_list:
        orb = find_periodic_orbit(params, F, e, r0, cfg)
        rows.append(ConvergenceRow(e, orb.r, abs(orb.r - r0), orb.period))
    return ConvergenceTable(r0, rows)


def confirm_cycles(params: Params, F: MultiPoly, eps: float, cfg: IntegrationConfig | None = None,
                   r_max: float = 10.0, min_separation: float = 0.1):
    """Shoot from every predicted root; return ``(reports, n_distinct)``."""
    roots = simple_positive_roots(averaged_function(params, F), r_max)
    reports = [verify_limit_cycle(params, F, eps, r0, cfg) for r0, _ in roots]
    found = sorted(rep.info["r_found"] for rep in reports if rep.passed)
    distinct = [r for i, r in enumerate(found) if i == 0 or r - found[i - 1] > min_separation]
    return reports, len(distinct)


def _moment_quadrature(p: int, q: int, b: float) -> float:
    sb = math.sqrt(b)
    quarter = 0.5 * math.pi / sb
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", spi.IntegrationWarning)
        for n in range(4):
            val, _ = spi.quad(lambda t: math.sin(sb * t) ** p * math.cos(sb * t) ** q,
                              n * quarter, (n + 1) * quarter, epsabs=1e-14, epsrel=1e-13, limit=200)
            total += val
    return total


def verify_moments(max_pq: int = 10, bs=(1.0, 2.0, 4.0), tol: float = 1e-11) -> VerificationReport:
    """Closed-form trigonometric moments against adaptive quadrature."""
    rep = VerificationReport(f"trig moments p,q <= {max_pq}")
    worst, odd_nonzero = 0.0, 0
    for b in bs:
        for p in range(max_pq + 1):
            for q in range(max_pq + 1):
                m = trig_moment(p, q, b)
                worst = max(worst, abs(m - _moment_quadrature(p, q, b)))
                if (p % 2 or q % 2) and m != 0.0:
                    odd_nonzero += 1
    rep.add("moments match quadrature", worst <= tol, worst, tol)
    rep.add("odd moments vanish exactly", odd_nonzero == 0, odd_nonzero, 0)
    return rep
