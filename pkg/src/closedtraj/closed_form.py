"""Closed-form objects of the sphere-switched piecewise system.

X- leaves the plane ``-y + z = -eps/a`` invariant and acts there as a
saddle; X+ leaves ``y + z = eps/a`` invariant and acts there as a center.
Both planes cut the unit sphere in the same two points P and Q, which are
tangency points of X+.  When ``|a|/sqrt(2) < |eps| < |a|`` the X- arc from
P to Q stays inside the sphere and the X+ arc from P to Q stays outside;
together they close up into a pseudo-orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    ArctanDegenerate,
    DegenerateA,
    ExistenceViolated,
    LogDomain,
    NoRealIntersection,
)
from .integrator.trajectory import CrossingEvent, Trajectory
from .model import Params, classify_point

#: margin for the strict norm inequalities, see ``norm_conditions``
DELTA_NORM = 1e-8
#: relative width of the excluded band next to each arc endpoint
BOUNDARY_BAND = 1e-4


@dataclass(frozen=True)
class Plane:
    """The plane ``normal . p = offset``."""

    normal: np.ndarray
    offset: float

    def residual(self, p) -> np.ndarray | float:
        return np.asarray(p, dtype=float) @ self.normal - self.offset


@dataclass(frozen=True)
class PlanePair:
    alpha_minus: Plane
    alpha_plus: Plane


@dataclass(frozen=True)
class TangencyData:
    P: np.ndarray
    Q: np.ndarray
    t_minus: float
    t_plus: float


@dataclass
class PseudoOrbit:
    arc_inside: Trajectory
    arc_outside: Trajectory
    joints: tuple[np.ndarray, np.ndarray]


class TimeSigns(NamedTuple):
    """Signs of the transit times; ``t_minus`` is 0 where it is not real."""

    t_minus: int
    t_plus: int
    in_band: bool


def _require_a(params: Params) -> None:
    if params.a == 0:
        raise DegenerateA("a must be nonzero")


def _root(params: Params) -> float:
    # sqrt(a^2 - eps^2), the recurring radical
    _require_a(params)
    a, eps = params.a, params.eps
    if abs(eps) >= abs(a):
        raise NoRealIntersection(f"|eps| = {abs(eps)} >= |a| = {abs(a)}")
    return math.sqrt(a * a - eps * eps)


def invariant_planes(params: Params) -> PlanePair:
    _require_a(params)
    off = params.eps / params.a
    return PlanePair(
        alpha_minus=Plane(np.array([0.0, -1.0, 1.0]), -off),
        alpha_plus=Plane(np.array([0.0, 1.0, 1.0]), off),
    )


def eigen_data(which: str, params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors (as columns) of the linear part.

    ``which`` is ``"minus"`` (spectrum ``-a, 1, -1``), ``"plus"``
    (``-a, i, -i``) or ``"unperturbed"`` (``-a, i sqrt(b), -i sqrt(b)``).
    Each eigenvector is ``(lam, lam^2, 1)``; repeated eigenvalues are listed
    with their multiplicity.
    """
    a = params.a
    if which == "minus":
        pair = 1.0 + 0j
    elif which == "plus":
        pair = 1j
    elif which == "unperturbed":
        pair = np.sqrt(complex(-params.b))
    else:
        raise ValueError(f"unknown field {which!r}")
    lams = np.array([-a, pair, -pair], dtype=complex)
    vecs = np.array([[lam, lam * lam, 1.0] for lam in lams], dtype=complex).T
    return lams, vecs


def flow_alpha_minus(t, x0: float, y0: float, params: Params) -> np.ndarray:
    """X- flow inside its invariant plane from ``(x0, y0, y0 - eps/a)``.

    ``t`` may be a scalar (returns shape ``(3,)``) or an array (``(n, 3)``).
    """
    _require_a(params)
    t = np.asarray(t, dtype=float)
    ch, sh = np.cosh(t), np.sinh(t)
    x = x0 * ch + y0 * sh
    y = x0 * sh + y0 * ch
    z = y - params.eps / params.a
    return np.stack([x, y, z], axis=-1)


def flow_alpha_plus(t, x0: float, y0: float, params: Params) -> np.ndarray:
    """X+ flow inside its invariant plane from ``(x0, y0, eps/a - y0)``; 2*pi periodic."""
    _require_a(params)
    t = np.asarray(t, dtype=float)
    c, s = np.cos(t), np.sin(t)
    x = x0 * c + y0 * s
    y = y0 * c - x0 * s
    z = params.eps / params.a - y
    return np.stack([x, y, z], axis=-1)


def tangency_points(params: Params) -> tuple[np.ndarray, np.ndarray]:
    root = _root(params)
    a, eps = params.a, params.eps
    P = np.array([-root / a, eps / a, 0.0])
    Q = np.array([root / a, eps / a, 0.0])
    return P, Q


def transit_times(params: Params) -> tuple[float, float]:
    """Flow times from P to Q along X- (``t_minus``) and X+ (``t_plus``).

    ``t_plus`` uses the principal arctan branch, so it lies in ``(-pi, pi)``.
    """
    root = _root(params)
    eps = params.eps
    if eps == 0:
        raise ArctanDegenerate("eps = 0")
    num, den = root + eps, eps - root
    if den == 0 or num / den <= 0:
        raise LogDomain(
            f"ln argument {num}/{den} is not positive; eps lies outside "
            "|a|/sqrt(2) < |eps| < |a|"
        )
    return math.log(num / den), 2.0 * math.atan(root / eps)


def t_plus_arccos(params: Params) -> float:
    """``arccos((2 eps^2 - a^2)/a^2)`` in ``(0, pi]``; equals ``|t_plus|``."""
    _require_a(params)
    a2 = params.a * params.a
    arg = (2.0 * params.eps * params.eps - a2) / a2
    return math.acos(min(1.0, max(-1.0, arg)))


def pseudo_orbit_exists(params: Params) -> bool:
    a, eps = abs(params.a), params.eps
    if a == 0:
        return False
    lo = a / math.sqrt(2.0)
    return lo < eps < a or -a < eps < -lo


def time_signs(params: Params) -> TimeSigns:
    _root(params)
    if params.eps == 0:
        raise ArctanDegenerate("eps = 0")
    a, eps = abs(params.a), params.eps
    lo = a / math.sqrt(2.0)
    t_plus = 1 if eps > 0 else -1
    if lo < eps < a:
        t_minus = 1
    elif -a < eps < -lo:
        t_minus = -1
    else:
        t_minus = 0
    return TimeSigns(t_minus, t_plus, t_minus != 0)


def tangency_data(params: Params) -> TangencyData:
    P, Q = tangency_points(params)
    t_minus, t_plus = transit_times(params)
    return TangencyData(P, Q, t_minus, t_plus)


def _interior_times(t_end: float, n_samples: int) -> np.ndarray:
    t = t_end * np.arange(1, n_samples + 1) / (n_samples + 1)
    band = BOUNDARY_BAND * abs(t_end)
    keep = (np.abs(t) > band) & (np.abs(t_end - t) > band)
    return t[keep]


def norm_margins(params: Params, n_samples: int = 1000) -> tuple[float, float]:
    """``(max |x_-(t)|^2 - 1, min |x_+(t)|^2 - 1)`` over interior samples of both arcs."""
    if n_samples < 10:
        raise ValueError("n_samples must be >= 10")
    P, _ = tangency_points(params)
    t_minus, t_plus = transit_times(params)
    inner = flow_alpha_minus(_interior_times(t_minus, n_samples), P[0], P[1], params)
    outer = flow_alpha_plus(_interior_times(t_plus, n_samples), P[0], P[1], params)
    inner_n2 = np.einsum("ij,ij->i", inner, inner)
    outer_n2 = np.einsum("ij,ij->i", outer, outer)
    return float(inner_n2.max() - 1.0), float(outer_n2.min() - 1.0)


def norm_conditions(params: Params, n_samples: int = 1000) -> tuple[bool, bool]:
    """Sampled check that the X- arc stays inside and the X+ arc outside.

    Every interior sample must satisfy the strict inequality, and the
    mid-arc gap must exceed ``DELTA_NORM`` so strictness is not a
    rounding artefact.  Samples closer to an endpoint than
    ``BOUNDARY_BAND * |t|`` are skipped, since equality holds there.
    """
    if n_samples < 10:
        raise ValueError("n_samples must be >= 10")
    P, _ = tangency_points(params)
    t_minus, t_plus = transit_times(params)
    inner_max, outer_min = norm_margins(params, n_samples)
    mid_in = flow_alpha_minus(0.5 * t_minus, P[0], P[1], params)
    mid_out = flow_alpha_plus(0.5 * t_plus, P[0], P[1], params)
    inside_ok = inner_max < 0 and 1.0 - mid_in @ mid_in > DELTA_NORM
    outside_ok = outer_min > 0 and mid_out @ mid_out - 1.0 > DELTA_NORM
    return bool(inside_ok), bool(outside_ok)


def build_pseudo_orbit(params: Params, n_samples: int = 500) -> PseudoOrbit:
    """Sample both arcs from P to Q with signed times (negative in the lower band)."""
    if not pseudo_orbit_exists(params):
        raise ExistenceViolated(
            f"no pseudo-orbit for a={params.a}, eps={params.eps}: need "
            "|a|/sqrt(2) < |eps| < |a|"
        )
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    P, Q = tangency_points(params)
    t_minus, t_plus = transit_times(params)

    def arc(flow, t_end, tag):
        times = np.linspace(0.0, t_end, n_samples)
        states = flow(times, P[0], P[1], params)
        events = [
            CrossingEvent(0.0, P.copy(), classify_point(P, params)),
            CrossingEvent(t_end, Q.copy(), classify_point(Q, params)),
        ]
        return Trajectory(
            times, states, events,
            modes=np.full(n_samples, tag),
            dense=lambda t: flow(t, P[0], P[1], params),
        )

    return PseudoOrbit(
        arc_inside=arc(flow_alpha_minus, t_minus, "inner"),
        arc_outside=arc(flow_alpha_plus, t_plus, "outer"),
        joints=(P, Q),
    )
