"""Adaptive integration with dense output and event location.

Stepping is delegated to scipy's DOP853 (an embedded 8(5,3) pair whose
dense output is a 7th-order interpolant).  Event location on a dense
segment is done here: a bisection bracket refined by safeguarded Newton,
plus a minimisation pass to catch grazing contacts that do not change
sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple

import numpy as np
from scipy.integrate import DOP853, OdeSolution
from scipy.optimize import minimize_scalar

from ..errors import NonFinite, NoSignChange, StepSizeUnderflow
from .trajectory import IntegrationConfig, Trajectory

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Segment:
    """A dense interpolant restricted to ``[t_old, t]`` (either orientation)."""

    fun: Callable[[float], np.ndarray]
    t_old: float
    t: float

    def __call__(self, t):
        return self.fun(t)

    @classmethod
    def of(cls, dense, t_lo: float | None = None, t_hi: float | None = None) -> "Segment":
        lo = dense.t_old if t_lo is None else t_lo
        hi = dense.t if t_hi is None else t_hi
        return cls(dense, float(lo), float(hi))


class EventLocation(NamedTuple):
    t: float
    p: np.ndarray
    grazing: bool


class Step(NamedTuple):
    t_old: float
    t: float
    y: np.ndarray
    dense: Callable


def steps(field, x0, t0: float, t1: float, cfg: IntegrationConfig, period: float = TWO_PI) -> Iterator[Step]:
    """Yield accepted DOP853 steps from ``t0`` towards ``t1``."""
    solver = DOP853(
        field, t0, np.asarray(x0, dtype=float), t1,
        rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.step_limit(period),
    )
    while solver.status == "running":
        t_old = solver.t
        message = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"{message} (t = {solver.t})")
        if not np.all(np.isfinite(solver.y)):
            raise NonFinite(f"state became non-finite at t = {solver.t}")
        yield Step(t_old, solver.t, solver.y.copy(), solver.dense_output())


def integrate(field, x0, t_span, cfg: IntegrationConfig | None = None, period: float = TWO_PI) -> Trajectory:
    """Integrate ``x' = field(t, x)`` over ``t_span`` (forward or backward).

    ``period`` is the natural time scale used for the default step cap.
    """
    cfg = cfg or IntegrationConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 == t1:
        raise ValueError("t_span is degenerate")
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise NonFinite("initial state is not finite")
    ts, ys, interps = [t0], [x0.copy()], []
    for step in steps(field, x0, t0, t1, cfg, period):
        ts.append(step.t)
        ys.append(step.y)
        interps.append(step.dense)
    return Trajectory(np.array(ts), np.array(ys), dense=OdeSolution(ts, interps))


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def locate_event(segment, h: Callable[[np.ndarray], float], cfg: IntegrationConfig | None = None,
                 dhdt: Callable[[float], float] | None = None) -> EventLocation:
    """First zero of ``h(segment(t))`` on the segment.

    A sign change is bracketed by bisection and polished by Newton steps
    that fall back to bisection whenever they leave the bracket.  Without
    a sign change the extremum towards zero is located; if it comes within
    ``event_tol`` of zero the contact is reported as grazing, if it
    overshoots the root before it is bracketed and located.
    """
    cfg = cfg or IntegrationConfig()
    tol = cfg.event_tol
    ta, tb = float(segment.t_old), float(segment.t)

    def H(t):
        return float(h(segment(t)))

    ha, hb = H(ta), H(tb)
    if abs(ha) <= tol:
        return EventLocation(ta, segment(ta), False)
    if _sign(ha) == _sign(hb) and abs(hb) > tol:
        s = _sign(ha)
        lo, hi = sorted((ta, tb))
        res = minimize_scalar(lambda t: s * H(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13 * max(1.0, abs(lo), abs(hi))})
        tm, gm = float(res.x), s * H(float(res.x))
        if gm > tol:
            raise NoSignChange(f"min |h| = {gm:.3e} on [{lo}, {hi}]")
        if gm >= -tol:
            return EventLocation(tm, segment(tm), True)
        tb, hb = tm, H(tm)
    elif abs(hb) <= tol:
        # the root sits at the far end; still polish below in case it is interior
        pass

    lo, hi, hlo = ta, tb, ha
    width0 = abs(tb - ta)
    if dhdt is None:
        def dhdt(t):
            d = 1e-7 * width0
            return (H(t + d) - H(t - d)) / (2.0 * d)

    t = 0.5 * (lo + hi)
    for it in range(200):
        ht = H(t)
        if abs(ht) <= tol:
            break
        if _sign(ht) == _sign(hlo):
            lo, hlo = t, ht
        else:
            hi = t
        if it < 8:
            t = 0.5 * (lo + hi)
            continue
        slope = dhdt(t)
        cand = t - ht / slope if slope != 0 and math.isfinite(slope) else math.nan
        inside = min(lo, hi) < cand < max(lo, hi)
        t = cand if inside else 0.5 * (lo + hi)
        if lo == hi or abs(hi - lo) <= 4 * np.spacing(max(abs(lo), abs(hi))):
            break
    return EventLocation(t, segment(t), False)
