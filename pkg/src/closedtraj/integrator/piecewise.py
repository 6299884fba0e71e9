"""Filippov trajectories of the sphere-switched system.

Off the sphere the trajectory follows X- (inside) or X+ (outside).  At a
contact point the Lie derivatives decide: both fields pointing the same
way means crossing, opposite ways means sliding (or escape), in which
case the trajectory follows the sliding field until one Lie derivative
vanishes and it leaves along that field.

Backward integration is handled by flipping the sign of odd-order Lie
derivatives, which turns sliding regions into escape regions and back.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import DivisionDegenerate, DoubleTangency, NoSignChange
from ..model import (
    TAU_TANG,
    Params,
    as_state,
    classify_point,
    field_minus,
    field_plus,
    lie_derivative,
    lie_derivative_k,
    sliding_field,
    switching_h,
)
from .ode import TWO_PI, Segment, locate_event, steps
from .trajectory import CrossingEvent, IntegrationConfig, Trajectory

TAGS = {"minus": "inner", "plus": "outer", "sliding": "sliding"}
#: rate pulling sliding states back onto the sphere
SLIDING_STABILISATION = 1.0
#: interior samples per step scanned for sign changes
N_SCAN = 8


def _effective_sign(which, p, params, direction, tol):
    # sign of d^k/dtau^k h along the field at p, first nonvanishing order
    for k in (1, 2, 3):
        v = lie_derivative_k(which, p, params, k) * direction ** k
        if abs(v) > tol:
            return 1 if v > 0 else -1
    return 0


def _mode_at(p, params, direction, tol, grazing_field=None):
    sp = _effective_sign("plus", p, params, direction, tol)
    sm = _effective_sign("minus", p, params, direction, tol)
    if grazing_field is not None:
        # at a located extremum the first derivative is only approximately
        # zero; the curvature decides which way the field bends
        forced = 1 if lie_derivative_k(grazing_field, p, params, 2) > 0 else -1
        if grazing_field == "plus":
            sp = forced
        else:
            sm = forced
    if sp == 0 and sm == 0:
        raise DoubleTangency(f"both fields degenerate-tangent at {p}")
    if sp >= 0 and sm >= 0:
        return "plus"
    if sp <= 0 and sm <= 0:
        return "minus"
    return "sliding"


def _sliding_rhs(params, direction):
    def rhs(t, p):
        zs = sliding_field(p, params)
        hv = switching_h(p)
        g = 2.0 * p
        return zs - direction * SLIDING_STABILISATION * hv * g / (g @ g)
    return rhs


class _PiecewiseDense:
    def __init__(self):
        self.pieces = []

    def add(self, t_lo, t_hi, fun):
        self.pieces.append((min(t_lo, t_hi), max(t_lo, t_hi), fun))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return self._one(float(t))
        return np.array([self._one(float(s)) for s in t])

    def _one(self, t):
        for lo, hi, fun in self.pieces:
            if lo <= t <= hi:
                return fun(t)
        lo, hi, fun = min(self.pieces, key=lambda pc: min(abs(t - pc[0]), abs(t - pc[1])))
        return fun(t)


def integrate_piecewise(params: Params, x0, t_span, cfg: IntegrationConfig | None = None,
                        max_events: int = 10_000) -> Trajectory:
    """Filippov trajectory of the sphere-switched system from ``x0``.

    Every manifold contact is recorded as a :class:`CrossingEvent`
    labelled by :func:`~closedtraj.model.classify_point`; samples are
    tagged ``inner``, ``outer`` or ``sliding``.
    """
    cfg = cfg or IntegrationConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 == t1:
        raise ValueError("t_span is degenerate")
    direction = 1 if t1 > t0 else -1
    tol = TAU_TANG
    p = as_state(x0).copy()

    hv = switching_h(p)
    if abs(hv) <= cfg.event_tol:
        mode = _mode_at(p, params, direction, tol)
        restart = True
    else:
        mode = "plus" if hv > 0 else "minus"
        restart = False

    times, states, tags, events = [t0], [p.copy()], [TAGS[mode]], []
    dense = _PiecewiseDense()
    t = t0
    n_events = 0

    while direction * (t1 - t) > 0:
        if mode == "sliding":
            rhs = _sliding_rhs(params, direction)
            sp0 = -1 if direction * lie_derivative("plus", p, params) < 0 else 1
            sm0 = -1 if direction * lie_derivative("minus", p, params) < 0 else 1

            def gfun(q, sp0=sp0, sm0=sm0):
                return min(sp0 * direction * lie_derivative("plus", q, params),
                           sm0 * direction * lie_derivative("minus", q, params))
        else:
            fld = field_minus if mode == "minus" else field_plus
            side = 1 if mode == "plus" else -1

            def rhs(t, q, fld=fld):
                return fld(q, params)

            def gfun(q, side=side):
                return side * switching_h(q)

        hit = None
        for step in steps(rhs, p, t, t1, cfg, TWO_PI):
            try:
                hit = _scan_step(step, gfun, mode, params, direction, cfg, restart)
            except DivisionDegenerate as exc:
                raise DoubleTangency(str(exc)) from exc
            restart = False
            if hit is not None:
                break
            times.append(step.t)
            states.append(step.y)
            tags.append(TAGS[mode])
            dense.add(step.t_old, step.t, step.dense)
        if hit is None:
            break

        ev_t, ev_p, grazing, seg = hit
        if mode == "sliding":
            # sliding states drift off the sphere at the 1e-11 level
            ev_p = ev_p / np.linalg.norm(ev_p)
        dense.add(seg.t_old, ev_t, seg.fun)
        if direction * (ev_t - times[-1]) > 0:
            times.append(ev_t)
            states.append(ev_p.copy())
            tags.append(TAGS[mode])
        events.append(CrossingEvent(ev_t, ev_p.copy(), classify_point(ev_p, params, tol)))
        n_events += 1
        if n_events > max_events:
            raise DoubleTangency(f"more than {max_events} manifold contacts; chattering near {ev_p}")

        graze_field = None
        if grazing and mode != "sliding":
            graze_field = mode
        mode = _mode_at(ev_p, params, direction, tol, graze_field)
        if mode == "sliding":
            # project onto the sphere so the sliding field starts tangent
            ev_p = ev_p / np.linalg.norm(ev_p)
        p, t, restart = ev_p, ev_t, True

    return Trajectory(np.array(times), np.array(states), events,
                      modes=np.array(tags), dense=dense)


def _scan_step(step, gfun, mode, params, direction, cfg, restart):
    """Return ``(t, p, grazing, segment)`` for the first contact in ``step``, else None."""
    ts = np.linspace(step.t_old, step.t, N_SCAN + 1)
    ys = step.dense(ts).T
    g = np.array([gfun(q) for q in ys])
    # sample 0 is the restart point (or the end of an accepted step)
    first = 1
    neg = np.nonzero(g[first:] < -cfg.event_tol)[0]
    if len(neg):
        i = int(neg[0]) + first
        lo = ts[i - 1]
        if restart and i == 1 and g[0] <= cfg.event_tol:
            # leaving the manifold: start the bracket at the excursion peak
            res = minimize_scalar(lambda s: -gfun(step.dense(s)),
                                  bounds=tuple(sorted((ts[0], ts[1]))), method="bounded",
                                  options={"xatol": 1e-14 * max(1.0, abs(ts[1]))})
            if -res.fun > cfg.event_tol:
                lo = float(res.x)
            else:
                return step.t_old, ys[0], False, Segment.of(step.dense, ts[0], ts[0])
        seg = Segment.of(step.dense, lo, ts[i])
        loc = locate_event(seg, gfun, cfg)
        return loc.t, loc.p, False, Segment.of(step.dense, step.t_old, loc.t)

    if mode == "sliding":
        return None
    # grazing: an interior minimum of g that comes near zero
    lo_idx = 1 if restart else 0
    for i in range(max(lo_idx, 1), N_SCAN):
        if g[i] <= g[i - 1] and g[i] <= g[i + 1] and g[i] < 1e-3:
            seg = Segment.of(step.dense, ts[i - 1], ts[i + 1])
            try:
                loc = locate_event(seg, gfun, cfg)
            except NoSignChange:
                continue
            return loc.t, loc.p, loc.grazing, Segment.of(step.dense, step.t_old, loc.t)
    return None
