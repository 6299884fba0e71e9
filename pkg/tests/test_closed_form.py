import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from closedtraj import closed_form as cf
from closedtraj.errors import ArctanDegenerate, DegenerateA, ExistenceViolated, LogDomain, NoRealIntersection
from closedtraj.model import Params, RegionLabel, classify_point, field_minus, field_plus, lie_derivative, switching_h

LN7 = math.log(7.0)
T_PLUS_54 = 2.0 * math.atan(0.75)


def band_sweep():
    out = []
    for a in (2.0, 5.0, 10.0):
        lo = a / math.sqrt(2.0)
        for e in np.linspace(lo, a, 7)[1:-1]:
            out += [Params(a, float(e)), Params(a, -float(e))]
    return out


def test_invariant_planes(fig1):
    pl = cf.invariant_planes(fig1)
    assert np.array_equal(pl.alpha_minus.normal, [0, -1, 1]) and pl.alpha_minus.offset == pytest.approx(-0.8)
    assert np.array_equal(pl.alpha_plus.normal, [0, 1, 1]) and pl.alpha_plus.offset == pytest.approx(0.8)
    z = cf.invariant_planes(Params(1.0, 0.0))
    assert z.alpha_minus.offset == 0 and z.alpha_plus.offset == 0
    neg = cf.invariant_planes(Params(-5.0, 4.0))
    assert neg.alpha_minus.offset == pytest.approx(0.8) and neg.alpha_plus.offset == pytest.approx(-0.8)
    with pytest.raises(DegenerateA):
        cf.invariant_planes(Params(0.0, 1.0))


def test_eigen_data(fig1):
    lam, vec = cf.eigen_data("minus", fig1)
    assert np.allclose(lam, [-5, 1, -1], atol=1e-12)
    lam, vec = cf.eigen_data("plus", fig1)
    assert np.allclose(lam, [-5, 1j, -1j], atol=1e-12)
    lam, _ = cf.eigen_data("minus", Params(1.0, 0.0))
    assert sorted(lam.real) == [-1, -1, 1]
    # (-a, a^2, 1) and (1, 1, 1), (-1, 1, 1) up to scaling
    lam, vec = cf.eigen_data("minus", fig1)
    for col, ref in zip(vec.T, ([-5, 25, 1], [1, 1, 1], [-1, 1, 1])):
        assert np.allclose(col / col[2], ref)
    # plus pair: real and imaginary parts span (0, -1, 1) and (1, 0, 0)
    lam, vec = cf.eigen_data("plus", fig1)
    v = vec[:, 1]
    span = np.column_stack([v.real, v.imag])
    for ref in ([0, -1, 1], [1, 0, 0]):
        coef, res, *_ = np.linalg.lstsq(span, np.array(ref, float), rcond=None)
        assert np.allclose(span @ coef, ref, atol=1e-12)


@pytest.mark.parametrize("which", ["minus", "plus"])
def test_eigenpairs_satisfy_linear_part(which, fig1):
    from closedtraj.model import linear_part

    A, _ = linear_part(which, fig1)
    lam, vec = cf.eigen_data(which, fig1)
    for k in range(3):
        assert np.allclose(A @ vec[:, k], lam[k] * vec[:, k], atol=1e-12)


def test_flow_minus_examples(fig1):
    assert np.allclose(cf.flow_alpha_minus(0.0, 0.3, -0.2, fig1), [0.3, -0.2, -0.2 - 0.8])
    P, Q = cf.tangency_points(fig1)
    assert np.allclose(cf.flow_alpha_minus(LN7, P[0], P[1], fig1), Q, atol=1e-12)


def test_flow_plus_examples(fig1):
    assert np.allclose(cf.flow_alpha_plus(0.0, 0.3, -0.2, fig1), [0.3, -0.2, 0.8 + 0.2])
    a0 = cf.flow_alpha_plus(0.0, 0.3, -0.2, fig1)
    assert np.allclose(cf.flow_alpha_plus(2 * math.pi, 0.3, -0.2, fig1), a0, atol=1e-12)
    P, Q = cf.tangency_points(fig1)
    assert np.allclose(cf.flow_alpha_plus(T_PLUS_54, P[0], P[1], fig1), Q, atol=1e-12)


def test_plane_residuals_at_random_samples(fig1, rng):
    pl = cf.invariant_planes(fig1)
    for _ in range(100):
        t, x0, y0 = rng.uniform(-3, 3, 3)
        assert abs(pl.alpha_minus.residual(cf.flow_alpha_minus(t, x0, y0, fig1))) < 1e-12 * max(1, math.cosh(t) * 3)
        assert abs(pl.alpha_plus.residual(cf.flow_alpha_plus(t, x0, y0, fig1))) < 1e-12


@given(st.floats(-2, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_closed_forms_solve_the_fields(t, x0, y0):
    prm = Params(5.0, 4.0)
    d = 1e-6
    for flow, fld in ((cf.flow_alpha_minus, field_minus), (cf.flow_alpha_plus, field_plus)):
        deriv = (flow(t + d, x0, y0, prm) - flow(t - d, x0, y0, prm)) / (2 * d)
        scale = max(1.0, np.linalg.norm(deriv))
        assert np.allclose(deriv, fld(flow(t, x0, y0, prm), prm), atol=1e-8 * scale)


def test_tangency_points(fig1):
    P, Q = cf.tangency_points(fig1)
    assert np.allclose(P, [-0.6, 0.8, 0]) and np.allclose(Q, [0.6, 0.8, 0])
    P, Q = cf.tangency_points(Params(1.0, 1e-300))
    assert np.allclose(P, [-1, 0, 0]) and np.allclose(Q, [1, 0, 0])
    with pytest.raises(NoRealIntersection):
        cf.tangency_points(Params(5.0, 5.0))


@pytest.mark.parametrize("prm", band_sweep(), ids=lambda p: f"a{p.a:g}e{p.eps:.4g}")
def test_band_sweep_identities(prm):
    P, Q = cf.tangency_points(prm)
    pl = cf.invariant_planes(prm)
    for X in (P, Q):
        assert abs(switching_h(X)) < 1e-14
        assert abs(pl.alpha_minus.residual(X)) < 1e-14 and abs(pl.alpha_plus.residual(X)) < 1e-14
        assert abs(lie_derivative("plus", X, prm)) < 1e-12
    s = math.sqrt(prm.a ** 2 - prm.eps ** 2)
    assert lie_derivative("minus", P, prm) == pytest.approx(-4 * prm.eps * s / prm.a ** 2, abs=1e-12)
    tm, tp = cf.transit_times(prm)
    assert np.allclose(cf.flow_alpha_minus(tm, P[0], P[1], prm), Q, atol=1e-10)
    assert np.allclose(cf.flow_alpha_plus(tp, P[0], P[1], prm), Q, atol=1e-10)
    if prm.eps > 0:
        assert tp == pytest.approx(cf.t_plus_arccos(prm), abs=1e-12)
    assert cf.norm_conditions(prm, 1000) == (True, True)


def test_transit_times_examples(fig1):
    tm, tp = cf.transit_times(fig1)
    assert tm == pytest.approx(LN7, abs=1e-14) and tm == pytest.approx(1.945910, abs=1e-6)
    assert tp == pytest.approx(T_PLUS_54, abs=1e-14) and tp == pytest.approx(1.287002, abs=1e-6)
    tm, tp = cf.transit_times(Params(5.0, -4.0))
    assert tm == pytest.approx(-LN7, abs=1e-14) and tp < 0
    assert cf.t_plus_arccos(fig1) == pytest.approx(math.acos(7 / 25), abs=1e-15)
    assert cf.t_plus_arccos(fig1) == pytest.approx(1.287002, abs=1e-6)


def test_transit_time_root_finding_oracle(fig1):
    # independent check: the X- arc re-enters the sphere at t-, and the X+
    # arc (tangent to the sphere at Q, so h has no sign change) reaches x = 3/5
    from scipy.optimize import brentq

    P, _ = cf.tangency_points(fig1)
    tm = brentq(lambda t: switching_h(cf.flow_alpha_minus(t, P[0], P[1], fig1)), 0.5, 3.0, xtol=1e-14)
    tp = brentq(lambda t: cf.flow_alpha_plus(t, P[0], P[1], fig1)[0] - 0.6, 0.5, 2.0, xtol=1e-14)
    assert tm == pytest.approx(LN7, abs=1e-9)
    assert tp == pytest.approx(T_PLUS_54, abs=1e-9)


def test_transit_time_errors():
    with pytest.raises(LogDomain):
        cf.transit_times(Params(5.0, 3.0))
    with pytest.raises(ArctanDegenerate):
        cf.transit_times(Params(5.0, 0.0))
    with pytest.raises(NoRealIntersection):
        cf.transit_times(Params(5.0, 6.0))


def test_time_signs(fig1):
    assert cf.time_signs(fig1) == (1, 1, True)
    assert cf.time_signs(Params(5.0, -4.0)) == (-1, -1, True)
    ts = cf.time_signs(Params(5.0, 3.0))
    assert ts.t_plus == 1 and ts.t_minus == 0 and not ts.in_band


def test_norm_conditions(fig1):
    assert cf.norm_conditions(fig1, 1000) == (True, True)
    P, _ = cf.tangency_points(fig1)
    sm = 0.5 * math.acos(7 / 25)
    mid = cf.flow_alpha_plus(sm, P[0], P[1], fig1)
    assert mid @ mid == pytest.approx(26 / 25, abs=1e-14)
    tm, tp = cf.transit_times(fig1)
    for flow, t in ((cf.flow_alpha_minus, 0.0), (cf.flow_alpha_minus, tm), (cf.flow_alpha_plus, tp)):
        p = flow(t, P[0], P[1], fig1)
        assert p @ p == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        cf.norm_conditions(fig1, 5)


def test_outer_arc_norm_identity(fig1):
    # |x+(t)|^2 = 1 + (eps - u)^2 / a^2 with u = s sin t + eps cos t
    P, _ = cf.tangency_points(fig1)
    t = np.linspace(0, 2 * math.pi, 50)
    pts = cf.flow_alpha_plus(t, P[0], P[1], fig1)
    u = 3 * np.sin(t) + 4 * np.cos(t)
    assert np.allclose(np.einsum("ij,ij->i", pts, pts), 1 + (4 - u) ** 2 / 25, atol=1e-14)


@given(st.floats(0.1, 20), st.floats(-20, 20))
def test_existence_symmetries(a, eps):
    e = cf.pseudo_orbit_exists(Params(a, eps))
    assert e == cf.pseudo_orbit_exists(Params(a, -eps))
    assert e == cf.pseudo_orbit_exists(Params(-a, eps))


def test_existence_examples():
    assert cf.pseudo_orbit_exists(Params(5.0, 4.0))
    assert not cf.pseudo_orbit_exists(Params(5.0, 3.0))
    assert cf.pseudo_orbit_exists(Params(5.0, -4.0))
    assert not cf.pseudo_orbit_exists(Params(0.0, 0.0))


def test_build_pseudo_orbit(fig1):
    orb = cf.build_pseudo_orbit(fig1, 500)
    P, Q = orb.joints
    for arc in (orb.arc_inside, orb.arc_outside):
        assert len(arc) == 500
        assert np.allclose(arc.states[0], P, atol=1e-10) and np.allclose(arc.states[-1], Q, atol=1e-10)
        assert [ev.label for ev in arc.events] == [RegionLabel.TANGENCY_PLUS] * 2
    n_in = np.einsum("ij,ij->i", orb.arc_inside.states, orb.arc_inside.states)[1:-1]
    n_out = np.einsum("ij,ij->i", orb.arc_outside.states, orb.arc_outside.states)[1:-1]
    assert np.all(n_in < 1) and np.all(n_out > 1)
    assert orb.arc_inside.t_final == pytest.approx(LN7) and orb.arc_outside.t_final == pytest.approx(T_PLUS_54)
    assert set(orb.arc_inside.modes) == {"inner"} and set(orb.arc_outside.modes) == {"outer"}
    assert np.allclose(orb.arc_outside(orb.arc_outside.times[7]), orb.arc_outside.states[7])


def test_build_pseudo_orbit_negative_band():
    orb = cf.build_pseudo_orbit(Params(5.0, -4.0), 50)
    assert orb.arc_inside.t_final == pytest.approx(-LN7)
    assert np.all(np.diff(orb.arc_inside.times) < 0)
    assert np.allclose(orb.arc_inside.final, orb.joints[1], atol=1e-10)


def test_build_pseudo_orbit_outside_band():
    with pytest.raises(ExistenceViolated):
        cf.build_pseudo_orbit(Params(5.0, 3.0))
