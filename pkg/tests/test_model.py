import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from closedtraj.errors import DivisionDegenerate
from closedtraj.model import (
    TAU_TANG,
    Params,
    RegionLabel,
    classify_point,
    field_minus,
    field_perturbed,
    field_plus,
    grad_h,
    lie_derivative,
    lie_derivative_k,
    linear_part,
    sliding_field,
    switching_h,
    tangency_kind,
)

P = np.array([-0.6, 0.8, 0.0])
Q = np.array([0.6, 0.8, 0.0])
coord = st.floats(-3, 3, allow_nan=False)
param = st.floats(0.2, 10, allow_nan=False)


def test_field_minus_examples(fig1):
    assert np.array_equal(field_minus([0, 0, 0], fig1), [0, 4, 0])
    assert np.allclose(field_minus([0, 0, -0.8], fig1), 0, atol=1e-15)
    assert np.array_equal(field_minus([1, 1, 1], fig1), [1, 5, 1])


def test_field_plus_examples(fig1):
    assert np.array_equal(field_plus([0, 0, 0], fig1), [0, 4, 0])
    assert np.allclose(field_plus([0, 0, 0.8], fig1), 0, atol=1e-15)
    assert np.array_equal(field_plus([1, 0, 0], fig1), [0, 3, 1])


def test_field_perturbed_examples():
    F = lambda x, y, z: 1.0
    assert np.array_equal(field_perturbed([0, 0, 0], Params(3.0, 0.0, 2.0), F), [0, 0, 0])
    assert np.array_equal(field_perturbed([1, 0, 0], Params(1.0, 0.0, 1.0), F), [0, -1, 1])
    # on the plane y + bz = 0 the second component is -ay - abz = 0, so the
    # plane is invariant: d/dt (y + bz) = 0
    v = field_perturbed([0, -4, 1], Params(1.0, 0.0, 4.0), F)
    assert np.array_equal(v, [-4, 0, 0])
    assert v[1] + 4.0 * v[2] == 0


def test_switching_h_examples():
    assert switching_h([1, 0, 0]) == 0
    assert switching_h([0, 0, 0]) == -1
    assert switching_h([1, 1, 1]) == 2


def test_lie_derivative_examples(fig1):
    assert abs(lie_derivative("plus", P, fig1)) < 1e-15
    assert lie_derivative("minus", P, fig1) == pytest.approx(-48 / 25, abs=1e-14)
    assert lie_derivative("minus", Q, fig1) == pytest.approx(48 / 25, abs=1e-14)


def test_classify_examples(fig1):
    assert classify_point(P, fig1, TAU_TANG) is RegionLabel.TANGENCY_PLUS
    assert lie_derivative("plus", [0, 1, 0], fig1) == pytest.approx(-2)
    assert lie_derivative("minus", [0, 1, 0], fig1) == pytest.approx(-2)
    assert classify_point([0, 1, 0], fig1) is RegionLabel.CROSSING
    assert classify_point([0, 0, 0], fig1) is RegionLabel.MINUS_SIDE
    assert classify_point([2, 0, 0], fig1) is RegionLabel.PLUS_SIDE


def test_classify_sliding_and_escape(fig1):
    # random points of the sphere; each label must follow the sign rule
    pts = np.random.default_rng(1).normal(size=(400, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    seen = set()
    for p in pts:
        xp, xm = lie_derivative("plus", p, fig1), lie_derivative("minus", p, fig1)
        lab = classify_point(p, fig1)
        if xp < 0 < xm:
            assert lab is RegionLabel.SLIDING
        elif xm < 0 < xp:
            assert lab is RegionLabel.ESCAPE
        else:
            assert lab is RegionLabel.CROSSING
        seen.add(lab)
    assert {RegionLabel.SLIDING, RegionLabel.ESCAPE, RegionLabel.CROSSING} <= seen


def test_sliding_field_collapses_to_x_plus_at_tangency(fig1):
    assert np.allclose(sliding_field(P, fig1), field_plus(P, fig1), atol=1e-15)


def test_sliding_field_listed_example_is_double_degenerate(fig1):
    # at (0, -1, 0) both Lie derivatives equal -18: a crossing point whose
    # convex-combination denominator vanishes
    p = [0.0, -1.0, 0.0]
    assert lie_derivative("plus", p, fig1) == pytest.approx(-18)
    assert lie_derivative("minus", p, fig1) == pytest.approx(-18)
    with pytest.raises(DivisionDegenerate):
        sliding_field(p, fig1)


def _expanded(p, a, eps):
    x, y, z = p
    xm = 4 * x * y - 2 * a * y * y + 2 * a * y * z + 2 * eps * y + 2 * x * z
    xp = -2 * a * y * y - 2 * a * y * z + 2 * eps * y + 2 * x * z
    return xm, xp


def test_expanded_lie_formulas_on_random_points(rng):
    pts = rng.uniform(-2, 2, size=(10_000, 3))
    a_s = rng.uniform(-10, 10, size=10_000)
    e_s = rng.uniform(-10, 10, size=10_000)
    worst = 0.0
    for p, a, e in zip(pts, a_s, e_s):
        prm = Params(a, e)
        xm, xp = _expanded(p, a, e)
        worst = max(worst, abs(lie_derivative("minus", p, prm) - xm), abs(lie_derivative("plus", p, prm) - xp))
    assert worst < 1e-12 * 100  # values reach ~1e2; absolute 1e-12 per unit magnitude


@given(st.tuples(coord, coord, coord), param, st.floats(-10, 10))
def test_perturbed_with_sign_b_matches_piecewise_fields(p, a, eps):
    prm_h = switching_h(p)
    if prm_h == 0:
        return
    b = 1.0 if prm_h > 0 else -1.0
    got = field_perturbed(p, Params(a, eps, b), lambda x, y, z: 1.0)
    ref = field_plus(p, Params(a, eps)) if prm_h > 0 else field_minus(p, Params(a, eps))
    assert np.array_equal(got, ref)


@given(st.floats(-math.pi, math.pi), st.floats(0, math.pi), param, st.floats(-10, 10))
def test_sliding_field_is_tangent(lon, lat, a, eps):
    p = np.array([math.sin(lat) * math.cos(lon), math.sin(lat) * math.sin(lon), math.cos(lat)])
    prm = Params(a, eps)
    try:
        zs = sliding_field(p, prm)
    except DivisionDegenerate:
        return
    scale = max(1.0, np.linalg.norm(field_plus(p, prm)), np.linalg.norm(field_minus(p, prm)))
    assert abs(zs @ grad_h(p)) <= 1e-10 * scale


@given(st.tuples(coord, coord, coord), param, st.floats(-10, 10), st.floats(1, 10))
def test_classify_invariant_under_tol_scaling(p, a, eps, k):
    prm = Params(a, eps)
    p = np.asarray(p)
    n = np.linalg.norm(p)
    if n < 0.1:
        return
    p = p / n
    if min(abs(lie_derivative("plus", p, prm)), abs(lie_derivative("minus", p, prm))) <= 10 * TAU_TANG:
        return
    assert classify_point(p, prm, TAU_TANG) is classify_point(p, prm, k * TAU_TANG)


def test_higher_lie_derivatives_match_flow_derivatives(fig1, rng):
    # oracle: d^k/dt^k h(x(t)) by finite differences of the exact linear flow
    from scipy.linalg import expm

    for which in ("minus", "plus"):
        A, c = linear_part(which, fig1)
        M = np.zeros((4, 4))
        M[:3, :3], M[:3, 3] = A, c
        for _ in range(5):
            p = rng.uniform(-1, 1, 3)

            def h_at(t):
                return switching_h((expm(M * t) @ np.append(p, 1.0))[:3])

            d = 1e-4
            d1 = (h_at(d) - h_at(-d)) / (2 * d)
            d = 1e-3
            hs = [h_at(k * d) for k in (-2, -1, 0, 1, 2)]
            d2 = (hs[3] - 2 * hs[2] + hs[1]) / d ** 2
            d3 = (hs[4] - 2 * hs[3] + 2 * hs[1] - hs[0]) / (2 * d ** 3)
            assert lie_derivative_k(which, p, fig1, 1) == pytest.approx(d1, rel=1e-5, abs=1e-6)
            assert lie_derivative_k(which, p, fig1, 2) == pytest.approx(d2, rel=1e-3, abs=1e-3)
            assert lie_derivative_k(which, p, fig1, 3) == pytest.approx(d3, rel=1e-2, abs=1e-2)


def test_tangency_kind(fig1):
    assert tangency_kind("minus", P, fig1) is None
    # X+h(P) = 0 and X+^2 h(P) != 0: P is a fold of X+
    assert tangency_kind("plus", P, fig1) == "fold"
    # by hand: <X+(P), grad X+h(P)> = <(0.8, 0.6, -0.6), (0, -8, -9.2)> = 18/25
    assert lie_derivative_k("plus", P, fig1, 2) == pytest.approx(18 / 25, abs=1e-14)
    assert lie_derivative_k("plus", P, fig1, 0) == pytest.approx(0, abs=1e-15)


def test_params_validation():
    with pytest.raises(ValueError):
        Params(float("nan"), 1.0)
    assert Params(5, 4).in_part1_domain
    assert not Params(5, 5).in_part1_domain
    assert Params(1, 0, 2).in_part2_domain
    assert not Params(0, 0, 2).in_part2_domain
    with pytest.raises(ValueError):
        field_plus([1, 2], Params(1, 1))
