"""End-to-end acceptance criteria, one test each, with a PASS/FAIL line per criterion."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from closedtraj import Params
from closedtraj import closed_form as cf
from closedtraj import verify as vf
from closedtraj.averaging import (
    AveragedPoly,
    MultiPoly,
    averaged_function,
    averaged_quadrature,
    cycle_bound,
    design_perturbation,
    ect_check,
    jordan_transform,
    predict_limit_cycles,
    simple_positive_roots,
    target_from_roots,
    trig_moment,
)
from closedtraj.cli import main
from closedtraj.errors import IdenticallyZero
from closedtraj.integrator.ode import integrate
from closedtraj.model import field_minus, field_plus, lie_derivative, linear_part

A_VALUES = (2.0, 5.0, 10.0)
INTERIOR = (0.1, 0.3, 0.5, 0.7, 0.9)


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def band_eps(a):
    lo, hi = a / math.sqrt(2), a
    pos = [lo + f * (hi - lo) for f in INTERIOR]
    return pos + [-e for e in pos]


def outside_eps(a):
    return [0.6 * a, 0.3 * a, -0.5 * a, 1.2 * a, -1.5 * a]


def random_poly(rng, max_degree):
    terms = {}
    for _ in range(rng.integers(1, 8)):
        d = int(rng.integers(0, max_degree + 1))
        i = int(rng.integers(0, d + 1))
        j = int(rng.integers(0, d - i + 1))
        terms[(i, j, d - i - j)] = float(rng.uniform(-1, 1))
    return MultiPoly(terms)


def test_criterion_1_pseudo_orbit_example(capsys):
    t0 = time.perf_counter()
    code = main(["check-pseudo", "--a", "5", "--eps", "4"])
    rep_json = capsys.readouterr().out
    prm = Params(5.0, 4.0)
    P, Q = cf.tangency_points(prm)
    t_minus, t_plus = cf.transit_times(prm)
    errs = [np.max(np.abs(P - [-0.6, 0.8, 0])), np.max(np.abs(Q - [0.6, 0.8, 0])),
            abs(t_minus - math.log(7)), abs(t_plus - 2 * math.atan(0.75))]
    # independent integration in the contracting direction of each arc
    inner = integrate(lambda t, p: field_minus(p, prm), P, (0, t_minus)).final
    outer = integrate(lambda t, p: field_plus(p, prm), Q, (0, -t_plus)).final
    d_in, d_out = np.max(np.abs(inner - Q)), np.max(np.abs(outer - P))
    elapsed = time.perf_counter() - t0
    ok = (code == 0 and '"exists": true' in rep_json and max(errs) < 1e-12
          and d_in <= 1e-7 and d_out <= 1e-7 and elapsed < 1.0)
    report(capsys, 1, ok, f"endpoint errors {d_in:.1e}/{d_out:.1e}, closed-form {max(errs):.1e}, {elapsed:.2f}s")


def test_criterion_2_band_sweep(capsys):
    t0 = time.perf_counter()
    failures = []
    for a in A_VALUES:
        for eps in band_eps(a):
            rep = vf.verify_pseudo_orbit(Params(a, eps))
            if not (rep.passed and len(rep.checks) == 5):
                failures.append((a, eps))
        for eps in outside_eps(a):
            if cf.pseudo_orbit_exists(Params(a, eps)):
                failures.append((a, eps))
    excluded = not cf.pseudo_orbit_exists(Params(5.0, 3.0))
    elapsed = time.perf_counter() - t0
    ok = not failures and excluded and elapsed < 30
    report(capsys, 2, ok, f"{len(A_VALUES) * 15} cases, failures {failures}, {elapsed:.2f}s")


def test_criterion_3_tangency(capsys):
    worst_plus = worst_minus = 0.0
    for a in A_VALUES:
        for eps in band_eps(a):
            prm = Params(a, eps)
            P, Q = cf.tangency_points(prm)
            worst_plus = max(worst_plus, abs(lie_derivative("plus", P, prm)), abs(lie_derivative("plus", Q, prm)))
            ref = -4 * eps * math.sqrt(a * a - eps * eps) / (a * a)
            worst_minus = max(worst_minus, abs(lie_derivative("minus", P, prm) - ref))
    ok = worst_plus <= 1e-12 and worst_minus <= 1e-12
    report(capsys, 3, ok, f"max |X+h| {worst_plus:.1e}, max X-h(P) deviation {worst_minus:.1e}")


def test_criterion_4_moments(capsys):
    t0 = time.perf_counter()
    worst, odd_nonzero = 0.0, 0
    for b in (1.0, 2.0, 4.0):
        for p in range(11):
            for q in range(11):
                m = trig_moment(p, q, b)
                worst = max(worst, abs(m - vf._moment_quadrature(p, q, b)))
                odd_nonzero += int(bool(p % 2 or q % 2) and m != 0.0)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-11 and odd_nonzero == 0 and elapsed < 10
    report(capsys, 4, ok, f"max deviation {worst:.1e}, odd nonzero {odd_nonzero}, {elapsed:.2f}s")


def test_criterion_5_oracle_equivalence(capsys):
    rng = np.random.default_rng(5)
    worst, even_terms = 0.0, 0
    for _ in range(50):
        F = random_poly(rng, 5)
        prm = Params(float(rng.uniform(0.3, 3)) * rng.choice([-1, 1]), 0.0, float(rng.uniform(0.3, 4)))
        fbar = averaged_function(prm, F)
        even_terms += sum(1 for d in fbar.exact if d % 2 == 0)
        for r in rng.uniform(0, 3, 20):
            worst = max(worst, abs(fbar(r) - averaged_quadrature(prm, F, r)))
    ok = worst <= 1e-9 and even_terms == 0
    report(capsys, 5, ok, f"max |closed form - quadrature| {worst:.1e}, even terms {even_terms}")


def test_criterion_6_bound(capsys):
    prm = Params(1.0, 0.0, 1.0)
    cub = predict_limit_cycles(prm, design_perturbation(prm, target_from_roots([1.0])))
    qui = predict_limit_cycles(prm, design_perturbation(prm, target_from_roots([1.0, 2.0])))
    rng = np.random.default_rng(6)
    exceeded = 0
    for k in range(200):
        F = random_poly(rng, 1 + k % 6)
        prm_k = Params(float(rng.uniform(0.3, 3)), 0.0, float(rng.uniform(0.3, 4)))
        try:
            pred = predict_limit_cycles(prm_k, F)
        except IdenticallyZero:
            continue
        exceeded += int(pred.count > cycle_bound(F.degree))
    ok = (cub.count, cub.bound, qui.count, qui.bound) == (1, 2, 2, 3) and exceeded == 0
    report(capsys, 6, ok, f"cubic {cub.count}<={cub.bound}, quintic {qui.count}<={qui.bound}, "
                          f"random exceedances {exceeded}/200")


def test_criterion_7_limit_cycle(capsys):
    t0 = time.perf_counter()
    prm = Params(1.0, 0.0, 1.0)
    F = design_perturbation(prm, target_from_roots([1.0]))
    rep = vf.verify_limit_cycle(prm, F, 1e-2, 1.0)
    table = vf.convergence_study(prm, F, 1.0, [10 ** -1.5, 1e-2, 10 ** -2.5, 1e-3])
    elapsed = time.perf_counter() - t0
    r_err = abs(rep.info.get("r_found", math.inf) - 1.0)
    p_err = abs(rep.info.get("period", math.inf) - 2 * math.pi) / (2 * math.pi)
    ok = rep.passed and r_err <= 0.05 and p_err <= 0.05 and 0.8 <= table.slope <= 1.2 and elapsed < 60
    report(capsys, 7, ok, f"|r*-1| {r_err:.2e}, period rel err {p_err:.1e}, slope {table.slope:.3f}, {elapsed:.2f}s")


def test_criterion_8_structure(capsys):
    worst_sim = 0.0
    for a in (-3.0, -1.0, 0.5, 1.0, 2.0, 7.0):
        for b in (0.25, 1.0, 2.0, 5.0, 10.0):
            prm = Params(a, 0.0, b)
            B, Bi, J = jordan_transform(prm)
            A, _ = linear_part("unperturbed", prm)
            worst_sim = max(worst_sim, np.max(np.abs(B @ J @ Bi - A)))
    worst_eig = 0.0
    key = lambda z: (round(z.imag, 9), z.real)
    for a in (-2.0, 0.5, 5.0):
        prm = Params(a, 0.0, 3.0)
        cases = [("minus", [-a, 1, -1]), ("plus", [-a, 1j, -1j]), ("unperturbed", [-a, 1j * math.sqrt(3), -1j * math.sqrt(3)])]
        for which, ref in cases:
            lam, _ = cf.eigen_data(which, prm)
            got = sorted(np.asarray(lam, dtype=complex), key=key)
            worst_eig = max(worst_eig, max(abs(g - r) for g, r in zip(got, sorted(np.asarray(ref, dtype=complex), key=key))))
    ok = worst_sim <= 1e-12 and worst_eig <= 1e-12
    report(capsys, 8, ok, f"similarity {worst_sim:.1e}, eigenvalues {worst_eig:.1e}")


def _grid_roots(fbar, r_max, n=400_001):
    r = np.linspace(0, r_max, n)[1:]
    v = np.zeros_like(r)
    for d, c in fbar.coeffs.items():
        v += c * r ** d
    idx = np.nonzero(np.sign(v[1:]) * np.sign(v[:-1]) < 0)[0]
    return r[idx], r[1] - r[0]


def test_criterion_9_ect_and_sturm(capsys):
    ect_ok = all(ect_check(k, [0.1, 1.0, 10.0]) for k in range(6))
    rng = np.random.default_rng(9)
    mismatches = 0
    for _ in range(100):
        # odd polynomial r * prod(r^2 - rho^2) * prod(r^2 + q) with separated roots
        n_real = int(rng.integers(0, 4))
        rho = []
        while len(rho) < n_real:
            x = float(rng.uniform(0.1, 4.5))
            if all(abs(x - y) > 0.05 for y in rho):
                rho.append(x)
        s_poly = np.polynomial.Polynomial([float(rng.uniform(0.2, 3)) * rng.choice([-1, 1])])
        for x in rho:
            s_poly *= np.polynomial.Polynomial([-x * x, 1])
        for _ in range(int(rng.integers(0, 2))):
            s_poly *= np.polynomial.Polynomial([float(rng.uniform(0.1, 2)), 0, 1])
        fbar = AveragedPoly({2 * i + 1: Fraction(c) for i, c in enumerate(s_poly.coef)})
        sturm_roots = [r for r, _ in simple_positive_roots(fbar, 5.0)]
        grid, h = _grid_roots(fbar, 5.0)
        if len(grid) != len(sturm_roots) or any(abs(g - s) > 2 * h for g, s in zip(grid, sturm_roots)):
            mismatches += 1
    ok = ect_ok and mismatches == 0
    report(capsys, 9, ok, f"ECT k<=5 {'ok' if ect_ok else 'failed'}, Sturm/grid mismatches {mismatches}/100")
