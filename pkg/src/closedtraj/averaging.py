"""First-order averaging for ``z''' + a z'' + b z' + abz = eps F(z', z'', z)``.

With ``eps = 0`` and ``b > 0`` the plane ``y + bz = 0`` is filled with
periodic orbits of period ``2 pi / sqrt(b)``.  In Jordan coordinates
``(X, Y, Z) = B^-1 (x, y, z)``, writing ``X = r cos(sqrt(b) theta)`` and
``Y = r sin(sqrt(b) theta)``, the averaged function is::

    Fbar(r) = 1/(2 pi (a^2+b)) * int_0^{2 pi/sqrt(b)}
              F(sqrt(b) r s, -b r c, r c) (sqrt(b) c - a s) dtheta

with ``s, c`` the sine and cosine of ``sqrt(b) theta``.  Simple positive
roots of ``Fbar`` give limit cycles for small ``eps``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

import numpy as np
from scipy import integrate as spi

from . import sturm
from .errors import IdenticallyZero, QuadratureNoConvergence
from .model import Params

#: smallest |Fbar'(r0)| accepted as a simple root
TAU_SIMPLE = 1e-8
#: default upper end of the reported root range
R_MAX = 10.0


@dataclass(frozen=True)
class MultiPoly:
    """Sparse polynomial ``sum a_ijk x^i y^j z^k`` with no zero terms."""

    terms: Mapping[tuple[int, int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, c in dict(self.terms).items():
            if len(key) != 3 or any(int(e) != e or e < 0 for e in key):
                raise ValueError(f"exponents must be nonnegative integers, got {key}")
            if not math.isfinite(c):
                raise ValueError(f"coefficient of {key} is not finite")
            if c != 0:
                clean[tuple(int(e) for e in key)] = float(c)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def from_list(cls, rows: Iterable) -> "MultiPoly":
        """Build from ``(i, j, k, coeff)`` rows; repeated exponents add up."""
        acc: dict[tuple[int, int, int], float] = {}
        for i, j, k, c in rows:
            key = (int(i), int(j), int(k))
            acc[key] = acc.get(key, 0.0) + float(c)
        return cls(acc)

    def to_list(self) -> list[tuple[int, int, int, float]]:
        return [(i, j, k, c) for (i, j, k), c in self.terms.items()]

    @property
    def degree(self) -> int:
        return max((sum(key) for key in self.terms), default=0)

    def exponents(self) -> np.ndarray:
        return np.array(list(self.terms) or np.zeros((0, 3)), dtype=np.int64).reshape(-1, 3)

    def coefficients(self) -> np.ndarray:
        return np.array(list(self.terms.values()), dtype=float)

    def __call__(self, x, y, z):
        x, y, z = np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(z, dtype=float)
        out = np.zeros(np.broadcast(x, y, z).shape)
        for (i, j, k), c in self.terms.items():
            out = out + c * x ** i * y ** j * z ** k
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class AveragedPoly:
    """Odd polynomial ``sum c_d r^d``; ``exact`` keeps the rational values."""

    exact: Mapping[int, Fraction]

    def __post_init__(self):
        for d, c in self.exact.items():
            if d % 2 == 0 and c != 0:
                raise ValueError(f"even degree {d} in an averaged function")
        object.__setattr__(self, "exact", {d: c for d, c in sorted(self.exact.items()) if c != 0})

    @property
    def coeffs(self) -> dict[int, float]:
        return {d: float(c) for d, c in self.exact.items()}

    @property
    def degree(self) -> int:
        return max(self.exact, default=-1)

    def is_zero(self) -> bool:
        return not self.exact

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = sum((c * r ** d for d, c in self.coeffs.items()), np.zeros_like(r))
        return out if out.ndim else float(out)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        out = sum((d * c * r ** (d - 1) for d, c in self.coeffs.items()), np.zeros_like(r))
        return out if out.ndim else float(out)

    def reduced(self) -> list[Fraction]:
        """Coefficients of ``P`` with ``Fbar(r) = r P(r^2)``, lowest first."""
        if self.is_zero():
            return []
        p = [Fraction(0)] * ((self.degree - 1) // 2 + 1)
        for d, c in self.exact.items():
            p[(d - 1) // 2] = c
        return p


class CyclePrediction(NamedTuple):
    roots: list[tuple[float, float]]
    count: int
    bound: int
    attained: bool
    degree: int
    sharp_bound: int
    fbar: AveragedPoly


def _check_part2(params: Params) -> None:
    if not params.b > 0:
        raise ValueError(f"b must be positive, got {params.b}")


def jordan_transform(params: Params) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(B, B^-1, J)`` with ``B J B^-1`` the linear part of the unperturbed field."""
    _check_part2(params)
    a, b = params.a, params.b
    sb = math.sqrt(b)
    d = a * a + b
    B = np.array([[0.0, sb, -a], [-b, 0.0, a * a], [1.0, 0.0, 1.0]])
    B_inv = np.array([
        [0.0, -1.0 / d, a * a / d],
        [1.0 / sb, a / (sb * d), a * sb / d],
        [0.0, 1.0 / d, b / d],
    ])
    J = np.array([[0.0, sb, 0.0], [-sb, 0.0, 0.0], [0.0, 0.0, -a]])
    return B, B_inv, J


def double_factorial(n: int) -> int:
    if n < -1:
        raise ValueError("double factorial needs n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def trig_moment(p: int, q: int, b: float) -> float:
    """``int_0^{2 pi/sqrt(b)} sin^p(sqrt(b) t) cos^q(sqrt(b) t) dt``."""
    if p < 0 or q < 0:
        raise ValueError("exponents must be nonnegative")
    if not b > 0:
        raise ValueError("b must be positive")
    if p % 2 or q % 2:
        return 0.0
    num = double_factorial(p - 1) * double_factorial(q - 1)
    return 2.0 * math.pi * num / (math.sqrt(b) * double_factorial(p + q))


def _term_coefficient(i: int, j: int, k: int, a: Fraction, b: Fraction) -> Fraction:
    # contribution of x^i y^j z^k to the coefficient of r^(i+j+k); the
    # moments' 2 pi and sqrt(b) cancel against the prefactor exactly
    m = j + k
    n = i + m
    if n % 2 == 0:
        return Fraction(0)
    sign = -1 if j % 2 else 1
    if i % 2 == 0:
        num = double_factorial(i - 1) * double_factorial(m)
        return sign * b ** (i // 2 + j) * Fraction(num, double_factorial(n + 1)) / (a * a + b)
    num = double_factorial(i) * double_factorial(m - 1)
    return -a * sign * b ** ((i - 1) // 2 + j) * Fraction(num, double_factorial(n + 1)) / (a * a + b)


def averaged_function(params: Params, F: MultiPoly) -> AveragedPoly:
    """Closed-form ``Fbar`` from the trigonometric moments, in exact arithmetic."""
    _check_part2(params)
    a, b = Fraction(params.a), Fraction(params.b)
    acc: dict[int, Fraction] = {}
    for (i, j, k), c in F.terms.items():
        w = _term_coefficient(i, j, k, a, b)
        if w:
            d = i + j + k
            acc[d] = acc.get(d, Fraction(0)) + Fraction(c) * w
    return AveragedPoly(acc)


def averaged_quadrature(params: Params, F: MultiPoly, r: float) -> float:
    """``Fbar(r)`` by adaptive quadrature of the defining integral."""
    _check_part2(params)
    if r < 0:
        raise ValueError("r must be nonnegative")
    a, b = params.a, params.b
    sb = math.sqrt(b)
    if r == 0 or not F.terms:
        return 0.0
    # absolute tolerance relative to the integrand's size, so cancelling
    # integrals do not trip the roundoff detector
    reach = max(sb, b, 1.0) * r
    scale = (sb + abs(a)) * sum(abs(c) * reach ** sum(e) for e, c in F.terms.items())
    epsabs = 1e-14 * scale

    def integrand(theta):
        s, c = math.sin(sb * theta), math.cos(sb * theta)
        return F(sb * r * s, -b * r * c, r * c) * (sb * c - a * s)

    quarter = 0.5 * math.pi / sb
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", spi.IntegrationWarning)
        for n in range(4):
            try:
                val, _ = spi.quad(integrand, n * quarter, (n + 1) * quarter,
                                  epsabs=epsabs, epsrel=1e-13, limit=200)
            except spi.IntegrationWarning as exc:
                raise QuadratureNoConvergence(str(exc)) from exc
            total += val
    return total / (2.0 * math.pi * (a * a + b))


def simple_positive_roots(fbar: AveragedPoly, r_max: float = R_MAX,
                          tau_simple: float = TAU_SIMPLE) -> list[tuple[float, float]]:
    """``(r0, Fbar'(r0))`` for each simple root in ``(0, r_max]``.

    Roots of ``P(s)``, ``s = r^2``, are isolated by a Sturm sequence on the
    square-free part and bisected in exact arithmetic.
    """
    if fbar.is_zero():
        raise IdenticallyZero("averaged function vanishes identically")
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    s_max = Fraction(r_max) ** 2
    out = []
    for s in sturm.real_roots(fbar.reduced(), Fraction(0), s_max):
        r0 = math.sqrt(s)
        if not 0 < r0 <= r_max:
            continue
        d = fbar.derivative(r0)
        if abs(d) > tau_simple:
            out.append((r0, float(d)))
    return out


def cycle_bound(n: int) -> int:
    """Upper bound on limit cycles for a degree-``n`` perturbation."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    return (n + 1) // 2 if n % 2 else n // 2


def sharp_bound(n: int) -> int:
    """Most positive roots an odd polynomial of degree at most ``n`` can have."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    return max((n - 1) // 2, 0)


def wronskian(k: int, r) -> Fraction:
    """Exact Wronskian of ``r, r^3, ..., r^(2k+1)`` at rational ``r``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    r = Fraction(r)
    powers = [2 * i + 1 for i in range(k + 1)]
    rows = []
    for d in range(k + 1):
        row = []
        for p in powers:
            ff = math.prod(range(p - d + 1, p + 1))  # falling factorial p(p-1)...(p-d+1)
            row.append(Fraction(ff) * r ** (p - d) if ff else Fraction(0))
        rows.append(row)
    return _det(rows)


def _det(m: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in m]
    n, det = len(m), Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            for j in range(c, n):
                m[i][j] -= f * m[c][j]
    return det


def ect_check(k: int, sample_points: Iterable[float]) -> bool:
    """True iff every Wronskian of ``r, r^3, ..., r^(2i+1)``, ``i <= k``, is nonzero at the samples."""
    pts = list(sample_points)
    if any(not r > 0 for r in pts):
        raise ValueError("sample points must be positive")
    return all(wronskian(i, r) != 0 for i in range(k + 1) for r in pts)


def predict_limit_cycles(params: Params, F: MultiPoly, r_max: float = R_MAX) -> CyclePrediction:
    if params.a == 0:
        raise ValueError("a must be nonzero")
    fbar = averaged_function(params, F)
    roots = simple_positive_roots(fbar, r_max)
    n = F.degree
    bound = cycle_bound(n)
    return CyclePrediction(roots, len(roots), bound, len(roots) == bound, n, sharp_bound(n), fbar)


def target_from_roots(roots: Iterable[float], scale: float = 1.0) -> dict[int, float]:
    """Coefficients of ``scale * r * prod(r^2 - rho^2)`` keyed by degree."""
    p = np.array([float(scale)])
    for rho in roots:
        p = np.convolve(p, [-float(rho) ** 2, 1.0])
    return {2 * i + 1: float(c) for i, c in enumerate(p) if c != 0}


def design_perturbation(params: Params, target: Mapping[int, float]) -> MultiPoly:
    """Pure ``x^d`` perturbation whose averaged function has the ``target`` coefficients."""
    _check_part2(params)
    if params.a == 0:
        raise ValueError("a must be nonzero")
    a, b = Fraction(params.a), Fraction(params.b)
    terms = {}
    for d, c in target.items():
        if d < 1 or d % 2 == 0:
            raise ValueError(f"target degrees must be odd and positive, got {d}")
        w = _term_coefficient(d, 0, 0, a, b)
        terms[(d, 0, 0)] = float(Fraction(c) / w)
    return MultiPoly(terms)
