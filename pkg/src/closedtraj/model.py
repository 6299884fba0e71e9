"""Vector fields, switching function and Filippov bookkeeping.

Phase coordinates are ``(x, y, z) = (z', z'', z)`` of the third-order
equation ``z''' + a z'' + b z' + abz = eps F``.  Two regimes are covered:

* the perturbed smooth system (``field_perturbed``), and
* the piecewise system obtained with ``F = 1`` and ``b = sign(h)``, where
  ``h = x^2 + y^2 + z^2 - 1`` switches between ``field_minus`` (inside the
  unit sphere) and ``field_plus`` (outside).

States are plain ``numpy`` arrays of shape ``(3,)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import DivisionDegenerate

#: absolute band for deciding that a Lie derivative vanishes
TAU_TANG = 1e-9
#: smallest admissible |X-h - X+h| in the sliding-field denominator
TAU_DIV = 1e-12

Which = Literal["minus", "plus"]


@dataclass(frozen=True)
class Params:
    """System scalars.

    ``b`` only matters for the smooth perturbed system; in the piecewise
    regime it is replaced by ``sign(h)``.
    """

    a: float
    eps: float
    b: float = 1.0

    def __post_init__(self):
        for name in ("a", "eps", "b"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def in_part1_domain(self) -> bool:
        return self.a != 0 and 0 < abs(self.eps) < abs(self.a)

    @property
    def in_part2_domain(self) -> bool:
        return self.a != 0 and self.b > 0


class RegionLabel(enum.Enum):
    PLUS_SIDE = "PlusSide"
    MINUS_SIDE = "MinusSide"
    CROSSING = "Crossing"
    SLIDING = "Sliding"
    ESCAPE = "Escape"
    TANGENCY_PLUS = "TangencyPlus"
    TANGENCY_MINUS = "TangencyMinus"
    TANGENCY_BOTH = "TangencyBoth"

    @property
    def on_manifold(self) -> bool:
        return self not in (RegionLabel.PLUS_SIDE, RegionLabel.MINUS_SIDE)


def as_state(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {p.shape}")
    return p


def field_minus(p, params: Params) -> np.ndarray:
    x, y, z = as_state(p)
    a, eps = params.a, params.eps
    return np.array([y, -a * y + x + a * z + eps, x])


def field_plus(p, params: Params) -> np.ndarray:
    x, y, z = as_state(p)
    a, eps = params.a, params.eps
    return np.array([y, -a * y - x - a * z + eps, x])


def field_perturbed(p, params: Params, F: Callable[[float, float, float], float]) -> np.ndarray:
    """Smooth system ``(y, -ay - bx - abz + eps F(x, y, z), x)``."""
    x, y, z = as_state(p)
    a, b, eps = params.a, params.b, params.eps
    forcing = eps * F(x, y, z) if eps != 0 else 0.0
    return np.array([y, -a * y - b * x - a * b * z + forcing, x])


def switching_h(p) -> float:
    x, y, z = as_state(p)
    return x * x + y * y + z * z - 1.0


def grad_h(p) -> np.ndarray:
    return 2.0 * as_state(p)


def _field(which: Which) -> Callable:
    if which == "minus":
        return field_minus
    if which == "plus":
        return field_plus
    raise ValueError(f"which must be 'minus' or 'plus', got {which!r}")


def lie_derivative(which: Which, p, params: Params) -> float:
    """``X h(p) = <X(p), grad h(p)>`` for ``X`` = X- or X+."""
    p = as_state(p)
    return float(np.dot(_field(which)(p, params), grad_h(p)))


def linear_part(which: str, params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Affine decomposition ``X(p) = A p + c``.

    ``which`` is ``"minus"``, ``"plus"`` or ``"unperturbed"`` (the smooth
    system with ``eps = 0``).
    """
    a, b, eps = params.a, params.b, params.eps
    if which == "minus":
        A = np.array([[0.0, 1.0, 0.0], [1.0, -a, a], [1.0, 0.0, 0.0]])
        c = np.array([0.0, eps, 0.0])
    elif which == "plus":
        A = np.array([[0.0, 1.0, 0.0], [-1.0, -a, -a], [1.0, 0.0, 0.0]])
        c = np.array([0.0, eps, 0.0])
    elif which == "unperturbed":
        A = np.array([[0.0, 1.0, 0.0], [-b, -a, -a * b], [1.0, 0.0, 0.0]])
        c = np.zeros(3)
    else:
        raise ValueError(f"unknown field {which!r}")
    return A, c


def _lie_quadratic(which: Which, params: Params, order: int):
    # g(p) = p.M.p + v.p + s with M symmetric; X affine keeps g quadratic,
    # so X^k h is exact for every k.
    A, c = linear_part(which, params)
    M, v, s = np.eye(3), np.zeros(3), -1.0
    for _ in range(order):
        M, v, s = A.T @ M + M @ A, A.T @ v + 2.0 * M @ c, float(c @ v)
    return M, v, s


def lie_derivative_k(which: Which, p, params: Params, order: int = 1) -> float:
    """Higher Lie derivative ``X^k h(p) = <X(p), grad X^{k-1} h(p)>``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    p = as_state(p)
    M, v, s = _lie_quadratic(which, params, order)
    return float(p @ M @ p + v @ p + s)


def tangency_kind(which: Which, p, params: Params, tol: float = TAU_TANG) -> str | None:
    """``None`` if X h(p) is nonzero, else ``"fold"``, ``"cusp"`` or ``"degenerate"``."""
    if abs(lie_derivative_k(which, p, params, 1)) > tol:
        return None
    if abs(lie_derivative_k(which, p, params, 2)) > tol:
        return "fold"
    if abs(lie_derivative_k(which, p, params, 3)) > tol:
        return "cusp"
    return "degenerate"


def classify_point(p, params: Params, tol: float = TAU_TANG) -> RegionLabel:
    p = as_state(p)
    hval = switching_h(p)
    if abs(hval) > tol:
        return RegionLabel.PLUS_SIDE if hval > 0 else RegionLabel.MINUS_SIDE
    xp = lie_derivative("plus", p, params)
    xm = lie_derivative("minus", p, params)
    tan_p, tan_m = abs(xp) <= tol, abs(xm) <= tol
    if tan_p and tan_m:
        return RegionLabel.TANGENCY_BOTH
    if tan_p:
        return RegionLabel.TANGENCY_PLUS
    if tan_m:
        return RegionLabel.TANGENCY_MINUS
    if xp * xm > 0:
        return RegionLabel.CROSSING
    if xp < 0 < xm:
        return RegionLabel.SLIDING
    return RegionLabel.ESCAPE


def sliding_field(p, params: Params) -> np.ndarray:
    """Filippov convex combination of X- and X+ tangent to the sphere."""
    p = as_state(p)
    xp = lie_derivative("plus", p, params)
    xm = lie_derivative("minus", p, params)
    denom = xm - xp
    if abs(denom) < TAU_DIV:
        raise DivisionDegenerate(f"X-h - X+h = {denom:.3e} at {p}")
    zs = (xm * field_plus(p, params) - xp * field_minus(p, params)) / denom
    # the normal component vanishes identically; remove the rounding residue,
    # which a small denominator amplifies
    g = grad_h(p)
    gg = g @ g
    if gg > 0:
        zs = zs - (zs @ g) / gg * g
    return zs
