"""Exact real-root isolation with Sturm sequences.

Polynomials are lists of :class:`fractions.Fraction` coefficients, lowest
degree first.  Floats convert to fractions exactly, so counts are exact for
the polynomial the floats represent.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Poly = list


def as_poly(coeffs: Sequence) -> Poly:
    return trim([c if isinstance(c, Fraction) else Fraction(c) for c in coeffs])


def trim(p: Poly) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p: Poly) -> int:
    return len(trim(p)) - 1


def evaluate(p: Poly, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p: Poly) -> Poly:
    return trim([k * c for k, c in enumerate(p)][1:])


def divmod_poly(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    num, den = trim(num), trim(den)
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    rem = list(num)
    lead = den[-1]
    while len(rem) >= len(den) and rem:
        shift = len(rem) - len(den)
        f = rem[-1] / lead
        quot[shift] = f
        for i, c in enumerate(den):
            rem[i + shift] -= f * c
        rem = trim(rem[:-1] if rem[-1] == 0 else rem)
    return trim(quot), rem


def gcd(p: Poly, q: Poly) -> Poly:
    p, q = trim(p), trim(q)
    while q:
        p, q = q, divmod_poly(p, q)[1]
    if not p:
        return p
    return [c / p[-1] for c in p]


def square_free(p: Poly) -> Poly:
    """``p / gcd(p, p')``: same distinct roots, all simple."""
    p = trim(p)
    dp = derivative(p)
    if not dp:
        return p
    g = gcd(p, dp)
    return divmod_poly(p, g)[0] if len(g) > 1 else p


def sturm_chain(p: Poly) -> list[Poly]:
    chain = [trim(p), derivative(p)]
    while chain[-1]:
        rem = divmod_poly(chain[-2], chain[-1])[1]
        if not rem:
            break
        chain.append([-c for c in rem])
    return [q for q in chain if q]


def sign_changes(chain: list[Poly], x) -> int:
    signs = [s for s in ((evaluate(q, x) > 0) - (evaluate(q, x) < 0) for q in chain) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def count_roots(p: Poly, lo, hi, chain: list[Poly] | None = None) -> int:
    """Distinct real roots of ``p`` in the half-open interval ``(lo, hi]``."""
    chain = chain or sturm_chain(p)
    return sign_changes(chain, Fraction(lo)) - sign_changes(chain, Fraction(hi))


def isolate(p: Poly, lo, hi) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals ``(l, h]`` each holding exactly one root of ``p`` in ``(lo, hi]``."""
    p = square_free(p)
    if degree(p) < 1:
        return []
    chain = sturm_chain(p)
    out, stack = [], [(Fraction(lo), Fraction(hi))]
    while stack:
        l, h = stack.pop()
        n = count_roots(p, l, h, chain)
        if n == 0:
            continue
        if n == 1:
            out.append((l, h))
            continue
        m = (l + h) / 2
        stack.extend([(m, h), (l, m)])
    return sorted(out)


def refine(p: Poly, l: Fraction, h: Fraction, rtol: float = 1e-15) -> float:
    """Bisect an isolating interval ``(l, h]`` of a square-free ``p`` down to ``rtol``."""
    fl, fh = evaluate(p, l), evaluate(p, h)
    if fh == 0:
        return float(h)
    if fl == 0:
        # a neighbouring root sits on l; p takes the sign of p' just right of it
        fl = evaluate(derivative(p), l)
    while h - l > rtol * max(1.0, abs(float(h))):
        m = (l + h) / 2
        # keep denominators small: snap the midpoint to a nearby dyadic float
        m = Fraction(float(m))
        if not l < m < h:
            break
        fm = evaluate(p, m)
        if fm == 0:
            return float(m)
        if (fm > 0) == (fl > 0):
            l, fl = m, fm
        else:
            h = m
    return float((l + h) / 2)


def real_roots(p: Sequence, lo, hi, rtol: float = 1e-15) -> list[float]:
    """Distinct real roots of ``p`` in ``(lo, hi]`` in increasing order."""
    p = square_free(as_poly(p))
    return [refine(p, l, h, rtol) for l, h in isolate(p, lo, hi)]
