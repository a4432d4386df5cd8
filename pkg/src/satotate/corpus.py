"""Small synthetic curve corpora for the elliptic CM experiment."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import sympy

from .curves import CM_J_INVARIANTS, EllipticCurveQ, is_cm, j_invariant


def _minimize_short(a4: int, a6: int) -> tuple[int, int]:
    """Strip u with u^4 | a4 and u^6 | a6 (short models only)."""
    g = math.gcd(a4, a6)
    if g == 0:
        g = abs(a4 or a6)
    for q, e in sympy.factorint(g).items():
        while a4 % q**4 == 0 and a6 % q**6 == 0:
            a4 //= q**4
            a6 //= q**6
    return a4, a6


def curve_with_j(j: int, twist: int = 1, label: str | None = None) -> EllipticCurveQ:
    """A short Weierstrass curve with the given j-invariant, quadratically twisted by ``twist``."""
    d = twist
    if j == 0:
        a4, a6 = 0, d
    elif j == 1728:
        a4, a6 = d, 0
    else:
        k = j - 1728
        a4, a6 = -3 * j * k * d * d, 2 * j * k * k * d**3
    a4, a6 = _minimize_short(a4, a6)
    curve = EllipticCurveQ(label or f"j{j}_t{twist}", 0, 0, 0, a4, a6)
    assert j_invariant(curve) == Fraction(j)
    return curve


def twists(count: int) -> list[int]:
    """The first ``count`` squarefree twist parameters 1, -1, 2, -2, 3, -3, 5, ..."""
    out, d = [], 1
    while len(out) < count:
        if sympy.ntheory.factor_.core(d) == d:
            out.extend([d, -d])
        d += 1
    return out[:count]


def cm_corpus(per_j: int = 4) -> list[EllipticCurveQ]:
    """``per_j`` quadratic twists for each of the 13 CM j-invariants."""
    ds = twists(per_j)
    return [curve_with_j(j, d) for j in sorted(CM_J_INVARIANTS) for d in ds]


def non_cm_corpus(n: int, seed: int = 0, coeff_bound: int = 50) -> list[EllipticCurveQ]:
    """``n`` distinct random non-CM curves y^2 = x^3 + a x + b with small a, b."""
    rng = np.random.default_rng(seed)
    out, seen = [], set()
    while len(out) < n:
        a, b = (int(v) for v in rng.integers(-coeff_bound, coeff_bound + 1, 2))
        if (a, b) in seen or 4 * a**3 + 27 * b**2 == 0:
            continue
        seen.add((a, b))
        c = EllipticCurveQ(f"ncm_{a}_{b}", 0, 0, 0, a, b)
        if not is_cm(c):
            out.append(c)
    return out
