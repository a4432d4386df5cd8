"""Brute-force reference implementations used only by the tests.

Deliberately slow and structurally different from the library code: points
are enumerated directly on the original model, and F_{p^2} is built from a
different irreducible quadratic with squares found by exhaustive squaring.
"""

from __future__ import annotations


def count_points_genus1(ainvs, p: int) -> int:
    """#E(F_p) for the projective Weierstrass model, singular point included."""
    a1, a2, a3, a4, a6 = (a % p for a in ainvs)
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0:
                n += 1
    return n


def ap_naive(ainvs, p: int) -> int:
    return p + 1 - count_points_genus1(ainvs, p)


class Fp2:
    """F_p[s]/(s^2 + s + c) with the first c making it irreducible."""

    def __init__(self, p: int):
        self.p = p
        for c in range(1, p):
            if all((t * t + t + c) % p for t in range(p)):
                self.c = c
                break
        else:
            raise ValueError("no irreducible s^2 + s + c")
        self.elements = [(a, b) for a in range(p) for b in range(p)]
        self.square_roots: dict[tuple[int, int], int] = {}
        for e in self.elements:
            sq = self.mul(e, e)
            self.square_roots[sq] = self.square_roots.get(sq, 0) + 1

    def add(self, u, v):
        return ((u[0] + v[0]) % self.p, (u[1] + v[1]) % self.p)

    def mul(self, u, v):
        # s^2 = -s - c
        a, b = u
        c, d = v
        bd = b * d
        return ((a * c - self.c * bd) % self.p, (a * d + b * c - bd) % self.p)

    def poly(self, coeffs, x):
        acc = (0, 0)
        for k in reversed(coeffs):
            acc = self.add(self.mul(acc, x), (k % self.p, 0))
        return acc

    def roots_count(self, a, b, c) -> int:
        """Number of y with a y^2 + b y + c = 0, by exhaustive search."""
        n = 0
        for y in self.elements:
            if self.add(self.add(self.mul(a, self.mul(y, y)), self.mul(b, y)), c) == (0, 0):
                n += 1
        return n


def _padded(coeffs, n):
    return list(coeffs) + [0] * (n - len(coeffs))


def counts_genus2(f, h, p: int) -> tuple[int, int]:
    """(#C(F_p), #C(F_{p^2})) of y^2 + h y = f on the smooth model with
    deg f <= 6, deg h <= 3 (odd p only)."""
    f = _padded(f, 7)
    h = _padded(h, 4)
    # over F_p: direct double loop
    n1 = sum(
        1
        for x in range(p)
        for y in range(p)
        if (y * y + sum(c * x**k for k, c in enumerate(h)) * y - sum(c * x**k for k, c in enumerate(f))) % p == 0
    )
    n1 += sum(1 for v in range(p) if (v * v + h[3] * v - f[6]) % p == 0)
    F = Fp2(p)
    n2 = 0
    for x in F.elements:
        hx = F.poly(h, x)
        fx = F.poly(f, x)
        # y^2 + hx y - fx = 0  <=>  (2y + hx)^2 = hx^2 + 4 fx; count via the squares table
        disc = F.add(F.mul(hx, hx), F.mul((4, 0), fx))
        n2 += F.square_roots.get(disc, 0)
    n2 += F.roots_count((1, 0), (h[3] % p, 0), ((-f[6]) % p, 0))
    return n1, n2
