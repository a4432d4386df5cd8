"""Point counting and normalized L-polynomial coefficients of curves over Q.

Genus 1 curves are given by long Weierstrass models, genus 2 curves by
models y^2 + h(x) y = f(x).  All counting is exact (numpy integer
arithmetic on residues); only the final normalization by sqrt(p) is done
in floating point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
import sympy

log = logging.getLogger(__name__)

# The 13 rational CM j-invariants.
CM_J_INVARIANTS = frozenset(
    [
        0,
        2**4 * 3**3 * 5**3,
        -(2**15) * 3 * 5**3,
        2**6 * 3**3,
        2**3 * 3**3 * 11**3,
        -(3**3) * 5**3,
        3**3 * 5**3 * 17**3,
        2**6 * 5**3,
        -(2**15),
        -(2**15) * 3**3,
        -(2**18) * 3**3 * 5**3,
        -(2**15) * 3**3 * 5**3 * 11**3,
        -(2**18) * 3**3 * 5**3 * 23**3 * 29**3,
    ]
)

# keeps the F_{p^2} evaluation grid at a few MB
_BLOCK = 1 << 20


class BadReductionError(ValueError):
    pass


def is_prime(n: int) -> bool:
    return bool(sympy.isprime(n))


def primes_below(bound: int) -> list[int]:
    return list(sympy.primerange(2, bound))


def _check_odd_prime(p: int) -> None:
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")


def legendre_symbol(a: int, p: int) -> int:
    _check_odd_prime(p)
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


@lru_cache(maxsize=256)
def _chi_table(p: int) -> np.ndarray:
    """chi[v] = Legendre symbol (v/p) for v in 0..p-1."""
    chi = -np.ones(p, dtype=np.int64)
    x = np.arange(1, p, dtype=np.int64)
    chi[(x * x) % p] = 1
    chi[0] = 0
    chi.setflags(write=False)
    return chi


def smallest_nonresidue(p: int) -> int:
    chi = _chi_table(p)
    return int(np.argmax(chi == -1))


def _horner_mod(coeffs_high_first, x: np.ndarray, p: int) -> np.ndarray:
    v = np.full(x.shape, coeffs_high_first[0] % p, dtype=np.int64)
    for c in coeffs_high_first[1:]:
        v = (v * x + c % p) % p
    return v


# --------------------------------------------------------------------------
# genus 1


@dataclass(frozen=True)
class EllipticCurveQ:
    label: str
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError(f"{self.label}: singular Weierstrass model")

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b2(self) -> int:
        return self.a1**2 + 4 * self.a2

    @property
    def b4(self) -> int:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> int:
        return self.a3**2 + 4 * self.a6

    @property
    def b8(self) -> int:
        a1, a2, a3, a4, a6 = self.ainvs
        return a1**2 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3**2 - a4**2

    @property
    def c4(self) -> int:
        return self.b2**2 - 24 * self.b4

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6

    def is_good(self, p: int) -> bool:
        return self.discriminant % p != 0


def j_invariant(curve: EllipticCurveQ) -> Fraction:
    return Fraction(curve.c4**3, curve.discriminant)


def is_cm(curve: EllipticCurveQ) -> bool:
    j = j_invariant(curve)
    return j.denominator == 1 and j.numerator in CM_J_INVARIANTS


def _count_affine_p2(ainvs) -> int:
    a1, a2, a3, a4, a6 = (a % 2 for a in ainvs)
    n = 0
    for x in range(2):
        for y in range(2):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                n += 1
    return n


def ap_genus1(curve: EllipticCurveQ, p: int) -> int:
    """a_p = p + 1 - #E(F_p) for the reduced model, singular point included,
    which gives 1, -1, 0 at split, non-split and additive bad primes."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return int(_ap_batch([curve.ainvs], p)[0])


def _ap_batch(ainvs_list, p: int) -> np.ndarray:
    if p == 2:
        return np.array([2 - _count_affine_p2(a) for a in ainvs_list], dtype=np.int64)
    chi = _chi_table(p)
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    rows = []
    for a1, a2, a3, a4, a6 in ainvs_list:
        b2, b4, b6 = a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6
        rows.append([4 % p, b2 % p, (2 * b4) % p, b6 % p])
    # all partial sums stay below 3 p^2 < 2^31 for p < 2^14
    dt = np.int32 if p < 1 << 14 else np.int64
    c = np.array(rows, dtype=dt)
    x = np.arange(p, dtype=dt)
    x2 = (x * x) % p
    x3 = (4 * x2 * x.astype(np.int64) % p).astype(dt)
    v = (x3[None, :] + c[:, 1:2] * x2 + c[:, 2:3] * x + c[:, 3:4]) % p
    return -chi[v].sum(axis=1)


@dataclass
class LocalLPolynomial:
    p: int
    coefficients: tuple[int, ...]
    good: bool = True

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def normalized(self) -> list[float]:
        """Coefficients of L_p(p^{-1/2} T)."""
        return [c / self.p ** (k / 2) for k, c in enumerate(self.coefficients)]


def l_polynomial_genus1(curve: EllipticCurveQ, p: int) -> LocalLPolynomial:
    ap = ap_genus1(curve, p)
    if curve.is_good(p):
        return LocalLPolynomial(p, (1, -ap, p), True)
    return LocalLPolynomial(p, (1, -ap), False)


@dataclass
class EulerCoefficientVector:
    label: str
    genus: int
    primes: np.ndarray
    values: np.ndarray  # (n,) in genus 1, (n, 2) in genus 2
    bad_primes: tuple[int, ...] = field(default=())

    def features(self) -> np.ndarray:
        """Flat feature row; genus-2 pairs interleave as (a1, a2, a1, a2, ...)."""
        return np.asarray(self.values, dtype=float).reshape(-1)


def euler_matrix_genus1(curves, prime_bound: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized a_p / sqrt(p) for every curve and every prime p < bound.

    Returns (primes, matrix) with one row per curve.  Bad primes are kept.
    """
    if prime_bound < 2:
        raise ValueError("prime_bound must be at least 2")
    curves = list(curves)
    primes = np.array(primes_below(prime_bound), dtype=np.int64)
    out = np.zeros((len(curves), len(primes)))
    if not curves:
        return primes, out
    ainvs = [c.ainvs for c in curves]
    for i, p in enumerate(primes):
        out[:, i] = _ap_batch(ainvs, int(p)) / math.sqrt(p)
    return primes, out


def euler_vector_genus1(curve: EllipticCurveQ, prime_bound: int) -> EulerCoefficientVector:
    primes, m = euler_matrix_genus1([curve], prime_bound)
    bad = tuple(int(p) for p in primes if not curve.is_good(int(p)))
    return EulerCoefficientVector(curve.label, 1, primes, m[0], bad)


# --------------------------------------------------------------------------
# genus 2


def _poly_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


@dataclass(frozen=True)
class HyperellipticCurveQ:
    """y^2 + h(x) y = f(x); coefficient lists are constant term first."""

    label: str
    f: tuple[int, ...]
    h: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(_trim(self.f)))
        object.__setattr__(self, "h", tuple(_trim(self.h)))
        if len(self.f) - 1 not in (5, 6):
            raise ValueError(f"{self.label}: deg f must be 5 or 6")
        if len(self.h) - 1 > 3:
            raise ValueError(f"{self.label}: deg h must be at most 3")
        if len(self.g) - 1 not in (5, 6):
            raise ValueError(f"{self.label}: 4f + h^2 must have degree 5 or 6")
        if self.discriminant == 0:
            raise ValueError(f"{self.label}: 4f + h^2 is not squarefree")

    @cached_property
    def g(self) -> tuple[int, ...]:
        """4 f + h^2, so that (2y + h)^2 = g(x)."""
        return tuple(_trim(_poly_add([4 * c for c in self.f], _poly_mul(self.h, self.h))))

    @cached_property
    def discriminant(self) -> int:
        x = sympy.Symbol("x")
        poly = sympy.Poly(list(reversed(self.g)), x)
        return int(sympy.discriminant(poly))

    def is_good(self, p: int) -> bool:
        """Odd p with p not dividing disc(g) * lc(g)."""
        return p != 2 and self.discriminant % p != 0 and self.g[-1] % p != 0


def _chi_p2_sum(g_high_first, p: int) -> int:
    """Sum over z in F_{p^2} of the quadratic character of g(z).

    F_{p^2} = F_p[t]/(t^2 - r); z = a + b t is a square iff its norm
    a^2 - r b^2 is a square in F_p.
    """
    chi = _chi_table(p)
    r = smallest_nonresidue(p)
    a = np.arange(p, dtype=np.int64)
    g = [int(c) % p for c in reversed(g_high_first)]  # constant first
    deg = len(g) - 1
    # g(a + b t) = sum_k T_k(a) (b t)^k, with t^2 = r; fold r^(k//2) into T_k
    taylor = []
    for k in range(deg + 1):
        shifted = [math.comb(i, k) * g[i] % p for i in range(deg, k - 1, -1)]
        taylor.append(_horner_mod(shifted, a, p) * pow(r, k // 2, p) % p)
    even, odd = taylor[0::2], taylor[1::2]

    # b = 0 is the F_p slice; b and -b give conjugates with equal norms
    total = int(chi[(taylor[0] * taylor[0]) % p].sum())
    rows = max(1, _BLOCK // p)
    for b0 in range(1, (p - 1) // 2 + 1, rows):
        b = np.arange(b0, min((p - 1) // 2, b0 + rows - 1) + 1, dtype=np.int64)[:, None]
        bb = (b * b) % p
        u = np.broadcast_to(even[-1], (len(b), p))
        for c in reversed(even[:-1]):
            u = (u * bb + c) % p
        v = np.broadcast_to(odd[-1], (len(b), p))
        for c in reversed(odd[:-1]):
            v = (v * bb + c) % p
        v = (v * b) % p
        total += 2 * int(chi[(u * u - r * ((v * v) % p)) % p].sum())
    return total


def point_counts_genus2(curve: HyperellipticCurveQ, p: int) -> tuple[int, int]:
    """(#C(F_p), #C(F_{p^2})) of the smooth projective model at a good odd prime."""
    _check_odd_prime(p)
    if not curve.is_good(p):
        raise BadReductionError(f"{curve.label}: bad reduction at p={p}")
    g_high = [c % p for c in reversed(curve.g)]
    chi = _chi_table(p)
    x = np.arange(p, dtype=np.int64)
    s_p = int(chi[_horner_mod(g_high, x, p)].sum())
    s_p2 = _chi_p2_sum(g_high, p)
    if len(curve.g) == 6:
        inf1 = inf2 = 1
    else:
        inf1 = 1 + int(chi[curve.g[-1] % p])
        inf2 = 2  # every element of F_p is a square in F_{p^2}
    return p + s_p + inf1, p * p + s_p2 + inf2


def l_polynomial_genus2(n1: int, n2: int, p: int) -> LocalLPolynomial:
    """L_p(T) from the point counts over F_p and F_{p^2}."""
    s1 = p + 1 - n1
    s2 = p * p + 1 - n2
    twice = s1 * s1 - s2
    if twice % 2:
        raise ArithmeticError(f"non-integral L-polynomial coefficient at p={p}: wrong point count")
    b1, b2 = -s1, twice // 2
    return LocalLPolynomial(p, (1, b1, b2, p * b1, p * p), True)


def euler_vector_genus2(curve: HyperellipticCurveQ, num_primes: int, max_prime: int = 100_000) -> EulerCoefficientVector:
    """Normalized (a1, a2) for the first ``num_primes`` odd good primes."""
    if num_primes < 1:
        raise ValueError("num_primes must be positive")
    primes, values, bad = [], [], []
    p = 2
    while len(primes) < num_primes:
        p = int(sympy.nextprime(p))
        if p > max_prime:
            raise ValueError(f"{curve.label}: fewer than {num_primes} good primes below {max_prime}")
        if not curve.is_good(p):
            bad.append(p)
            continue
        lp = l_polynomial_genus2(*point_counts_genus2(curve, p), p)
        nz = lp.normalized()
        primes.append(p)
        values.append((nz[1], nz[2]))
    if bad:
        log.info("%s: skipped bad primes %s", curve.label, bad)
    return EulerCoefficientVector(curve.label, 2, np.array(primes), np.array(values), tuple(bad))
