"""Sato-Tate groups of genus 1 and 2 curves over Q as explicit matrix groups.

Each group is stored as an identity-component tag plus a finite list of
generators.  The component group is recovered by a breadth-first closure
modulo the identity component, and Haar-random elements are produced as
(uniform coset representative) x (Haar draw from the identity component).
Only characteristic polynomials are consumed downstream, so USp(4) itself
is sampled through its Weyl eigenvalue density instead of as matrices.
"""

from __future__ import annotations

import zlib
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

# identity-component tags
U1 = "U(1)"
SU2 = "SU(2)"
U1xU1 = "U(1)xU(1)"
U1xSU2 = "U(1)xSU(2)"
SU2xSU2 = "SU(2)xSU(2)"
USP4 = "USp(4)"

IDENTITY_COMPONENTS = (U1, SU2, U1xU1, U1xSU2, SU2xSU2, USP4)

SYMPLECTIC_FORM = np.array(
    [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=complex
)

COSET_TOL = 1e-8
MAX_COSETS = 64

J = np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]], dtype=complex)
MAT_A = np.array([[0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1]], dtype=complex)
MAT_B = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0]], dtype=complex)
MAT_C = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=complex)
J2 = np.array([[0, 1], [-1, 0]], dtype=complex)


class CharPolyPair(NamedTuple):
    """Non-trivial coefficients of det(I - x*g); ``c2`` is None in genus 1."""

    c1: float
    c2: float | None = None


@dataclass(frozen=True)
class GroupInfo:
    label: str
    identity_component: str
    genus: int = 2

    @property
    def dim(self) -> int:
        return 2 * self.genus


@dataclass(frozen=True)
class CosetTable:
    group: str
    representatives: np.ndarray  # (size, d, d)

    @property
    def size(self) -> int:
        return len(self.representatives)


# --------------------------------------------------------------------------
# embeddings


def quaternion(a: float, b: float, c: float, d: float) -> np.ndarray:
    """The SU(2) matrix of the unit quaternion a + b i + c j + d k."""
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def _check_su2(A: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {A.shape}")
    if np.abs(A.conj().T @ A - np.eye(2)).max() > tol or abs(np.linalg.det(A) - 1) > tol:
        raise ValueError("matrix is not in SU(2)")
    return A


def embed_u1(theta: float) -> np.ndarray:
    u = np.exp(1j * theta)
    return np.diag([u, u, u.conjugate(), u.conjugate()])


def embed_su2(A: np.ndarray) -> np.ndarray:
    A = _check_su2(A)
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = A
    out[2:, 2:] = A.conj()
    return out


def embed_su2xsu2(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A acts on coordinates (1, 3) and B on (2, 4)."""
    A = _check_su2(A)
    B = _check_su2(B)
    out = np.zeros((4, 4), dtype=complex)
    out[np.ix_([0, 2], [0, 2])] = A
    out[np.ix_([1, 3], [1, 3])] = B
    return out


def embed_u1xu1(theta: float, phi: float) -> np.ndarray:
    u, v = np.exp(1j * theta), np.exp(1j * phi)
    return np.diag([u, v, u.conjugate(), v.conjugate()])


def embed_u1xsu2(theta: float, B: np.ndarray) -> np.ndarray:
    return embed_su2xsu2(np.diag([np.exp(1j * theta), np.exp(-1j * theta)]), B)


def zeta(n: int) -> np.ndarray:
    """Embedded image of diag(e^{pi i/n}, e^{-pi i/n})."""
    w = np.exp(1j * np.pi / n)
    return embed_su2(np.diag([w, w.conjugate()]))


def _q1() -> list[np.ndarray]:
    units = []
    for k in range(4):
        for s in (1, -1):
            v = [0.0] * 4
            v[k] = s
            units.append(quaternion(*v))
    for signs in np.ndindex(2, 2, 2, 2):
        v = [0.5 * (1 - 2 * s) for s in signs]
        units.append(quaternion(*v))
    return [embed_su2(q) for q in units]


def _q2() -> list[np.ndarray]:
    r = 1 / np.sqrt(2)
    out = []
    for k in range(4):
        for m in range(k + 1, 4):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    v = [0.0] * 4
                    v[k], v[m] = s1 * r, s2 * r
                    out.append(embed_su2(quaternion(*v)))
    return out


Q_J = embed_su2(quaternion(0, 0, 1, 0))


# --------------------------------------------------------------------------
# the group catalogue

GROUPS: dict[str, GroupInfo] = {}


def _register(label: str, tag: str, genus: int = 2) -> None:
    GROUPS[label] = GroupInfo(label, tag, genus)


for _n in (2, 4, 6):
    _register(f"J(C{_n})", U1)
for _n in (2, 3, 4, 6):
    _register(f"J(D{_n})", U1)
_register("J(T)", U1)
_register("J(O)", U1)
for _n in (2, 6):
    _register(f"C{_n}_1", U1)
for _n in (2, 4, 6):
    _register(f"D{_n}_1", U1)
for _n in (3, 4, 6):
    _register(f"D{_n}_2", U1)
_register("O1", U1)
for _n in (1, 2, 3, 4, 6):
    _register(f"E{_n}", SU2)
for _n in (1, 2, 3, 4, 6):
    _register(f"J(E{_n})", SU2)
_register("F_ab", U1xU1)
_register("F_ac", U1xU1)
_register("N(G1_3)", U1xSU2)
_register("G3_3", SU2xSU2)
_register("N(G3_3)", SU2xSU2)
_register("USp(4)", USP4)

GENUS2_GROUPS = tuple(GROUPS)

_register("SU2", SU2, genus=1)
_register("N(U1)", U1, genus=1)

GENUS1_GROUPS = ("SU2", "N(U1)")


def group_info(label: str) -> GroupInfo:
    try:
        return GROUPS[label]
    except KeyError:
        raise ValueError(
            f"unknown Sato-Tate group {label!r}; valid labels: {', '.join(GROUPS)}"
        ) from None


def generators(label: str) -> list[np.ndarray]:
    """Generators of ``label`` beyond its identity component."""
    group_info(label)
    if label == "N(U1)":
        return [J2.copy()]
    if label in ("SU2", "USp(4)", "G3_3"):
        return []
    if label.startswith("J(C"):
        n = int(label[3])
        return [zeta(n), J.copy()]
    if label.startswith("J(D"):
        n = int(label[3])
        return [zeta(n), J.copy(), Q_J.copy()]
    if label == "J(T)":
        return _q1() + [J.copy()]
    if label == "J(O)":
        return _q1() + [J.copy()] + _q2()
    if label == "O1":
        return _q1() + [J @ q for q in _q2()]
    if label.startswith("C") and label.endswith("_1"):
        n = int(label[1])
        return [J @ zeta(n)]
    if label.startswith("D") and label.endswith("_1"):
        n = int(label[1])
        return [J @ zeta(n), Q_J.copy()]
    if label.startswith("D") and label.endswith("_2"):
        n = int(label[1])
        return [zeta(n), J @ Q_J]
    if label.startswith("J(E"):
        n = int(label[3])
        return [embed_u1(np.pi / n), J.copy()]
    if label.startswith("E"):
        n = int(label[1])
        return [embed_u1(np.pi / n)]
    if label == "F_ab":
        return [MAT_A.copy(), MAT_B.copy()]
    if label == "F_ac":
        return [MAT_A @ MAT_C]
    if label == "N(G1_3)":
        return [MAT_A.copy()]
    if label == "N(G3_3)":
        return [J.copy()]
    raise AssertionError(f"no generators defined for {label}")  # pragma: no cover


# --------------------------------------------------------------------------
# identity-component membership and coset enumeration

_BLOCK13 = np.ix_([0, 2], [0, 2])
_BLOCK24 = np.ix_([1, 3], [1, 3])
_SPLIT_MASK = np.zeros((4, 4), dtype=bool)
_SPLIT_MASK[_BLOCK13] = True
_SPLIT_MASK[_BLOCK24] = True


def in_identity_component(tag: str, m: np.ndarray, tol: float = COSET_TOL) -> bool:
    """Pattern test for a unitary (symplectic) matrix lying in the given
    connected group; the dimension is read off the matrix."""
    m = np.asarray(m)
    if m.shape == (2, 2):
        if tag == SU2:
            return True
        if tag == U1:
            return abs(m[0, 1]) <= tol and abs(m[1, 0]) <= tol and abs(m[1, 1] - m[0, 0].conjugate()) <= tol
        raise ValueError(f"{tag} is not a genus-1 identity component")

    if tag == USP4:
        return True
    if tag in (U1, U1xU1):
        if np.abs(m - np.diag(np.diag(m))).max() > tol:
            return False
        d = np.diag(m)
        ok = abs(d[2] - d[0].conjugate()) <= tol and abs(d[3] - d[1].conjugate()) <= tol
        if tag == U1:
            ok = ok and abs(d[0] - d[1]) <= tol
        return bool(ok)
    if tag == SU2:
        if np.abs(m[:2, 2:]).max() > tol or np.abs(m[2:, :2]).max() > tol:
            return False
        return bool(
            np.abs(m[2:, 2:] - m[:2, :2].conj()).max() <= tol
            and abs(np.linalg.det(m[:2, :2]) - 1) <= tol
        )
    if tag in (U1xSU2, SU2xSU2):
        if np.abs(m[~_SPLIT_MASK]).max() > tol:
            return False
        a, b = m[_BLOCK13], m[_BLOCK24]
        if abs(np.linalg.det(a) - 1) > tol or abs(np.linalg.det(b) - 1) > tol:
            return False
        if tag == U1xSU2:
            return bool(abs(a[0, 1]) <= tol and abs(a[1, 0]) <= tol and abs(a[1, 1] - a[0, 0].conjugate()) <= tol)
        return True
    raise ValueError(f"unknown identity component {tag!r}")


def same_coset(tag: str, g1: np.ndarray, g2: np.ndarray, tol: float = COSET_TOL) -> bool:
    return in_identity_component(tag, g2.conj().T @ g1, tol)


def closure(tag: str, elements, dim: int = 4, limit: int = MAX_COSETS) -> np.ndarray:
    """Breadth-first closure of {I} and ``elements`` modulo the identity
    component ``tag``; returns one representative per coset."""
    elements = [np.asarray(e, dtype=complex) for e in elements]
    reps = [np.eye(dim, dtype=complex)]
    queue = deque(reps)
    while queue:
        r = queue.popleft()
        for s in elements:
            cand = r @ s
            if any(same_coset(tag, cand, q) for q in reps):
                continue
            reps.append(cand)
            queue.append(cand)
            if len(reps) > limit:
                raise RuntimeError(f"coset closure exceeded {limit} cosets")
    return np.array(reps)


@lru_cache(maxsize=None)
def coset_table(label: str) -> CosetTable:
    info = group_info(label)
    reps = closure(info.identity_component, generators(label), dim=info.dim)
    reps.setflags(write=False)
    return CosetTable(label, reps)


def coset_index(label: str, g: np.ndarray) -> int | None:
    """Index of the coset of ``g`` in the table, or None if ``g`` is not in the group."""
    info = group_info(label)
    for k, r in enumerate(coset_table(label).representatives):
        if same_coset(info.identity_component, g, r):
            return k
    return None


def component_group_orders() -> dict[str, int]:
    """Reference table of component-group orders, as produced by the closure."""
    return {label: coset_table(label).size for label in GROUPS}


# --------------------------------------------------------------------------
# Haar sampling


def _haar_su2(rng: np.random.Generator, size: int) -> np.ndarray:
    q = rng.standard_normal((size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a, b, c, d = q.T
    out = np.empty((size, 2, 2), dtype=complex)
    out[:, 0, 0] = a + 1j * b
    out[:, 0, 1] = c + 1j * d
    out[:, 1, 0] = -c + 1j * d
    out[:, 1, 1] = a - 1j * b
    return out


def _unit(rng: np.random.Generator, size: int) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size))


def haar_identity_component(tag: str, rng: np.random.Generator, size: int | None = None, dim: int = 4) -> np.ndarray:
    """Haar-random elements of a connected group given by its tag.

    Returns shape (dim, dim) when ``size`` is None, else (size, dim, dim).
    USp(4) is not supported; use :func:`sample_usp4_charpoly`.
    """
    n = 1 if size is None else size
    if tag == USP4:
        raise ValueError("USp(4) matrices are not materialized; use sample_usp4_charpoly")
    if dim == 2:
        if tag == U1:
            u = _unit(rng, n)
            out = np.zeros((n, 2, 2), dtype=complex)
            out[:, 0, 0], out[:, 1, 1] = u, u.conj()
        elif tag == SU2:
            out = _haar_su2(rng, n)
        else:
            raise ValueError(f"{tag} is not a genus-1 identity component")
        return out[0] if size is None else out

    out = np.zeros((n, 4, 4), dtype=complex)
    if tag == U1:
        u = _unit(rng, n)
        for k, v in enumerate((u, u, u.conj(), u.conj())):
            out[:, k, k] = v
    elif tag == SU2:
        A = _haar_su2(rng, n)
        out[:, :2, :2] = A
        out[:, 2:, 2:] = A.conj()
    elif tag == U1xU1:
        u, v = _unit(rng, n), _unit(rng, n)
        for k, w in enumerate((u, v, u.conj(), v.conj())):
            out[:, k, k] = w
    elif tag in (U1xSU2, SU2xSU2):
        if tag == U1xSU2:
            u = _unit(rng, n)
            A = np.zeros((n, 2, 2), dtype=complex)
            A[:, 0, 0], A[:, 1, 1] = u, u.conj()
        else:
            A = _haar_su2(rng, n)
        B = _haar_su2(rng, n)
        for i, r in enumerate((0, 2)):
            for j, c in enumerate((0, 2)):
                out[:, r, c] = A[:, i, j]
        for i, r in enumerate((1, 3)):
            for j, c in enumerate((1, 3)):
                out[:, r, c] = B[:, i, j]
    else:
        raise ValueError(f"unknown identity component {tag!r}")
    return out[0] if size is None else out


# Weyl density (cos t1 - cos t2)^2 sin^2 t1 sin^2 t2 on [0, pi]^2 has maximum 16/27.
_WEYL_BOUND = 0.6


def weyl_density_usp4(t1, t2):
    """Unnormalized eigenangle density of USp(4)."""
    return (np.cos(t1) - np.cos(t2)) ** 2 * np.sin(t1) ** 2 * np.sin(t2) ** 2


def _usp4_angles(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    got1, got2, have = [], [], 0
    while have < size:
        m = max(64, int(1.3 * (size - have) / 0.13))  # acceptance rate ~0.137
        t = rng.uniform(0.0, np.pi, (2, m))
        keep = rng.uniform(0.0, _WEYL_BOUND, m) < weyl_density_usp4(t[0], t[1])
        got1.append(t[0, keep])
        got2.append(t[1, keep])
        have += int(keep.sum())
    return np.concatenate(got1)[:size], np.concatenate(got2)[:size]


def sample_usp4_charpoly(rng: np.random.Generator, size: int | None = None):
    """Characteristic-polynomial coefficients of Haar-random USp(4) elements,
    via rejection sampling of the two eigenangles."""
    n = 1 if size is None else size
    t1, t2 = _usp4_angles(rng, n)
    x, y = np.cos(t1), np.cos(t2)
    c1 = -2.0 * (x + y)
    c2 = 2.0 + 4.0 * x * y
    if size is None:
        return CharPolyPair(float(c1[0]), float(c2[0]))
    return c1, c2


def charpoly_coefficients(g: np.ndarray, tol: float = 1e-9):
    """(c1, c2) with det(I - x g) = x^4 + c1 x^3 + c2 x^2 + c1 x + 1 (or c1
    alone for 2x2), computed from tr(g) and tr(g^2).  Works on stacks."""
    g = np.asarray(g)
    tr = np.trace(g, axis1=-2, axis2=-1)
    c1 = -tr
    if np.max(np.abs(c1.imag)) > tol:
        raise ArithmeticError("characteristic polynomial has non-real coefficients")
    if g.shape[-1] == 2:
        return c1.real
    tr2 = np.einsum("...ij,...ji->...", g, g)
    c2 = (tr * tr - tr2) / 2
    if np.max(np.abs(c2.imag)) > tol:
        raise ArithmeticError("characteristic polynomial has non-real coefficients")
    return c1.real, c2.real


def sample_elements(label: str, rng: np.random.Generator, size: int, return_cosets: bool = False):
    """Haar-random matrices of a group with a non-trivial or non-USp(4)
    identity component: a uniform coset representative times an independent
    identity-component draw."""
    info = group_info(label)
    table = coset_table(label)
    k = rng.integers(0, table.size, size)
    h = haar_identity_component(info.identity_component, rng, size, dim=info.dim)
    g = table.representatives[k] @ h
    return (g, k) if return_cosets else g


def sample_pairs(label: str, rng: np.random.Generator, size: int):
    """Vectorized draw of ``size`` coefficient pairs (c1, c2) (c1 only in genus 1)."""
    info = group_info(label)
    if info.identity_component == USP4:
        return sample_usp4_charpoly(rng, size)
    return charpoly_coefficients(sample_elements(label, rng, size))


def sample(label: str, rng: np.random.Generator) -> CharPolyPair:
    out = sample_pairs(label, rng, 1)
    if isinstance(out, tuple):
        return CharPolyPair(float(out[0][0]), float(out[1][0]))
    return CharPolyPair(float(out[0]))


def row_rng(seed: int, label: str, row: int) -> np.random.Generator:
    """Independent stream for one batch row, keyed by (seed, group, row)."""
    key = zlib.crc32(label.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key, row)))


def sample_batch(label: str, pairs_per_sample: int, num_samples: int, seed: int, start: int = 0):
    """``num_samples`` rows of ``pairs_per_sample`` independent draws each.

    Genus-2 rows interleave as (c1_1, c2_1, ..., c1_K, c2_K).  Rows are
    generated from per-row substreams, so any row range can be produced
    independently (``start`` offsets the row index).
    """
    if pairs_per_sample < 1 or num_samples < 1:
        raise ValueError("pairs_per_sample and num_samples must be positive")
    info = group_info(label)
    width = pairs_per_sample * info.genus
    out = np.empty((num_samples, width))
    for i in range(num_samples):
        draw = sample_pairs(label, row_rng(seed, label, start + i), pairs_per_sample)
        if info.genus == 2:
            out[i, 0::2], out[i, 1::2] = draw
        else:
            out[i] = draw
    return out, [label] * num_samples


def is_unitary(g: np.ndarray, tol: float = 1e-10) -> bool:
    g = np.asarray(g)
    eye = np.eye(g.shape[-1])
    return bool(np.abs(np.swapaxes(g.conj(), -1, -2) @ g - eye).max() <= tol)


def is_symplectic(g: np.ndarray, tol: float = 1e-10) -> bool:
    g = np.asarray(g)
    if g.shape[-1] == 2:
        # SL2 = Sp2
        return bool(np.abs(np.linalg.det(g) - 1).max() <= tol)
    return bool(np.abs(np.swapaxes(g, -1, -2) @ SYMPLECTIC_FORM @ g - SYMPLECTIC_FORM).max() <= tol)
