"""The orthogonal-group engine.

Isotropic vector search and hyperbolic splitting over F_p, Witt
decomposition over F_p and Z/p^k, reflections, Cartan-Dieudonne
factorization into reflections, lifting isometries along the residue map
O(M) -> O(M mod p), and Newton lifting of isotropic vectors from the
residue field to Z/p^k.

Reflections use the standard formula r_u(v) = v - 2 B(u,v) B(u,u)^{-1} u,
defined whenever Q(u) = B(u,u) is a unit; that unit condition is exactly
what makes a residue reflection liftable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._grid import quad_values, vector_chunks
from .errors import Degenerate, NonUnitNorm, NotIsotropic, RingMismatch
from .quadform import GramForm, diagonalize
from .ring import Ring, sqrt_mod_p
from .linalg import unit_pivot_nullspace

# exhaustive isotropic scans are capped at this many vectors
SCAN_BUDGET = 1_000_000


@dataclass(frozen=True)
class Isometry:
    """An invertible matrix A with A^T G A = G, acting on column vectors."""

    form: GramForm
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = self.form.ring.matrix(self.matrix)
        g = self.form.gram
        assert np.array_equal(a.T @ g @ a % self.form.ring.modulus, g), "A^T G A != G"
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def ring(self) -> Ring:
        return self.form.ring

    def apply(self, v) -> np.ndarray:
        return self.matrix @ self.form.ring.vector(v) % self.form.ring.modulus

    def compose(self, other: "Isometry") -> "Isometry":
        if self.form != other.form:
            raise RingMismatch("isometries preserve different forms")
        return Isometry(self.form, self.matrix @ other.matrix % self.form.ring.modulus)

    def residue(self) -> "Isometry":
        return Isometry(self.form.residue(), self.matrix % self.form.ring.p)

    def __eq__(self, other):
        if not isinstance(other, Isometry):
            return NotImplemented
        return self.form == other.form and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.form, self.matrix.tobytes()))


@dataclass(frozen=True)
class HyperbolicBasis:
    """Pairs (e_i, f_i) with Q(e_i) = Q(f_i) = 0, B(e_i, f_j) = delta_ij."""

    ring: Ring
    e_rows: np.ndarray = field(repr=False)
    f_rows: np.ndarray = field(repr=False)

    @property
    def pairs(self) -> int:
        return self.e_rows.shape[0]

    def validate(self, q: GramForm) -> None:
        m = q.ring.modulus
        e, f = self.e_rows, self.f_rows
        assert not (e @ q.gram @ e.T % m).any(), "e-vectors are not isotropic/orthogonal"
        assert not (f @ q.gram @ f.T % m).any(), "f-vectors are not isotropic/orthogonal"
        eye = np.eye(self.pairs, dtype=np.int64)
        assert np.array_equal(e @ q.gram @ f.T % m, eye), "B(e_i, f_j) != delta_ij"


@dataclass(frozen=True)
class WittDecomposition:
    index: int
    basis: HyperbolicBasis
    anisotropic: GramForm
    anisotropic_rows: np.ndarray = field(repr=False)

    @property
    def is_hyperbolic(self) -> bool:
        return self.anisotropic.n == 0


def reflection(q: GramForm, u) -> Isometry:
    """The reflection negating u and fixing its orthogonal complement."""
    ring = q.ring
    u = ring.vector(u)
    norm = q.quad(u)
    if not ring.is_unit(norm):
        raise NonUnitNorm(f"Q(u) = {norm} is not a unit in {ring}")
    coeff = ring.mul(2, ring.inverse(norm))
    mat = (np.eye(q.n, dtype=np.int64) - coeff * np.outer(u, q.gram @ u)) % ring.modulus
    return Isometry(q, mat)


def compose_reflections(q: GramForm, vectors) -> Isometry:
    """Product of reflections in list order (an empty list is the identity)."""
    mat = np.eye(q.n, dtype=np.int64)
    for u in vectors:
        mat = mat @ reflection(q, u).matrix % q.ring.modulus
    return Isometry(q, mat)


# -- isotropic vectors over F_p -------------------------------------------------


def find_isotropic_vector(q: GramForm, seed: int = 0):
    """A nonzero v with Q(v) = 0 over F_p, or None when the form is
    anisotropic (possible only for rank <= 2).

    Exhaustive code-order scan within budget; beyond it, seeded random
    sampling with a deterministic 3-variable diagonal fallback, which
    always succeeds since a form of rank >= 3 over F_p is isotropic.
    """
    ring = q.ring
    if ring.kind != "fp":
        raise ValueError("isotropic search runs over a prime field")
    if not q.is_nondegenerate():
        raise Degenerate("isotropic search requires a non-degenerate form")
    p, n = ring.p, q.n
    if n == 0:
        return None
    if p**n <= SCAN_BUDGET:
        for start, block in vector_chunks(p, n):
            vals = quad_values(q.gram, p, block)
            if start == 0:
                vals[0] = 1  # skip the zero vector
            hits = np.nonzero(vals == 0)[0]
            if hits.size:
                return block[hits[0]].copy()
        return None
    rng = np.random.default_rng(seed)
    for _ in range(64):
        batch = rng.integers(0, p, size=(512, n), dtype=np.int64)
        vals = np.einsum("ij,jk,ik->i", batch, q.gram, batch) % p
        hits = np.nonzero((vals == 0) & batch.any(axis=1))[0]
        if hits.size:
            return batch[hits[0]].copy()
    # deterministic fallback on a diagonal 3-variable subproblem
    d, t = diagonalize(q)
    a, b, c = (int(d.gram[i, i]) for i in range(3))
    inv_c = ring.inverse(c)
    for x in range(p):
        for y in range(p):
            if x == y == 0:
                continue
            rhs = -(a * x * x + b * y * y) * inv_c % p
            if rhs == 0:
                coords = (x, y, 0)
            else:
                z = sqrt_mod_p(rhs, p)
                if z is None:
                    continue
                coords = (x, y, z)
            v = np.zeros(n, dtype=np.int64)
            v[:3] = coords
            v = t @ v % p
            assert q.quad(v) == 0
            return v
    raise AssertionError("rank >= 3 form over F_p must be isotropic")


def hensel_lift_isotropic(q: GramForm, vbar) -> np.ndarray:
    """Lift a residue isotropic vector to an exact one over Z/p^k.

    Newton step v -> v - Q(v) (2 B(v,d))^{-1} d along a direction d with
    B(v,d) a unit; each step at least doubles the p-valuation of Q(v).
    """
    ring = q.ring
    if not q.is_nondegenerate():
        raise Degenerate("lift requires a non-degenerate form")
    v = ring.vector(vbar)
    if not any(ring.is_unit(x) for x in v):
        raise NotIsotropic("residue vector must be nonzero")
    if q.residue().quad(v % ring.p) != 0:
        raise NotIsotropic("residue vector is not isotropic")
    m = ring.modulus
    while True:
        val = q.quad(v)
        if val == 0:
            return v
        pairing = v @ q.gram % m
        d = next(i for i in range(q.n) if ring.is_unit(pairing[i]))
        step = ring.mul(val, ring.inverse(ring.mul(2, pairing[d])))
        v = v.copy()
        v[d] = (v[d] - step) % m


def split_hyperbolic(q: GramForm, v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split the hyperbolic plane spanned by an isotropic unimodular v.

    Returns (e, f, complement_rows): e = v, f the dual isotropic partner,
    and a basis of (e, f)-perp on which the restriction is again
    non-degenerate of rank n - 2.
    """
    ring = q.ring
    m = ring.modulus
    e = ring.vector(v)
    if q.quad(e) != 0:
        raise NotIsotropic(f"Q(v) = {q.quad(e)} != 0")
    if not any(ring.is_unit(x) for x in e):
        raise NotIsotropic("v must be unimodular")
    pairing = e @ q.gram % m
    j = next((i for i in range(q.n) if ring.is_unit(pairing[i])), None)
    assert j is not None, "B(v, .) is unimodular for non-degenerate Q"
    w = np.zeros(q.n, dtype=np.int64)
    w[j] = 1
    inv_b = ring.inverse(q.bilinear(e, w))
    scale = ring.mul(ring.mul(q.quad(w), ring.mul(inv_b, inv_b)), ring.inverse(2))
    f = (w * inv_b - e * scale) % m
    assert q.quad(f) == 0 and q.bilinear(e, f) == 1
    comp = unit_pivot_nullspace(ring, np.vstack([e @ q.gram % m, f @ q.gram % m]))
    return e, f, comp


def _decompose(q: GramForm, seed: int) -> WittDecomposition:
    ring = q.ring
    if not q.is_nondegenerate():
        raise Degenerate("Witt decomposition requires a non-degenerate form")
    m = ring.modulus
    ambient = np.eye(q.n, dtype=np.int64)  # rows: current complement basis
    current = q
    e_list, f_list = [], []
    while current.n >= 2:
        vbar = find_isotropic_vector(current.residue(), seed=seed + len(e_list))
        if vbar is None:
            break
        v = hensel_lift_isotropic(current, vbar)
        e, f, comp = split_hyperbolic(current, v)
        e_list.append(e @ ambient % m)
        f_list.append(f @ ambient % m)
        ambient = comp @ ambient % m
        current = GramForm(ring, comp @ current.gram @ comp.T % m)
    idx = len(e_list)
    shape = (idx, q.n)
    basis = HyperbolicBasis(
        ring,
        np.array(e_list, dtype=np.int64).reshape(shape),
        np.array(f_list, dtype=np.int64).reshape(shape),
    )
    basis.validate(q)
    return WittDecomposition(idx, basis, current, ambient)


def witt_decompose(q: GramForm, seed: int = 0) -> WittDecomposition:
    """Witt decomposition over F_p: split hyperbolic planes until the rest
    is anisotropic (rank <= 2 over a finite field)."""
    if q.ring.kind != "fp":
        raise ValueError("witt_decompose runs over a prime field; see witt_decompose_local")
    dec = _decompose(q, seed)
    assert dec.anisotropic.n <= 2, "anisotropic part over F_p has rank <= 2"
    return dec


def witt_decompose_local(q: GramForm, seed: int = 0) -> WittDecomposition:
    """Witt decomposition over Z/p^k via residue search plus Newton lifting.

    The index equals the residue Witt index; when the residue form is
    hyperbolic the returned basis is an exact hyperbolic basis over Z/p^k.
    """
    return _decompose(q, seed)


# -- reflection factorization and lifting ---------------------------------------


def cartan_dieudonne(iso: Isometry) -> list[np.ndarray]:
    """Factor an isometry over F_p into at most 2*rank reflections.

    Returns vectors u_1, ..., u_t with unit norms whose reflections compose
    (in list order) to the given matrix.  Walks an orthogonal basis; each
    step fixes one more basis vector using one reflection when Q(Av - v) is
    a unit and the standard two-reflection detour otherwise (their sum of
    norms is 4 Q(v), so the detour is always available in odd
    characteristic).
    """
    q = iso.form
    ring = q.ring
    if ring.kind != "fp":
        raise ValueError("reflection factorization runs over a prime field")
    p = ring.p
    _, t = diagonalize(q)
    b = iso.matrix.copy()
    refs: list[np.ndarray] = []
    for i in range(q.n):
        v = t[:, i].copy()
        w = b @ v % p
        if np.array_equal(w, v):
            continue
        d = (w - v) % p
        if q.quad(d) != 0:
            refs.append(d)
            b = reflection(q, d).matrix @ b % p
        else:
            s = (w + v) % p
            assert q.quad(s) != 0
            refs.append(s)
            refs.append(v)
            b = reflection(q, v).matrix @ reflection(q, s).matrix @ b % p
        assert np.array_equal(b @ v % p, v)
    assert np.array_equal(b, np.eye(q.n, dtype=np.int64)), "isometry did not reduce to identity"
    assert len(refs) <= 2 * q.n
    return refs


def lift_isometry(abar: Isometry, q: GramForm) -> Isometry:
    """Lift an isometry of the residue form to an exact one over Z/p^k.

    Factor into residue reflections and lift each reflection vector
    canonically; its norm stays a unit, so the lifted product is an exact
    isometry whose residue is the input.
    """
    if abar.form != q.residue():
        raise RingMismatch("isometry does not act on the residue of the given form")
    refs = cartan_dieudonne(abar)
    lifted = compose_reflections(q, [u % q.ring.modulus for u in refs])
    assert np.array_equal(lifted.matrix % q.ring.p, abar.matrix)
    return lifted


def random_isometry(q: GramForm, rng, reflections: int | None = None) -> Isometry:
    """A seeded product of random unit-norm reflections."""
    ring = q.ring
    count = 2 * q.n if reflections is None else reflections
    vecs = []
    while len(vecs) < count:
        u = rng.integers(0, ring.modulus, size=q.n, dtype=np.int64)
        if ring.is_unit(q.quad(u)):
            vecs.append(u)
    return compose_reflections(q, vecs)
