"""Quadratic spaces as symmetric Gram matrices.

Conventions, fixed once for the whole package:

* ``Q(v) = v^T G v`` and the bilinear form is ``B(u, v) = u^T G v``, so
  ``B(v, v) = Q(v)``.  The hyperbolic plane is ``[[0, 1], [1, 0]]`` with
  ``Q(x e + y f) = 2 x y``; this is harmless since 2 is a unit.
* A form is non-degenerate iff det(G) is a unit, which over Z/p^k is
  equivalent to non-degeneracy of the residue form.
* ``tensor`` is the row-major Kronecker product, and an m-fold Pfister
  form <<a_1, ..., a_m>> expands so that each new slot becomes the outer
  Kronecker factor: appending a slot c yields diag(G, -c*G).  The solver
  relies on this layout when it windows the leading coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import Degenerate, DimensionMismatch, NonUnitSlot, RingMismatch
from .ring import Ring, ring_from_json


@dataclass(frozen=True)
class GramForm:
    """A quadratic space: a symmetric Gram matrix over a ring."""

    ring: Ring
    gram: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = self.ring.matrix(self.gram)
        if g.shape[0] != g.shape[1]:
            raise DimensionMismatch(f"gram matrix must be square, got {g.shape}")
        if not np.array_equal(g, g.T):
            raise ValueError("gram matrix must be symmetric")
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    def _check_vector(self, v) -> np.ndarray:
        v = self.ring.vector(v)
        if v.shape != (self.n,):
            raise DimensionMismatch(f"expected a vector of length {self.n}, got shape {v.shape}")
        return v

    def quad(self, v) -> int:
        """Q(v) = v^T G v."""
        v = self._check_vector(v)
        return int(v @ self.gram @ v % self.ring.modulus)

    def bilinear(self, u, v) -> int:
        """B(u, v) = u^T G v; symmetric, with B(v, v) = Q(v)."""
        u = self._check_vector(u)
        v = self._check_vector(v)
        return int(u @ self.gram @ v % self.ring.modulus)

    def det(self) -> int:
        """Exact determinant of the Gram matrix, as a canonical residue."""
        return _int_det([[int(x) for x in row] for row in self.gram]) % self.ring.modulus

    def is_nondegenerate(self) -> bool:
        # det is a unit iff the residue matrix is invertible over F_p
        return _residue_rank(self.gram, self.ring.p) == self.n

    def restrict(self, rows) -> "GramForm":
        """The Gram matrix S G S^T on a sub-basis given as rows of S."""
        s = self.ring.matrix(rows)
        if s.shape[1] != self.n:
            raise DimensionMismatch(f"basis rows must have length {self.n}")
        return GramForm(self.ring, s @ self.gram @ s.T % self.ring.modulus)

    def residue(self) -> "GramForm":
        return GramForm(self.ring.residue_ring, self.gram % self.ring.p)

    def diagonal(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.diagonal(self.gram))

    def to_json(self) -> dict:
        return {"ring": self.ring.to_json(), "gram": [[int(x) for x in row] for row in self.gram]}

    def __eq__(self, other):
        if not isinstance(other, GramForm):
            return NotImplemented
        return self.ring == other.ring and np.array_equal(self.gram, other.gram)

    def __hash__(self):
        return hash((self.ring, self.gram.tobytes(), self.n))


def from_diagonal(ring: Ring, entries) -> GramForm:
    return GramForm(ring, np.diag(ring.vector(entries)))


def hyperbolic_plane(ring: Ring) -> GramForm:
    return GramForm(ring, [[0, 1], [1, 0]])


def hyperbolic_space(ring: Ring, planes: int) -> GramForm:
    """Orthogonal sum of ``planes`` hyperbolic planes, basis e1,f1,...,en,fn."""
    g = np.zeros((2 * planes, 2 * planes), dtype=np.int64)
    for i in range(planes):
        g[2 * i, 2 * i + 1] = 1
        g[2 * i + 1, 2 * i] = 1
    return GramForm(ring, g)


def direct_sum(a: GramForm, b: GramForm) -> GramForm:
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    n1, n2 = a.n, b.n
    g = np.zeros((n1 + n2, n1 + n2), dtype=np.int64)
    g[:n1, :n1] = a.gram
    g[n1:, n1:] = b.gram
    return GramForm(a.ring, g)


def tensor(a: GramForm, b: GramForm) -> GramForm:
    """Row-major Kronecker product of the Gram matrices."""
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    return GramForm(a.ring, np.kron(a.gram, b.gram) % a.ring.modulus)


@dataclass(frozen=True)
class PfisterSpec:
    """Unit slots a_1, ..., a_m defining <<a_1, ..., a_m>> of rank 2^m."""

    ring: Ring
    slots: tuple[int, ...]

    def __post_init__(self):
        slots = tuple(self.ring.normalize(a) for a in self.slots)
        if len(slots) < 1:
            raise NonUnitSlot("a Pfister form needs at least one slot")
        for a in slots:
            if not self.ring.is_unit(a):
                raise NonUnitSlot(f"slot {a} is not a unit in {self.ring}")
        object.__setattr__(self, "slots", slots)

    @property
    def m(self) -> int:
        return len(self.slots)

    @property
    def rank(self) -> int:
        return 1 << len(self.slots)

    def to_json(self) -> dict:
        return {"ring": self.ring.to_json(), "pfister": list(self.slots)}


def pfister_expand(spec: PfisterSpec) -> GramForm:
    """Expand <<a_1,...,a_m>> = <1,-a_1> x ... x <1,-a_m> to a diagonal form.

    Slot i flips the i-th low bit of the diagonal index, so entry t is the
    product of -a_i over the set bits of t; entry 0 is 1, hence Q(e_1) = 1.
    """
    ring = spec.ring
    form = from_diagonal(ring, [1])
    for a in spec.slots:
        form = tensor(from_diagonal(ring, [1, ring.neg(a)]), form)
    return form


def diagonalize(q: GramForm) -> tuple[GramForm, np.ndarray]:
    """Congruence-diagonalize: T with T^T G T = D, all diagonal entries units.

    Unit pivots always exist for a non-degenerate form here: if no diagonal
    entry of the remaining block is a unit, some off-diagonal one is, and
    v -> u + v turns it into a diagonal unit because 2 is a unit.
    """
    if not q.is_nondegenerate():
        raise Degenerate("cannot diagonalize a degenerate form")
    ring = q.ring
    m = ring.modulus
    n = q.n
    g = q.gram.copy()
    t = np.eye(n, dtype=np.int64)

    def add_col(dst, src, coeff):
        # basis change v_dst += coeff * v_src, applied congruently
        g[:, dst] = (g[:, dst] + coeff * g[:, src]) % m
        g[dst, :] = (g[dst, :] + coeff * g[src, :]) % m
        t[:, dst] = (t[:, dst] + coeff * t[:, src]) % m

    def swap_cols(i, j):
        g[:, [i, j]] = g[:, [j, i]]
        g[[i, j], :] = g[[j, i], :]
        t[:, [i, j]] = t[:, [j, i]]

    for i in range(n):
        pivot = next((r for r in range(i, n) if ring.is_unit(g[r, r])), None)
        if pivot is None:
            off = next(
                ((r, s) for r in range(i, n) for s in range(r + 1, n) if ring.is_unit(g[r, s])),
                None,
            )
            assert off is not None, "non-degenerate block must contain a unit entry"
            add_col(off[0], off[1], 1)
            pivot = off[0]
        if pivot != i:
            swap_cols(i, pivot)
        inv = ring.inverse(g[i, i])
        for j in range(i + 1, n):
            if g[i, j]:
                add_col(j, i, (-g[i, j] * inv) % m)
    d = GramForm(ring, np.diag(np.diagonal(g)))
    assert np.array_equal(t.T @ q.gram @ t % m, d.gram)
    return d, t


def form_from_json(data) -> GramForm:
    if isinstance(data, str):
        data = json.loads(data)
    ring = ring_from_json(data["ring"])
    if "pfister" in data:
        return pfister_expand(PfisterSpec(ring, tuple(data["pfister"])))
    return GramForm(ring, data["gram"])


def _residue_rank(a: np.ndarray, p: int) -> int:
    r = np.asarray(a, dtype=np.int64) % p
    rows, cols = r.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(r[rank:, c])[0]
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            r[[rank, piv]] = r[[piv, rank]]
        r[rank] = r[rank] * pow(int(r[rank, c]), -1, p) % p
        for i in range(rows):
            if i != rank and r[i, c]:
                r[i] = (r[i] - r[i, c] * r[rank]) % p
        rank += 1
    return rank


def _int_det(m: list[list[int]]) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    n = len(m)
    if n == 0:
        return 1
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for i in range(n - 1):
        if m[i][i] == 0:
            swap = next((r for r in range(i + 1, n) if m[r][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
            m[r][i] = 0
        prev = m[i][i]
    return sign * m[n - 1][n - 1]
