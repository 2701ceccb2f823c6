"""Subspaces over F_p and free direct summands over Z/p^k.

Everything here runs Gaussian elimination with unit pivots.  Over a field
every nonzero pivot is a unit; over Z/p^k a pivot is usable iff its
residue is nonzero, and the matrices this package produces (surjections
onto free modules, summand bases, invertible frames) always admit such
pivots, so no Smith-form machinery is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbientMismatch,
    NotASummand,
    NotInvertible,
    NotSurjective,
)
from .ring import Ring


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_p^n, stored as its unique reduced row-echelon basis."""

    ring: Ring
    ambient_dim: int
    basis: np.ndarray = field(repr=False)
    pivots: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def contains(self, v) -> bool:
        v = self.ring.vector(v) % self.ring.p
        r = v.copy()
        for row, c in zip(self.basis, self.pivots):
            if r[c]:
                r = (r - r[c] * row) % self.ring.p
        return not r.any()

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.ambient_dim == other.ambient_dim
            and np.array_equal(self.basis, other.basis)
        )

    def __hash__(self):
        return hash((self.ring, self.ambient_dim, self.basis.tobytes()))


@dataclass(frozen=True)
class FreeSummand:
    """Rows spanning a free direct summand of R^n over R = Z/p^k.

    The certificate is independence of the residue rows over F_p: lifting
    any residue basis of a complement yields a full basis of R^n.
    """

    ring: Ring
    ambient_rank: int
    basis: np.ndarray = field(repr=False)

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def residue_subspace(self) -> Subspace:
        return echelonize(self.ring.residue_ring, self.basis % self.ring.p)


def rref(ring: Ring, rows) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row-echelon form over F_p; returns (matrix, pivot columns)."""
    p = ring.p
    a = np.atleast_2d(np.asarray(rows, dtype=np.int64)) % p
    m, n = a.shape
    r = 0
    pivots = []
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        for i in range(m):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        pivots.append(c)
        r += 1
    return a[:r], tuple(pivots)


def echelonize(ring: Ring, rows) -> Subspace:
    """Canonical subspace spanned by the given rows over F_p."""
    a = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    basis, pivots = rref(ring, a)
    basis.setflags(write=False)
    return Subspace(ring.residue_ring, a.shape[1], basis, pivots)


def rank(ring: Ring, rows) -> int:
    return rref(ring, rows)[0].shape[0]


def nullspace(ring: Ring, a) -> np.ndarray:
    """Rows spanning {x : a x = 0} over F_p."""
    a = np.atleast_2d(np.asarray(a, dtype=np.int64))
    n = a.shape[1]
    r, pivots = rref(ring, a)
    free = [c for c in range(n) if c not in pivots]
    out = np.zeros((len(free), n), dtype=np.int64)
    for i, f in enumerate(free):
        out[i, f] = 1
        for row, c in zip(r, pivots):
            out[i, c] = -row[f] % ring.p
    return out


def left_nullspace(ring: Ring, a) -> np.ndarray:
    return nullspace(ring, np.atleast_2d(np.asarray(a, dtype=np.int64)).T)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """Canonical basis of the intersection of two subspaces.

    A vector lies in both row spans iff it is u A = -w B for some left
    kernel element (u, w) of the stacked matrix.
    """
    if a.ring != b.ring or a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch(f"{a.ring}^{a.ambient_dim} vs {b.ring}^{b.ambient_dim}")
    if a.dim == 0 or b.dim == 0:
        return echelonize(a.ring, np.zeros((0, a.ambient_dim), dtype=np.int64))
    stacked = np.vstack([a.basis, b.basis])
    combos = left_nullspace(a.ring, stacked)
    vecs = combos[:, : a.dim] @ a.basis % a.ring.p
    return echelonize(a.ring, vecs if vecs.size else np.zeros((0, a.ambient_dim), dtype=np.int64))


def residue_rank(ring: Ring, a) -> int:
    return rank(ring.residue_ring, np.asarray(a, dtype=np.int64) % ring.p)


def is_invertible_matrix(ring: Ring, a) -> bool:
    """True iff the residue matrix is invertible over F_p (then an exact
    inverse over Z/p^k exists as well)."""
    a = ring.matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return residue_rank(ring, a) == a.shape[0]


def _unit_pivot_eliminate(ring: Ring, a: np.ndarray):
    """Full unit-pivot reduction; returns (reduced, [(row, pivot_col), ...]).

    Pivot entries must be units; the reduction divides by nothing else, so
    it is exact over Z/p^k.
    """
    m = ring.modulus
    a = a % m
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        cand = next((i for i in range(r, rows) if ring.is_unit(a[i, c])), None)
        if cand is None:
            continue
        if cand != r:
            a[[r, cand]] = a[[cand, r]]
        a[r] = a[r] * ring.inverse(a[r, c]) % m
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % m
        pivots.append((r, c))
        r += 1
    return a, pivots


def solve_unit_pivot(ring: Ring, a, b) -> np.ndarray:
    """One exact solution X of A X = B for A with full unit row rank.

    A is r x n with residue rank r (a surjection onto R^r); free variables
    are set to zero.  Raises NotSurjective when the residue rank is short.
    """
    a = ring.matrix(a)
    b = np.asarray(b, dtype=np.int64) % ring.modulus
    single = b.ndim == 1
    if single:
        b = b[:, None]
    if b.shape[0] != a.shape[0]:
        raise ValueError("right-hand side has the wrong number of rows")
    aug, pivots = _unit_pivot_eliminate(ring, np.hstack([a, b]))
    if len(pivots) < a.shape[0] or any(c >= a.shape[1] for _, c in pivots):
        raise NotSurjective(f"residue rank {len(pivots)} < {a.shape[0]} rows")
    x = np.zeros((a.shape[1], b.shape[1]), dtype=np.int64)
    for r, c in pivots:
        x[c] = aug[r, a.shape[1]:]
    return x[:, 0] if single else x


def invert_matrix(ring: Ring, a) -> np.ndarray:
    a = ring.matrix(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    try:
        return solve_unit_pivot(ring, a, np.eye(n, dtype=np.int64))
    except NotSurjective as exc:
        raise NotInvertible(f"matrix is not invertible over {ring}") from exc


def unit_pivot_nullspace(ring: Ring, a) -> np.ndarray:
    """Rows spanning the kernel of a surjective A over Z/p^k, exactly.

    Requires residue rank equal to the row count; the kernel is then a free
    summand of rank cols - rows and the returned rows certify it (each has
    a 1 in a distinct free column).
    """
    a = ring.matrix(a)
    rows, cols = a.shape
    red, pivots = _unit_pivot_eliminate(ring, a.copy())
    if len(pivots) < rows:
        raise NotSurjective(f"residue rank {len(pivots)} < {rows} rows")
    pivot_cols = [c for _, c in pivots]
    free = [c for c in range(cols) if c not in pivot_cols]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        out[i, f] = 1
        for r, c in pivots:
            out[i, c] = -red[r, f] % ring.modulus
    return out


def kernel_generator(ring: Ring, a) -> np.ndarray:
    """Generator of the rank-1 kernel of a surjective n x (n+1) matrix.

    The result w satisfies A w = 0 exactly and has nonzero residue, so it
    is unimodular and spans the kernel summand.
    """
    a = ring.matrix(a)
    if a.shape[1] != a.shape[0] + 1:
        raise ValueError(f"expected an n x (n+1) matrix, got {a.shape}")
    ker = unit_pivot_nullspace(ring, a)
    assert ker.shape[0] == 1
    w = ker[0]
    assert not (a @ w % ring.modulus).any()
    return w


def solve_columns(ring: Ring, a, b):
    """Solve a x = b for a tall matrix with full residue column rank.

    Returns the unique solution, or None when b is not an exact
    combination of the columns.  Raises NotSurjective if the columns are
    residue-dependent (no unit pivot for some column).
    """
    a = ring.matrix(a)
    b = ring.vector(b)
    rows, cols = a.shape
    if b.shape != (rows,):
        raise ValueError("right-hand side has the wrong length")
    aug = np.hstack([a, b[:, None]])
    m = ring.modulus
    pivots = []
    r = 0
    for c in range(cols):
        cand = next((i for i in range(r, rows) if ring.is_unit(aug[i, c])), None)
        if cand is None:
            raise NotSurjective("columns are dependent over the residue field")
        if cand != r:
            aug[[r, cand]] = aug[[cand, r]]
        aug[r] = aug[r] * ring.inverse(aug[r, c]) % m
        for i in range(rows):
            if i != r and aug[i, c]:
                aug[i] = (aug[i] - aug[i, c] * aug[r]) % m
        pivots.append((r, c))
        r += 1
    if aug[r:, cols].any():
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in pivots:
        x[c] = aug[i, cols]
    return x


def certify_free_summand(ring: Ring, rows) -> FreeSummand:
    """Check that rows span a free direct summand (independent residues)."""
    a = ring.matrix(np.atleast_2d(np.asarray(rows, dtype=np.int64)))
    if residue_rank(ring, a) != a.shape[0]:
        raise NotASummand("residue rows are dependent over F_p")
    a.setflags(write=False)
    return FreeSummand(ring, a.shape[1], a)


def complement_rows(summand: FreeSummand) -> np.ndarray:
    """Rows completing a free summand to a basis of R^n.

    Lifts the standard vectors at the non-pivot columns of the echelonized
    residue; the stacked square matrix has invertible residue, hence is
    invertible over the ring.
    """
    sub = summand.residue_subspace()
    n = summand.ambient_rank
    free = [c for c in range(n) if c not in sub.pivots]
    out = np.zeros((len(free), n), dtype=np.int64)
    for i, c in enumerate(free):
        out[i, c] = 1
    full = np.vstack([summand.basis, out])
    assert is_invertible_matrix(summand.ring, full)
    return out
