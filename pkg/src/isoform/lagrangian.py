"""Maximal isotropic subspaces meeting a fixed subspace in rank one.

Two layers of the same construction.  Over F_p: inside a hyperbolic space
of rank 2n, find a totally isotropic n-dimensional W with
dim(W meet P) = 1 for a given non-degenerate (n+1)-dimensional P.  Over
Z/p^k: transport the residue solution along a lifted isometry to a free
totally isotropic direct summand W, then extract the unimodular isotropic
generator of W meet N as the kernel of the projection N -> M/W.

The field-layer search is randomized (the meet-1 locus is dense, so
random isometry translates of the standard Lagrangian hit it quickly)
with an exhaustive-enumeration fallback for small fields; exhaustion
without a hit raises Exhausted carrying the full meet-dimension census.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import census as _census
from .errors import Degenerate, Exhausted, NotHyperbolic, NotIsotropic, WrongDimension
from .linalg import (
    FreeSummand,
    Subspace,
    certify_free_summand,
    echelonize,
    intersect,
    is_invertible_matrix,
    kernel_generator,
    rank,
    solve_columns,
    solve_unit_pivot,
)
from .quadform import GramForm
from .ring import Ring
from .witt import (
    HyperbolicBasis,
    Isometry,
    lift_isometry,
    random_isometry,
    witt_decompose,
    witt_decompose_local,
)

RANDOM_ATTEMPTS_PER_RANK = 64
ENUMERATION_BUDGET = 2_000_000


@dataclass(frozen=True)
class LagrangianResult:
    """A maximal totally isotropic W with rank-1 meet and its generator."""

    W: Subspace | FreeSummand
    meet_dim: int
    generator: np.ndarray


def _maximal_isotropic_count(p: int, n: int) -> int:
    """Number of maximal totally isotropic subspaces of a hyperbolic space
    of rank 2n over F_p."""
    out = 2
    for i in range(1, n):
        out *= p**i + 1
    return out


def complete_hyperbolic_dual(q: GramForm, w) -> HyperbolicBasis:
    """Complete a maximal totally isotropic basis to a hyperbolic basis.

    Dual vectors come from solving (W G) g_j = e_j, then a hyperbolic
    Gram-Schmidt correction inside W keeps B(w_i, f_j) = delta_ij while
    making the f_j isotropic and mutually orthogonal.  Works verbatim over
    F_p and over Z/p^k.
    """
    ring = q.ring
    m = ring.modulus
    rows = ring.matrix(w.basis if isinstance(w, (Subspace, FreeSummand)) else w)
    n = rows.shape[0]
    if q.n != 2 * n or rows.shape[1] != q.n:
        raise WrongDimension(f"need rank {q.n // 2} in ambient rank {q.n}, got {rows.shape}")
    if (rows @ q.gram @ rows.T % m).any():
        raise NotIsotropic("subspace is not totally isotropic")
    duals = solve_unit_pivot(ring, rows @ q.gram % m, np.eye(n, dtype=np.int64))
    half = ring.inverse(2)
    f_rows = np.zeros_like(rows)
    for j in range(n):
        h = duals[:, j].copy()
        for l in range(j):
            coeff = int(f_rows[l] @ q.gram @ h % m)
            h = (h - coeff * rows[l]) % m
        t = ring.mul(q.quad(h), half)
        f_rows[j] = (h - t * rows[j]) % m
    basis = HyperbolicBasis(ring, rows, f_rows)
    basis.validate(q)
    return basis


def _check_meeting_inputs(q: GramForm, p_dim: int, p_rows) -> int:
    if q.n % 2 != 0:
        raise WrongDimension("ambient rank must be even")
    n = q.n // 2
    if p_dim != n + 1:
        raise WrongDimension(f"P must have dimension {n + 1}, got {p_dim}")
    if not q.restrict(p_rows).is_nondegenerate():
        raise Degenerate("restriction of Q to P is degenerate")
    return n


def find_meeting_lagrangian(q: GramForm, p_sub: Subspace, seed: int = 0) -> LagrangianResult:
    """Find W totally isotropic of dimension n with dim(W meet P) = 1.

    Randomized orbit search from the standard Lagrangian, then exhaustive
    enumeration when the field is small enough to list every maximal
    isotropic subspace.  Raises Exhausted (with the meet census) if the
    enumeration proves no such W exists over this field.
    """
    ring = q.ring
    if ring.kind != "fp":
        raise ValueError("field-layer search requires a prime field")
    n = _check_meeting_inputs(q, p_sub.dim, p_sub.basis)
    dec = witt_decompose(q, seed=seed)
    if not dec.is_hyperbolic:
        raise NotHyperbolic("Q must be hyperbolic")
    e_rows = dec.basis.e_rows
    p = ring.p

    rng = np.random.default_rng(seed)
    for _ in range(RANDOM_ATTEMPTS_PER_RANK * n):
        iso = random_isometry(q, rng)
        w = echelonize(ring, e_rows @ iso.matrix.T % p)
        meet = intersect(w, p_sub)
        if meet.dim == 1:
            return LagrangianResult(w, 1, meet.basis[0].copy())

    if _maximal_isotropic_count(p, n) > ENUMERATION_BUDGET:
        raise Exhausted(
            f"randomized search failed and enumeration over {ring} at rank {2 * n} "
            "exceeds the budget"
        )
    meet_census: dict[int, int] = {}
    hit = None
    for w in _census.enumerate_isotropic_subspaces(q, n):
        d = w.dim + p_sub.dim - rank(ring, np.vstack([w.basis, p_sub.basis]))
        meet_census[d] = meet_census.get(d, 0) + 1
        if d == 1 and hit is None:
            hit = w
    if hit is None:
        raise Exhausted(
            f"no maximal isotropic subspace meets P in dimension 1 over {ring}",
            census=meet_census,
        )
    meet = intersect(hit, p_sub)
    return LagrangianResult(hit, 1, meet.basis[0].copy())


def lift_meeting_lagrangian(q: GramForm, n_summand: FreeSummand, seed: int = 0) -> LagrangianResult:
    """Lift the meeting-Lagrangian construction to Z/p^k.

    Pipeline: exact hyperbolic basis of (M, Q); residue-layer search for a
    meeting Lagrangian; frame change sending the standard residue
    Lagrangian onto it; reflection-factorized lift of that isometry; the
    transported W is an exact totally isotropic free summand, and the
    kernel generator of N -> M/W is the unimodular isotropic element of
    W meet N.
    """
    ring = q.ring
    m = ring.modulus
    n = _check_meeting_inputs(q, n_summand.rank, n_summand.basis)

    dec = witt_decompose_local(q, seed=seed)
    if not dec.is_hyperbolic:
        raise NotHyperbolic("the residue form must be hyperbolic")

    qbar = q.residue()
    fbar = ring.residue_ring
    pbar = echelonize(fbar, n_summand.basis % ring.p)
    res = find_meeting_lagrangian(qbar, pbar, seed=seed)

    # frame change over the residue field: columns (e | f) -> (w | f')
    dual = complete_hyperbolic_dual(qbar, res.W)
    frame_std = np.hstack([(dec.basis.e_rows % ring.p).T, (dec.basis.f_rows % ring.p).T])
    frame_new = np.hstack([dual.e_rows.T, dual.f_rows.T])
    abar_mat = frame_new @ solve_unit_pivot(fbar, frame_std, np.eye(2 * n, dtype=np.int64)) % ring.p
    abar = Isometry(qbar, abar_mat)
    assert np.array_equal(abar.matrix @ (dec.basis.e_rows % ring.p).T % ring.p, dual.e_rows.T)

    lifted = lift_isometry(abar, q)
    w_rows = dec.basis.e_rows @ lifted.matrix.T % m
    assert not (w_rows @ q.gram @ w_rows.T % m).any(), "transported W must be exactly isotropic"
    w_summand = certify_free_summand(ring, w_rows)
    assert w_summand.residue_subspace() == res.W

    # coordinates along W + lifted complement; the last n are the M/W part
    comp = np.zeros((n, 2 * n), dtype=np.int64)
    free_cols = [c for c in range(2 * n) if c not in res.W.pivots]
    for i, c in enumerate(free_cols):
        comp[i, c] = 1
    frame = np.vstack([w_rows, comp])
    assert is_invertible_matrix(ring, frame)
    coords = solve_unit_pivot(ring, frame.T, n_summand.basis.T)
    proj = coords[n:, :]

    cvec = kernel_generator(ring, proj)
    gen = cvec @ n_summand.basis % m
    assert q.quad(gen) == 0
    assert any(ring.is_unit(x) for x in gen), "generator must be unimodular"
    gen_coords = solve_unit_pivot(ring, frame.T, gen)
    assert not gen_coords[n:].any(), "generator must lie in W"
    return LagrangianResult(w_summand, 1, gen)


def result_certificates(q: GramForm, n_summand: FreeSummand | None, result: LagrangianResult) -> dict:
    """Recompute every postcondition of a meeting-Lagrangian result."""
    ring = q.ring
    m = ring.modulus
    rows = ring.matrix(result.W.basis)
    gen = ring.vector(result.generator)
    cert = {
        "totally_isotropic": not bool((rows @ q.gram @ rows.T % m).any()),
        "rank": int(rows.shape[0]),
        "residue_rows_independent": rank(ring.residue_ring, rows % ring.p) == rows.shape[0],
        "meet_dim": result.meet_dim,
        "generator_isotropic": q.quad(gen) == 0,
        "generator_unimodular": bool(any(ring.is_unit(x) for x in gen)),
    }
    if n_summand is not None:
        cert["generator_in_n"] = solve_columns(ring, n_summand.basis.T, gen) is not None
        wbar = echelonize(ring.residue_ring, rows % ring.p)
        nbar = echelonize(ring.residue_ring, n_summand.basis % ring.p)
        cert["residue_meet_dim"] = intersect(wbar, nbar).dim
    return cert
