"""Censuses of flag varieties and isotropic Grassmannians over small F_p.

Counting follows the fibration structure of the varieties: complete flags
are counted by the chain of line choices in successive quotients;
isotropic flags by the chain of isotropic-line counts in successive
2-step reductions v-perp/v; single isotropic subspaces by dividing out
the internal flag count.  Full enumeration backs the base cases and the
stratum partitions, and exists independently so the recursion can be
cross-checked against it.

Point counts are a desk-scale shadow of dimension: for polynomially
counted families the degree in q of the count equals the dimension, and
``fit_degree`` recovers that degree from counts at two or three primes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._grid import quad_values, vector_chunks
from .errors import BudgetExceeded, Degenerate, OutOfRange, WrongDimension
from .linalg import Subspace, rank
from .quadform import GramForm, direct_sum, from_diagonal, hyperbolic_space
from .ring import Ring, fp
from .witt import find_isotropic_vector, split_hyperbolic

GRID_BUDGET = 20_000_000

FAMILIES = ("x", "x_iso", "y_iso")


def _family(name: str) -> str:
    key = name.lower().replace("-", "_")
    if key in FAMILIES or key == "z_strata":
        return key
    raise OutOfRange(f"unknown family {name!r}")


def predicted_dimension(family: str, n: int, j: int) -> int:
    """Closed-form dimension of the family member at (ambient n, length j)."""
    fam = _family(family)
    if n < 1 or j < 1:
        raise OutOfRange(f"need n, j >= 1, got n={n}, j={j}")
    if fam == "x":
        if j > n:
            raise OutOfRange(f"flag length {j} exceeds ambient dimension {n}")
        return n * j - j * (j + 1) // 2
    if j > n // 2:
        raise OutOfRange(f"isotropic length {j} exceeds floor(n/2) = {n // 2}")
    if fam == "x_iso":
        return n * j - j * (j + 1)
    if fam == "y_iso":
        return n * j - j * (j + 1) - j * (j - 1) // 2
    raise OutOfRange("z_strata has no single predicted dimension")


def split_gram(p: int, n: int) -> GramForm:
    """The split form of rank n over F_p: hyperbolic planes plus <1> if odd."""
    ring = fp(p)
    form = hyperbolic_space(ring, n // 2)
    if n % 2:
        form = direct_sum(form, from_diagonal(ring, [1]))
    return form


def flag_chain(n: int, j: int, q: int) -> int:
    """Number of complete flags of length j in F_q^n: the chain of line
    counts in successive quotients."""
    count = 1
    for i in range(j):
        count *= (q ** (n - i) - 1) // (q - 1)
    return count


def _check_grid_budget(q: int, n: int) -> None:
    if q**n > GRID_BUDGET:
        raise BudgetExceeded(f"enumerating {q}^{n} vectors exceeds the budget")


def isotropic_vector_count(q_form: GramForm) -> int:
    """Number of nonzero isotropic vectors, by exhaustive evaluation."""
    p, n = q_form.ring.p, q_form.n
    if n == 0:
        return 0
    _check_grid_budget(p, n)
    total = 0
    for start, block in vector_chunks(p, n):
        vals = quad_values(q_form.gram, p, block)
        total += int(np.count_nonzero(vals == 0))
    return total - 1  # drop the zero vector


def isotropic_line_count(q_form: GramForm) -> int:
    return isotropic_vector_count(q_form) // (q_form.ring.p - 1)


def _reduction_chain(q_form: GramForm, steps: int, seed: int = 0) -> list[int]:
    """Isotropic-line counts of Q, then of v-perp/v, and so on.

    Witt's theorem makes each count independent of the chosen vector, so
    this is the fiber-count sequence of the isotropic flag tower.
    """
    counts = []
    current = q_form
    for _ in range(steps):
        c = isotropic_line_count(current)
        counts.append(c)
        if c == 0:
            break
        v = find_isotropic_vector(current, seed=seed)
        _, _, comp = split_hyperbolic(current, v)
        current = current.restrict(comp)
    return counts


def count_flags(family: str, n: int, j: int, q: int, q_form: GramForm | None = None,
                p_sub: Subspace | None = None, seed: int = 0):
    """Exact count of the family member over F_q.

    For "x" this is the quotient-line chain product; for "x_iso" the
    product of isotropic-line fiber counts; for "y_iso" the isotropic flag
    count divided by the number of internal flags; for "z_strata" the full
    partition of the maximal isotropic subspaces by meet dimension with
    the supplied subspace.
    """
    fam = _family(family)
    if fam == "x":
        if not 1 <= j <= n:
            raise OutOfRange(f"flag length {j} out of range for dimension {n}")
        return flag_chain(n, j, q)

    if q_form is None:
        q_form = split_gram(q, n)
    if q_form.n != n or q_form.ring.p != q:
        raise WrongDimension("supplied form does not match (n, q)")
    if not q_form.is_nondegenerate():
        raise Degenerate("census forms must be non-degenerate")

    if fam == "z_strata":
        if p_sub is None:
            raise ValueError("z_strata needs the subspace P")
        return z_strata(q_form, p_sub)

    if not 1 <= j <= n // 2:
        raise OutOfRange(f"isotropic length {j} exceeds floor(n/2) = {n // 2}")
    fibers = _reduction_chain(q_form, j, seed=seed)
    count = 1
    for c in fibers:
        count *= c
    if len(fibers) < j:
        count = 0
    if fam == "x_iso":
        return count
    internal = flag_chain(j, j - 1, q)
    assert count % internal == 0
    return count // internal


# -- explicit enumeration ---------------------------------------------------------

_LEVEL_CACHE: dict = {}


def _iso_line_reps(q_form: GramForm) -> np.ndarray:
    """Canonical representatives (first nonzero coordinate 1) of all
    isotropic lines, in code order."""
    p, n = q_form.ring.p, q_form.n
    _check_grid_budget(p, n)
    found = []
    for start, block in vector_chunks(p, n):
        vals = quad_values(q_form.gram, p, block)
        nonzero = block.any(axis=1)
        lead = np.take_along_axis(
            block, np.argmax(block != 0, axis=1)[:, None], axis=1
        )[:, 0]
        mask = (vals == 0) & nonzero & (lead == 1)
        if mask.any():
            found.append(block[mask])
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    return np.vstack(found)


def _iso_levels(q_form: GramForm, j: int) -> list:
    """Level r of the cache lists every totally isotropic r-dimensional
    subspace as a canonical (rows, pivots) pair, sorted.

    Extension uses the unique-parent rule: the parent of an echelon basis
    is the basis minus its last pivot row, so a candidate line extends a
    base only when its reduced pivot lies beyond every base pivot in a
    column the base does not touch.  Each subspace is then produced from
    exactly one base, and the extension test vectorizes over all
    candidate lines at once.
    """
    p = q_form.ring.p
    base_key = (p, q_form.n, q_form.gram.tobytes())
    if (*base_key, j) in _LEVEL_CACHE:
        return _LEVEL_CACHE[(*base_key, j)]
    reps = _iso_line_reps(q_form)
    level = sorted(
        ((tuple(int(x) for x in row),), (int(np.argmax(row != 0)),)) for row in reps
    )
    _LEVEL_CACHE[(*base_key, 1)] = level
    pairing_all = reps @ q_form.gram % p
    inv = [0] + [pow(x, -1, p) for x in range(1, p)]
    for r in range(2, j + 1):
        if (*base_key, r) in _LEVEL_CACHE:
            level = _LEVEL_CACHE[(*base_key, r)]
            continue
        seen = set()
        out = []
        for rows, pivots in level:
            basis = np.array(rows, dtype=np.int64)
            ortho = ~(pairing_all @ basis.T % p).any(axis=1)
            cand = reps[ortho]
            reduced = (cand - cand[:, list(pivots)] @ basis) % p
            nonzero = reduced != 0
            lead = np.argmax(nonzero, axis=1)
            col_free = ~basis.any(axis=0)
            accept = nonzero.any(axis=1) & (lead > pivots[-1]) & col_free[lead]
            for vec, l in zip(reduced[accept], lead[accept]):
                row = tuple(int(x) * inv[int(vec[l])] % p for x in vec)
                new_rows = rows + (row,)
                if new_rows not in seen:
                    seen.add(new_rows)
                    out.append((new_rows, pivots + (int(l),)))
        level = sorted(out)
        _LEVEL_CACHE[(*base_key, r)] = level
    return _LEVEL_CACHE[(*base_key, j)]


def enumerate_isotropic_subspaces(q_form: GramForm, j: int):
    """Yield every totally isotropic j-dimensional subspace exactly once,
    echelonized, in a deterministic order."""
    if q_form.ring.kind != "fp":
        raise ValueError("enumeration runs over a prime field")
    if not q_form.is_nondegenerate():
        raise Degenerate("enumeration requires a non-degenerate form")
    if j < 1 or j > q_form.n:
        raise OutOfRange(f"subspace dimension {j} out of range")
    ring = q_form.ring
    for rows, pivots in _iso_levels(q_form, j):
        basis = np.array(rows, dtype=np.int64)
        basis.setflags(write=False)
        yield Subspace(ring, q_form.n, basis, pivots)


def z_strata(q_form: GramForm, p_sub: Subspace) -> dict[int, int]:
    """Partition the maximal isotropic subspaces by dim(W meet P)."""
    if q_form.n % 2:
        raise WrongDimension("ambient rank must be even")
    n = q_form.n // 2
    if p_sub.dim != n + 1:
        raise WrongDimension(f"P must have dimension {n + 1}")
    if not q_form.restrict(p_sub.basis).is_nondegenerate():
        raise Degenerate("restriction of Q to P is degenerate")
    ring = q_form.ring
    partition: dict[int, int] = {}
    for w in enumerate_isotropic_subspaces(q_form, n):
        d = w.dim + p_sub.dim - rank(ring, np.vstack([w.basis, p_sub.basis]))
        partition[d] = partition.get(d, 0) + 1
    return dict(sorted(partition.items()))


# -- degree fitting ----------------------------------------------------------------

FIT_TOLERANCE = 0.35


def fit_degree(counts: dict[int, int]):
    """Integer degree of the count as a polynomial in q, or None.

    With three or more primes, fits ln(count) = d ln q + a + b/q on the
    three largest primes (the 1/q term absorbs the drift of the
    non-leading coefficients); with two, uses the slope.  The fit is
    accepted only when the solved d is within 0.35 of an integer, which a
    degree error of one always violates.
    """
    pts = sorted((int(q), int(c)) for q, c in counts.items())
    if len(pts) < 2 or any(c <= 0 for _, c in pts):
        return None
    pts = pts[-3:]
    logs = [(np.log(q), np.log(c), 1.0 / q) for q, c in pts]
    if len(pts) == 2:
        d = (logs[1][1] - logs[0][1]) / (logs[1][0] - logs[0][0])
    else:
        a = np.array([[lq, 1.0, iq] for lq, _, iq in logs])
        rhs = np.array([lc for _, lc, _ in logs])
        d = float(np.linalg.solve(a, rhs)[0])
    rounded = round(d)
    if abs(d - rounded) > FIT_TOLERANCE:
        return None
    return int(rounded)


@dataclass(frozen=True)
class CensusReport:
    family: str
    n: int
    j: int
    counts: dict[int, int]
    predicted_dim: int
    fitted_degree: int | None

    def csv_rows(self) -> list[str]:
        fitted = "insufficient" if self.fitted_degree is None else str(self.fitted_degree)
        return [
            f"{self.family},{self.n},{self.j},{q},{self.counts[q]},{self.predicted_dim},{fitted}"
            for q in sorted(self.counts)
        ]


def build_census(family: str, n: int, j: int, primes, seed: int = 0) -> CensusReport:
    fam = _family(family)
    counts = {int(q): count_flags(fam, n, j, int(q), seed=seed) for q in primes}
    return CensusReport(fam, n, j, counts, predicted_dimension(fam, n, j), fit_degree(counts))
