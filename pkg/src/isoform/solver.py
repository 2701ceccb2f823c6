"""Solving Q = c for a Pfister form Q over F_p or Z/p^k.

The pipeline behind ``solve_pfister``: adjoin the target as one more
Pfister slot, so the rank doubles and the new form restricted to the
leading window carries the diagonal (q_1, ..., q_N, -c); decide
hyperbolicity of its residue form by Witt decomposition; when hyperbolic,
run the meeting-Lagrangian construction to produce a unimodular isotropic
vector supported in that window; then trade the homogeneous solution for
an affine one by a reflection that makes the last coordinate a unit.

Every "solved" verdict re-evaluates its witness exactly before being
returned.  A "no_solution" verdict carries the residue Witt transcript.
Geometric search failures surface as the distinguished verdict
"inconclusive", never as "no_solution".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._grid import quad_values, vector_chunks
from .errors import Exhausted, NoDeflection, PreconditionViolated
from .lagrangian import lift_meeting_lagrangian
from .linalg import certify_free_summand
from .quadform import GramForm, PfisterSpec, pfister_expand
from .ring import Ring, sqrt_unit
from .witt import witt_decompose

PIPELINE_RETRIES = 8
EXHAUSTIVE_BUDGET = 2_000_000

SOLVED = "solved"
NO_SOLUTION = "no_solution"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class RepresentationProblem:
    """Represent the unit c by the Pfister form defined by spec."""

    spec: PfisterSpec
    c: int

    def __post_init__(self):
        c = self.ring.normalize(self.c)
        if not self.ring.is_unit(c):
            raise ValueError(f"target {c} must be a unit in {self.ring}")
        object.__setattr__(self, "c", c)

    @property
    def ring(self) -> Ring:
        return self.spec.ring


@dataclass(frozen=True)
class SolutionCertificate:
    verdict: str
    witness: np.ndarray | None
    trace: tuple = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": None if self.witness is None else [int(x) for x in self.witness],
            "trace": [dict(t) for t in self.trace],
        }


def affine_to_isotropic(ring: Ring, alphas, sol) -> np.ndarray:
    """Append a unit 1: a solution of sum a_i t_i^2 = -a_n (i < n) becomes
    a unimodular zero of the full diagonal form."""
    alphas = ring.vector(alphas)
    if alphas.shape[0] <= 2:
        raise PreconditionViolated("the diagonal form must have more than two slots")
    if not all(ring.is_unit(a) for a in alphas):
        raise PreconditionViolated("diagonal entries must be units")
    sol = ring.vector(sol)
    if sol.shape[0] != alphas.shape[0] - 1:
        raise PreconditionViolated("solution vector has the wrong length")
    lhs = int(alphas[:-1] @ (sol * sol) % ring.modulus)
    if lhs != ring.neg(alphas[-1]):
        raise PreconditionViolated(f"input does not solve the affine equation (got {lhs})")
    return np.append(sol, 1)


def isotropic_to_affine(ring: Ring, alphas, v, seed: int = 0) -> np.ndarray:
    """From a unimodular zero of the diagonal form, solve the affine slice.

    If the last coordinate is already a unit, divide by it.  Otherwise
    reflect: a vector u supported on two earlier indices and the last one
    (with last coordinate 1) moves v to another zero whose last coordinate
    is a unit, provided B(u, v) and Q(u) are units; the residue pair (x, y)
    satisfying both conditions is found by exhaustive search over F_p^2.
    """
    alphas = ring.vector(alphas)
    n = alphas.shape[0]
    if n <= 2:
        raise PreconditionViolated("the diagonal form must have more than two slots")
    if not all(ring.is_unit(a) for a in alphas):
        raise PreconditionViolated("diagonal entries must be units")
    v = ring.vector(v)
    if v.shape[0] != n:
        raise PreconditionViolated("vector length does not match the diagonal")
    if int(alphas @ (v * v) % ring.modulus) != 0:
        raise PreconditionViolated("vector is not a zero of the diagonal form")
    if not any(ring.is_unit(x) for x in v):
        raise PreconditionViolated("vector must be unimodular")
    m = ring.modulus

    def divide_out(vec):
        inv = ring.inverse(vec[-1])
        return vec[:-1] * inv % m

    if ring.is_unit(v[-1]):
        return divide_out(v)

    p = ring.p
    units_i = [i for i in range(n - 1) if ring.is_unit(v[i])]
    for i in units_i:
        for jj in range(n - 1):
            if jj == i:
                continue
            ai, aj, an = int(alphas[i]), int(alphas[jj]), int(alphas[-1])
            vi, vj = int(v[i]), int(v[jj])
            for x in range(p):
                for y in range(p):
                    if (ai * vi * x + aj * vj * y) % p == 0:
                        continue
                    if (ai * x * x + aj * y * y + an) % p == 0:
                        continue
                    u = np.zeros(n, dtype=np.int64)
                    u[i], u[jj], u[-1] = x, y, 1
                    norm = int(alphas @ (u * u) % m)
                    pairing = int(alphas @ (u * v) % m)
                    step = ring.mul(2, ring.mul(pairing, ring.inverse(norm)))
                    moved = (v - step * u) % m
                    assert int(alphas @ (moved * moved) % m) == 0
                    assert ring.is_unit(moved[-1])
                    return divide_out(moved)
    raise NoDeflection(
        f"no reflection direction over {ring} for diagonal {tuple(int(a) for a in alphas)} "
        f"and vector {tuple(int(x) for x in v)}"
    )


def _verify_witness(q_form: GramForm, witness, c: int) -> None:
    value = q_form.quad(witness)
    assert value == c, f"witness evaluates to {value}, expected {c}"


def solve_pfister(problem: RepresentationProblem, seed: int = 0,
                  use_fast_paths: bool = True) -> SolutionCertificate:
    """Decide and witness solvability of Q = c; see the module docstring."""
    ring = problem.ring
    spec = problem.spec
    c = problem.c
    q_form = pfister_expand(spec)
    diag = q_form.diagonal()
    trace: list[dict] = []

    if use_fast_paths:
        if c == 1:
            witness = np.zeros(q_form.n, dtype=np.int64)
            witness[0] = 1
            trace.append({"stage": "fast_path", "kind": "unit_target"})
            _verify_witness(q_form, witness, c)
            return SolutionCertificate(SOLVED, witness, tuple(trace))
        for idx, entry in enumerate(diag):
            root = sqrt_unit(ring, ring.mul(c, ring.inverse(entry)))
            if root is not None:
                witness = np.zeros(q_form.n, dtype=np.int64)
                witness[idx] = root
                trace.append({"stage": "fast_path", "kind": "square_slot", "slot": idx})
                _verify_witness(q_form, witness, c)
                return SolutionCertificate(SOLVED, witness, tuple(trace))

    # doubled form: slots + (c,) puts <1,-c> outermost, i.e. diag(Q, -c Q)
    doubled = pfister_expand(PfisterSpec(ring, spec.slots + (c,)))
    alphas = diag + (ring.neg(c),)
    window = q_form.n + 1

    residue_dec = witt_decompose(doubled.residue(), seed=seed)
    trace.append(
        {
            "stage": "residue_witt",
            "index": residue_dec.index,
            "anisotropic_rank": residue_dec.anisotropic.n,
            "anisotropic_diagonal": [int(x) for x in np.diagonal(residue_dec.anisotropic.gram)],
        }
    )
    if not residue_dec.is_hyperbolic:
        return SolutionCertificate(NO_SOLUTION, None, tuple(trace))

    n_rows = np.zeros((window, doubled.n), dtype=np.int64)
    n_rows[np.arange(window), np.arange(window)] = 1
    n_summand = certify_free_summand(ring, n_rows)

    failures = []
    for attempt in range(PIPELINE_RETRIES):
        try:
            result = lift_meeting_lagrangian(q=doubled, n_summand=n_summand,
                                             seed=seed + 1009 * attempt)
            gen = result.generator
            assert not gen[window:].any(), "generator must be supported in the leading window"
            reduced = isotropic_to_affine(ring, alphas, gen[:window], seed=seed)
            _verify_witness(q_form, reduced, c)
            trace.append({"stage": "geometry", "attempt": attempt, "meet_dim": result.meet_dim})
            return SolutionCertificate(SOLVED, reduced, tuple(trace))
        except (Exhausted, NoDeflection) as exc:
            failures.append({"attempt": attempt, "error": type(exc).__name__, "detail": str(exc)})
    trace.append({"stage": "geometry_failed", "failures": failures})
    return SolutionCertificate(INCONCLUSIVE, None, tuple(trace))


def exhaustive_value_set(spec: PfisterSpec) -> set[int]:
    """All unit values attained by the expanded form over F_p, by scanning
    every vector; the independent oracle for solver verdicts at k = 1."""
    ring = spec.ring
    if ring.kind != "fp":
        raise ValueError("exhaustive scan runs over a prime field")
    q_form = pfister_expand(spec)
    p, n = ring.p, q_form.n
    if p**n > EXHAUSTIVE_BUDGET:
        raise ValueError(f"scan of {p}^{n} vectors exceeds the budget")
    values: set[int] = set()
    for _, block in vector_chunks(p, n):
        values.update(int(t) for t in np.unique(quad_values(q_form.gram, p, block)))
    return {t for t in values if t % p != 0}


@dataclass
class GroupLawReport:
    """Outcome of value-set group-law checks for one Pfister form."""

    ring: Ring
    slots: tuple[int, ...]
    exhaustive_checked: bool = False
    exhaustive_group: bool = False
    value_set_size: int = 0
    trials: int = 0
    closure_checked: int = 0
    inverse_checked: int = 0
    inconclusive: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "pfister": list(self.slots),
            "exhaustive_checked": self.exhaustive_checked,
            "exhaustive_group": self.exhaustive_group,
            "value_set_size": self.value_set_size,
            "trials": self.trials,
            "closure_checked": self.closure_checked,
            "inverse_checked": self.inverse_checked,
            "inconclusive": self.inconclusive,
            "violations": self.violations,
        }


def check_group_law(spec: PfisterSpec, trials: int, seed: int = 0) -> GroupLawReport:
    """Verify that the represented units form a multiplicative group.

    Over a prime field small enough to scan, the value set is computed
    exhaustively and the subgroup axioms are checked on the full table.
    Randomized trials then drive the solver: products of representable
    units must be representable, and inverses are verified through the
    explicit witness c^{-1} v, whose value is c^{-2} Q(v) = c^{-1}.
    """
    ring = spec.ring
    report = GroupLawReport(ring, spec.slots)
    q_form = pfister_expand(spec)

    if ring.kind == "fp" and ring.p ** q_form.n <= EXHAUSTIVE_BUDGET:
        values = exhaustive_value_set(spec)
        report.exhaustive_checked = True
        report.value_set_size = len(values)
        ok = (
            1 in values
            and all(ring.inverse(a) in values for a in values)
            and all(ring.mul(a, b) in values for a in values for b in values)
        )
        report.exhaustive_group = ok
        if not ok:
            report.violations.append({"kind": "exhaustive_subgroup", "values": sorted(values)})

    if q_form.quad(np.eye(q_form.n, dtype=np.int64)[0]) != 1:
        report.violations.append({"kind": "identity", "detail": "Q(e_1) != 1"})

    rng = np.random.default_rng(seed)
    units = ring.units()
    for t in range(trials):
        c1 = int(units[rng.integers(len(units))])
        c2 = int(units[rng.integers(len(units))])
        res1 = solve_pfister(RepresentationProblem(spec, c1), seed=seed + 3 * t)
        res2 = solve_pfister(RepresentationProblem(spec, c2), seed=seed + 3 * t + 1)
        if res1.verdict == INCONCLUSIVE or res2.verdict == INCONCLUSIVE:
            report.inconclusive += 1
            continue
        if res1.verdict != SOLVED or res2.verdict != SOLVED:
            continue
        report.trials += 1
        prod = solve_pfister(RepresentationProblem(spec, ring.mul(c1, c2)), seed=seed + 3 * t + 2)
        if prod.verdict == NO_SOLUTION:
            report.violations.append({"kind": "closure", "c1": c1, "c2": c2})
        elif prod.verdict == INCONCLUSIVE:
            report.inconclusive += 1
        else:
            report.closure_checked += 1
        inv_witness = ring.inverse(c1) * res1.witness % ring.modulus
        if q_form.quad(inv_witness) == ring.inverse(c1):
            report.inverse_checked += 1
        else:
            report.violations.append({"kind": "inverse_witness", "c": c1})
    return report
