"""Acceptance suite: one runner per criterion, shared by pytest and the CLI.

Each runner draws its own seeded generators, so results are reproducible,
and returns a CriterionOutcome; ``run`` executes all of them at the
requested budget and prints one pass/fail line per criterion.  The
"quick" budget shrinks instance counts and prime sets to stay under a
minute; "full" runs the complete parameter sweeps.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from . import census as census_mod
from .errors import Exhausted, NoDeflection
from .lagrangian import lift_meeting_lagrangian, result_certificates
from .linalg import certify_free_summand, echelonize, is_invertible_matrix, rank
from .quadform import GramForm, PfisterSpec, hyperbolic_space, pfister_expand
from .ring import Ring, fp, sqrt_unit, zpk
from .solver import (
    INCONCLUSIVE,
    NO_SOLUTION,
    SOLVED,
    RepresentationProblem,
    affine_to_isotropic,
    check_group_law,
    exhaustive_value_set,
    isotropic_to_affine,
    solve_pfister,
)
from .witt import Isometry, cartan_dieudonne, compose_reflections, lift_isometry, random_isometry


@dataclass
class CriterionOutcome:
    key: str
    label: str
    passed: bool
    details: str


# -- shared random generators -------------------------------------------------


def _random_invertible(ring: Ring, n: int, rng) -> np.ndarray:
    while True:
        t = rng.integers(0, ring.modulus, size=(n, n), dtype=np.int64)
        if is_invertible_matrix(ring, t):
            return t


def _random_hyperbolic_form(ring: Ring, planes: int, rng) -> GramForm:
    h = hyperbolic_space(ring, planes)
    t = _random_invertible(ring, 2 * planes, rng)
    return GramForm(ring, t.T @ h.gram @ t % ring.modulus)


def _random_nondeg_summand(q_form: GramForm, rows: int, rng):
    ring = q_form.ring
    while True:
        cand = rng.integers(0, ring.modulus, size=(rows, q_form.n), dtype=np.int64)
        if rank(ring.residue_ring, cand % ring.p) != rows:
            continue
        if q_form.restrict(cand).is_nondegenerate():
            return certify_free_summand(ring, cand)


def _random_pfister(ring: Ring, m: int, rng) -> PfisterSpec:
    units = ring.units()
    slots = tuple(int(units[rng.integers(len(units))]) for _ in range(m))
    return PfisterSpec(ring, slots)


# -- criterion 1: dimension formulas ------------------------------------------


def criterion_census_degrees(budget: str = "full") -> CriterionOutcome:
    primes = (3, 5, 7) if budget == "full" else (3, 5)
    max_n = 6 if budget == "full" else 5
    failures = []
    checked = 0
    for n in range(1, max_n + 1):
        for j in range(1, n + 1):
            report = census_mod.build_census("x", n, j, primes)
            chain = {q: _gaussian_chain(n, j, q) for q in primes}
            if report.counts != chain:
                failures.append(f"x({n},{j}) counts {report.counts} != chain {chain}")
            if report.fitted_degree != report.predicted_dim:
                failures.append(
                    f"x({n},{j}) fit {report.fitted_degree} != dim {report.predicted_dim}"
                )
            checked += 1
    for family in ("x_iso", "y_iso"):
        for n in range(2, max_n + 1):
            for j in range(1, n // 2 + 1):
                report = census_mod.build_census(family, n, j, primes)
                if report.fitted_degree != report.predicted_dim:
                    failures.append(
                        f"{family}({n},{j}) counts {report.counts} fit "
                        f"{report.fitted_degree} != dim {report.predicted_dim}"
                    )
                checked += 1
    details = f"{checked} (family, n, j) censuses at primes {primes}"
    if failures:
        details += "; " + "; ".join(failures[:5])
    return CriterionOutcome("census_degrees", "dimension formulas via census degree fits",
                            not failures, details)


def _gaussian_chain(n: int, j: int, q: int) -> int:
    out = 1
    for i in range(j):
        out *= (q ** (n - i) - 1) // (q - 1)
    return out


# -- criterion 2: meet-dimension strata ----------------------------------------


def criterion_strata(budget: str = "full") -> CriterionOutcome:
    primes = (3, 5, 7) if budget == "full" else (3, 5)
    cases = 25 if budget == "full" else 6
    failures = []
    total = 0
    for q in primes:
        ring = fp(q)
        q_form = census_mod.split_gram(q, 6)
        expected_total = census_mod.count_flags("y_iso", 6, 3, q)
        rng = np.random.default_rng(20_000 + q)
        for t in range(cases):
            while True:
                rows = rng.integers(0, q, size=(4, 6), dtype=np.int64)
                p_sub = echelonize(ring, rows)
                if p_sub.dim == 4 and q_form.restrict(p_sub.basis).is_nondegenerate():
                    break
            total += 1
            strata = census_mod.z_strata(q_form, p_sub)
            if sum(strata.values()) != expected_total:
                failures.append(f"q={q} case {t}: strata total {strata} != {expected_total}")
            if strata.get(1, 0) == 0:
                failures.append(f"q={q} case {t}: empty meet-1 stratum, P = {rows.tolist()}")
            if strata.get(2, 0) >= strata.get(1, 0):
                failures.append(f"q={q} case {t}: |Z_2| >= |Z_1| in {strata}")
    details = f"{total} random non-degenerate P over primes {primes}"
    if failures:
        details += "; " + "; ".join(failures[:5])
    return CriterionOutcome("strata", "meet-dimension strata: partition, non-emptiness, strictness",
                            not failures, details)


# -- criterion 3: meeting-Lagrangian pipeline ------------------------------------


def criterion_meeting_pipeline(budget: str = "full") -> CriterionOutcome:
    if budget == "full":
        primes, ks, planes_list, cases = (3, 5, 7), (1, 2, 3), (1, 2, 3), 50
    else:
        primes, ks, planes_list, cases = (3, 5), (1, 2), (1, 2), 4
    failures = []
    exhausted = {p: 0 for p in primes}
    runs = 0
    for p in primes:
        for k in ks:
            ring = zpk(p, k)
            for planes in planes_list:
                rng = np.random.default_rng(30_000 + 97 * p + 17 * k + planes)
                for t in range(cases):
                    q_form = _random_hyperbolic_form(ring, planes, rng)
                    n_summand = _random_nondeg_summand(q_form, planes + 1, rng)
                    runs += 1
                    try:
                        result = lift_meeting_lagrangian(q_form, n_summand,
                                                         seed=int(rng.integers(1 << 30)))
                    except Exhausted:
                        exhausted[p] += 1
                        continue
                    cert = result_certificates(q_form, n_summand, result)
                    checks = (
                        cert["totally_isotropic"]
                        and cert["residue_rows_independent"]
                        and cert["rank"] == planes
                        and cert["generator_isotropic"]
                        and cert["generator_unimodular"]
                        and cert["generator_in_n"]
                        and cert["residue_meet_dim"] == 1
                    )
                    if not checks:
                        failures.append(f"p={p} k={k} 2n={2*planes} case {t}: {cert}")
    for p in primes:
        if p >= 5 and exhausted[p]:
            failures.append(f"{exhausted[p]} exhausted searches at p={p}")
    details = f"{runs} pipeline runs; exhausted counts {exhausted}"
    if failures:
        details += "; " + "; ".join(failures[:5])
    return CriterionOutcome("meeting_pipeline",
                            "isotropic-summand pipeline postconditions over Z/p^k",
                            not failures, details)


# -- criterion 4: solver vs exhaustive search at k = 1 ----------------------------


def criterion_solver_exhaustive(budget: str = "full") -> CriterionOutcome:
    primes = (3, 5)
    folds = (1, 2)
    cases = 20 if budget == "full" else 5
    failures = []
    solves = 0
    for p in primes:
        ring = fp(p)
        for m in folds:
            rng = np.random.default_rng(40_000 + 10 * p + m)
            for t in range(cases):
                spec = _random_pfister(ring, m, rng)
                representable = exhaustive_value_set(spec)
                for c in ring.units():
                    expected = SOLVED if c in representable else NO_SOLUTION
                    for fast in (True, False):
                        cert = solve_pfister(RepresentationProblem(spec, c),
                                             seed=int(rng.integers(1 << 30)),
                                             use_fast_paths=fast)
                        solves += 1
                        if cert.verdict != expected:
                            failures.append(
                                f"p={p} m={m} slots={spec.slots} c={c} fast={fast}: "
                                f"{cert.verdict} != {expected}"
                            )
    details = f"{solves} solver calls (fast paths on and off) against exhaustive scans"
    if failures:
        details += "; " + "; ".join(failures[:5])
    return CriterionOutcome("solver_exhaustive",
                            "solver verdicts match exhaustive search over F_p",
                            not failures, details)


# -- criterion 5: verdict stability across k --------------------------------------


def criterion_solver_hensel(budget: str = "full") -> CriterionOutcome:
    if budget == "full":
        primes, folds, cases = (3, 5, 7), (1, 2, 3), 30
    else:
        primes, folds, cases = (3, 5), (1, 2), 3
    ks = (1, 2, 3, 4)
    failures = []
    groups = 0
    for p in primes:
        for m in folds:
            rng = np.random.default_rng(50_000 + 10 * p + m)
            for t in range(cases):
                base = zpk(p, 1)
                slots = _random_pfister(base, m, rng).slots
                c = int(base.units()[rng.integers(p - 1)])
                verdicts = []
                for k in ks:
                    ring = zpk(p, k)
                    spec = PfisterSpec(ring, slots)
                    cert = solve_pfister(RepresentationProblem(spec, c),
                                         seed=int(rng.integers(1 << 30)))
                    verdicts.append(cert.verdict)
                    if cert.verdict == SOLVED:
                        value = pfister_expand(spec).quad(cert.witness)
                        if value != c:
                            failures.append(f"p={p} m={m} k={k} c={c}: witness value {value}")
                groups += 1
                if len(set(verdicts)) != 1 or INCONCLUSIVE in verdicts:
                    failures.append(f"p={p} m={m} slots={slots} c={c}: verdicts {verdicts}")
    details = f"{groups} (spec, c) groups, each solved at k = {ks}"
    if failures:
        details += "; " + "; ".join(failures[:5])
    return CriterionOutcome("solver_hensel",
                            "solver verdicts stable across k with exact witnesses",
                            not failures, details)


# -- criterion 6: affine/homogeneous round trip ------------------------------------


def _random_affine_instance(ring: Ring, n: int, rng):
    units = ring.units()
    while True:
        alphas = [int(units[rng.integers(len(units))]) for _ in range(n - 1)]
        sol = [int(rng.integers(ring.modulus)) for _ in range(n - 1)]
        last = ring.neg(sum(a * s * s for a, s in zip(alphas, sol)))
        if ring.is_unit(last):
            return np.array(alphas + [last], dtype=np.int64), np.array(sol, dtype=np.int64)


def _random_deflection_instance(ring: Ring, n: int, rng):
    """A unimodular zero of a random diagonal form whose last coordinate is
    a non-unit, so the reduction must reflect."""
    units = ring.units()
    p, mod = ring.p, ring.modulus
    while True:
        alphas = np.array([int(units[rng.integers(len(units))]) for _ in range(n)],
                          dtype=np.int64)
        v = np.zeros(n, dtype=np.int64)
        v[-1] = p * int(rng.integers(mod // p))
        for i in range(n - 2):
            v[i] = int(rng.integers(mod))
        target = (-int(alphas[-1]) * int(v[-1]) ** 2
                  - int(alphas[: n - 2] @ (v[: n - 2] * v[: n - 2]))) % mod
        target = target * ring.inverse(alphas[n - 2]) % mod
        if not ring.is_unit(target):
            continue
        root = sqrt_unit(ring, target)
        if root is None:
            continue
        v[n - 2] = root
        assert int(alphas @ (v * v) % mod) == 0
        return alphas, v


def criterion_affine_roundtrip(budget: str = "full") -> CriterionOutcome:
    total = 500 if budget == "full" else 120
    rng = np.random.default_rng(60_000)
    failures = []
    deflections = []
    done = 0
    while done < total:
        p = (3, 5, 7)[rng.integers(3)]
        k = 1 + int(rng.integers(3))
        n = (3, 4, 5)[rng.integers(3)]
        ring = zpk(p, k)
        try:
            if done % 2 == 0:
                alphas, sol = _random_affine_instance(ring, n, rng)
                vec = affine_to_isotropic(ring, alphas, sol)
                assert int(alphas @ (vec * vec) % ring.modulus) == 0
            else:
                alphas, vec = _random_deflection_instance(ring, n, rng)
            reduced = isotropic_to_affine(ring, alphas, vec, seed=done)
            value = int(alphas[:-1] @ (reduced * reduced) % ring.modulus)
            if value != ring.neg(alphas[-1]):
                failures.append(f"p={p} k={k} n={n}: reduce output value {value}")
        except NoDeflection:
            deflections.append((p, k, n, [int(a) for a in alphas], [int(x) for x in vec]))
            if p != 3:
                failures.append(f"deflection failure at p={p}: {deflections[-1]}")
        done += 1
    details = f"{done} round trips; NoDeflection instances: {deflections or 'none'}"
    if failures:
        details += "; " + "; ".join(str(f) for f in failures[:5])
    return CriterionOutcome("affine_roundtrip",
                            "diagonal-form round trips verified by evaluation",
                            not failures, details)


# -- criterion 7: value sets form groups --------------------------------------------


def criterion_value_group(budget: str = "full") -> CriterionOutcome:
    if budget == "full":
        field_primes, rand_rings, rand_trials = (3, 5, 7, 11), ((3, 2), (5, 2), (7, 2)), 17
    else:
        field_primes, rand_rings, rand_trials = (3, 5), ((3, 2), (5, 2)), 5
    failures = []
    exhaustive_runs = 0
    random_closures = 0
    for p in field_primes:
        for m in (1, 2):
            rng = np.random.default_rng(70_000 + 10 * p + m)
            spec = _random_pfister(fp(p), m, rng)
            report = check_group_law(spec, trials=0)
            exhaustive_runs += 1
            if not (report.exhaustive_checked and report.exhaustive_group):
                failures.append(f"p={p} m={m} slots={spec.slots}: {report.violations}")
    for (p, k) in rand_rings:
        for m in (1, 2):
            rng = np.random.default_rng(71_000 + 10 * p + m)
            spec = _random_pfister(zpk(p, k), m, rng)
            report = check_group_law(spec, trials=rand_trials, seed=70_500 + p)
            random_closures += report.closure_checked
            if not report.passed:
                failures.append(f"zpk({p},{k}) m={m}: {report.violations}")
    details = (f"{exhaustive_runs} exhaustive subgroup tables; "
               f"{random_closures} randomized closure checks")
    if failures:
        details += "; " + "; ".join(str(f) for f in failures[:5])
    return CriterionOutcome("value_group", "represented units form multiplicative groups",
                            not failures, details)


# -- criterion 8: orthogonal-group engine ---------------------------------------------


def criterion_orthogonal_engine(budget: str = "full") -> CriterionOutcome:
    per_class = 250 if budget == "full" else 50
    failures = []
    checks = 0
    rng = np.random.default_rng(80_000)

    # reflections: involution and negation of the defining vector
    from .witt import reflection

    for t in range(per_class):
        p = (3, 5, 7)[rng.integers(3)]
        ring = fp(p)
        n = 2 + int(rng.integers(4))
        base = census_mod.split_gram(p, n)
        trans = _random_invertible(ring, n, rng)
        q_form = GramForm(ring, trans.T @ base.gram @ trans % p)
        while True:
            u = rng.integers(0, p, size=n, dtype=np.int64)
            if ring.is_unit(q_form.quad(u)):
                break
        refl = reflection(q_form, u)
        checks += 1
        if not np.array_equal(refl.matrix @ refl.matrix % p, np.eye(n, dtype=np.int64)):
            failures.append(f"reflection not involutive at p={p} n={n}")
        if not np.array_equal(refl.apply(u), (-u) % p):
            failures.append(f"reflection does not negate its vector at p={p}")

    # random isometries: construction asserts A^T G A = G
    for t in range(per_class):
        p = (3, 5)[rng.integers(2)]
        ring = fp(p)
        q_form = _random_hyperbolic_form(ring, 2, rng)
        random_isometry(q_form, rng)
        checks += 1

    # reflection factorization round trips
    for t in range(per_class):
        p = (3, 5, 7)[rng.integers(3)]
        ring = fp(p)
        q_form = _random_hyperbolic_form(ring, 2, rng)
        iso = random_isometry(q_form, rng, reflections=int(rng.integers(1, 7)))
        refs = cartan_dieudonne(iso)
        checks += 1
        if len(refs) > 2 * q_form.n:
            failures.append(f"factor count {len(refs)} exceeds 2n at p={p}")
        if compose_reflections(q_form, refs) != iso:
            failures.append(f"recomposition mismatch at p={p}")

    # lifting along the residue map
    for t in range(per_class):
        p = (3, 5)[rng.integers(2)]
        k = 2 + int(rng.integers(2))
        ring = zpk(p, k)
        q_form = _random_hyperbolic_form(ring, 2, rng)
        abar = random_isometry(q_form.residue(), rng)
        lifted = lift_isometry(abar, q_form)
        checks += 1
        if lifted.residue() != abar:
            failures.append(f"lift does not reduce to input at p={p} k={k}")
    details = f"{checks} randomized checks across four classes"
    if failures:
        details += "; " + "; ".join(failures[:5])
    return CriterionOutcome("orthogonal_engine",
                            "reflections, factorization, and residue lifting",
                            not failures, details)


CRITERIA = (
    ("1", criterion_census_degrees),
    ("2", criterion_strata),
    ("3", criterion_meeting_pipeline),
    ("4", criterion_solver_exhaustive),
    ("5", criterion_solver_hensel),
    ("6", criterion_affine_roundtrip),
    ("7", criterion_value_group),
    ("8", criterion_orthogonal_engine),
)


def run(budget: str = "full", stream=None) -> list[CriterionOutcome]:
    stream = stream or sys.stdout
    outcomes = []
    for number, func in CRITERIA:
        outcome = func(budget)
        outcomes.append(outcome)
        status = "PASS" if outcome.passed else "FAIL"
        print(f"[{status}] criterion {number} ({outcome.key}): {outcome.details}", file=stream)
    return outcomes
